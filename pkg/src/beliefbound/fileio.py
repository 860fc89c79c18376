"""Reading and writing models, tables, datasets and sample logs.

Formats:
  * model description (JSON): ``variables`` (name, domain, parents,
    exo_parents), ``exogenous`` (name, domain), ``exogenous_distribution``
    (list of {assignment, p}), ``mechanisms`` (per target: list of
    {given, value}).  Probabilities may be exact decimal strings.
  * distribution (JSON): {scope, entries: [{assignment, p}]}.
  * behavioural dataset (JSON): decision, utility, per-decision distribution
    objects, optional experimental domains.
  * sample log (CSV): header of variable names plus an optional ``weight``
    column.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .errors import InputError
from .scm import ExoDistribution, Mechanism, Scm
from .tables import (
    BehaviouralDataset,
    DistTable,
    ExperimentalDomain,
    Number,
    Policy,
    Value,
    VariableRef,
    estimate_from_samples,
    policy_to_atomic,
)


def _parse_prob(raw) -> Number:
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad probability literal {raw!r}") from exc
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw)
    raise InputError(f"bad probability value {raw!r}")


def _dump_prob(p: Number):
    return str(p) if isinstance(p, Fraction) else float(p)


def _load_json(source) -> dict:
    if isinstance(source, Mapping):
        return dict(source)
    text = Path(source).read_text(encoding="utf-8")
    return json.loads(text)


def _ref(obj: Mapping) -> VariableRef:
    return VariableRef(obj["name"], tuple(obj["domain"]))


# -- structural models -----------------------------------------------------


def load_scm(source) -> Scm:
    doc = _load_json(source)
    exo_refs = {r.name: r for r in map(_ref, doc.get("exogenous", []))}
    atoms = []
    for item in doc.get("exogenous_distribution", []):
        assignment = item["assignment"]
        key = tuple(assignment[name] for name in exo_refs)
        atoms.append((key, _parse_prob(item["p"])))
    exo = ExoDistribution(tuple(exo_refs.values()), tuple(atoms))

    variables = []
    mechanisms = {}
    for spec in doc["variables"]:
        ref = _ref(spec)
        variables.append(ref)
        parents = tuple(spec.get("parents", ()))
        exo_parents = tuple(spec.get("exo_parents", ()))
        rows = doc["mechanisms"].get(ref.name)
        if rows is None:
            raise InputError(f"no mechanism rows for variable {ref.name!r}")
        table = {}
        for row in rows:
            given = row["given"]
            key = tuple(given[p] for p in parents) + tuple(given[e] for e in exo_parents)
            if key in table:
                raise InputError(f"duplicate mechanism row for {ref.name!r} at {given}")
            table[key] = row["value"]
        mechanisms[ref.name] = Mechanism(ref, parents, exo_parents, table)
    return Scm(tuple(variables), mechanisms, exo)


def dump_scm(scm: Scm) -> dict:
    mechanisms = {}
    for name in scm.names:
        mech = scm.mechanisms[name]
        rows = []
        for key, value in sorted(mech.table.items(), key=lambda kv: str(kv[0])):
            given = dict(zip((*mech.parents, *mech.exo_parents), key))
            rows.append({"given": given, "value": value})
        mechanisms[name] = rows
    return {
        "variables": [
            {
                "name": r.name,
                "domain": list(r.domain),
                "parents": list(scm.mechanisms[r.name].parents),
                "exo_parents": list(scm.mechanisms[r.name].exo_parents),
            }
            for r in scm.variables
        ],
        "exogenous": [
            {"name": r.name, "domain": list(r.domain)} for r in scm.exo.variables
        ],
        "exogenous_distribution": [
            {"assignment": dict(zip(scm.exo.names, key)), "p": _dump_prob(p)}
            for key, p in scm.exo.atoms
        ],
        "mechanisms": mechanisms,
    }


# -- distribution tables and datasets ---------------------------------------


def load_table(source) -> DistTable:
    doc = _load_json(source)
    refs = tuple(map(_ref, doc["scope"]))
    names = [r.name for r in refs]
    entries = {}
    for item in doc["entries"]:
        key = tuple(item["assignment"][n] for n in names)
        entries[key] = _parse_prob(item["p"])
    return DistTable(refs, entries)


def dump_table(table: DistTable) -> dict:
    return {
        "scope": [{"name": r.name, "domain": list(r.domain)} for r in table.scope],
        "entries": [
            {"assignment": dict(zip(table.names, key)), "p": _dump_prob(p)}
            for key, p in sorted(table.entries.items(), key=lambda kv: str(kv[0]))
        ],
    }


def _decision_key(domain: Sequence[Value], key: str) -> Value:
    matches = [v for v in domain if str(v) == key]
    if len(matches) != 1:
        raise InputError(f"decision key {key!r} is ambiguous or unknown in {domain}")
    return matches[0]


def _load_per_decision(doc: Mapping, domain: Sequence[Value]) -> dict[Value, DistTable]:
    return {
        _decision_key(domain, key): load_table(table_doc)
        for key, table_doc in doc.items()
    }


def load_dataset(source) -> BehaviouralDataset:
    doc = _load_json(source)
    decision = _ref(doc["decision"])
    per_decision = _load_per_decision(doc["per_decision"], decision.domain)
    domains = tuple(
        ExperimentalDomain(
            dom["label"],
            dict(dom.get("intervened", {})),
            _load_per_decision(dom["per_decision"], decision.domain),
        )
        for dom in doc.get("domains", [])
    )
    return BehaviouralDataset(
        decision, per_decision, utility=doc.get("utility", "Y"), domains=domains
    )


def dump_dataset(data: BehaviouralDataset) -> dict:
    out = {
        "decision": {"name": data.decision.name, "domain": list(data.decision.domain)},
        "utility": data.utility,
        "per_decision": {
            str(d): dump_table(t) for d, t in sorted(data.per_decision.items(), key=lambda kv: str(kv[0]))
        },
    }
    if data.domains:
        out["domains"] = [
            {
                "label": dom.label,
                "intervened": dict(dom.intervened),
                "per_decision": {
                    str(d): dump_table(t)
                    for d, t in sorted(dom.per_decision.items(), key=lambda kv: str(kv[0]))
                },
            }
            for dom in data.domains
        ]
    return out


# -- CSV sample logs ---------------------------------------------------------


def _parse_cell(raw: str) -> Value:
    raw = raw.strip()
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def load_csv_log(source) -> tuple[list[dict[str, Value]], list[float]]:
    """Rows and weights from a UTF-8 sample log with a header line."""
    path = Path(source)
    rows: list[dict[str, Value]] = []
    weights: list[float] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise InputError(f"{path}: empty log")
        has_weight = "weight" in reader.fieldnames
        for record in reader:
            weight = 1.0
            row = {}
            for name, raw in record.items():
                if raw is None:
                    raise InputError(f"{path}: ragged row {record}")
                if name == "weight" and has_weight:
                    weight = float(raw)
                else:
                    row[name] = _parse_cell(raw)
            rows.append(row)
            weights.append(weight)
    return rows, weights


def dataset_from_log(
    rows: Sequence[Mapping[str, Value]],
    weights: Sequence[float] | None,
    decision: str,
    context: Sequence[str],
    utility: str = "Y",
) -> BehaviouralDataset:
    """Behavioural dataset from a policy-generated log.

    The joint frequency table is converted decision-by-decision through the
    policy identity P_d(v) = P(v, d) / P(d | context), which needs the policy
    to be positive on every context (deterministic logs are rejected).
    """
    joint = estimate_from_samples(list(rows), weights)
    dref = joint.ref(decision)
    ctx = tuple(sorted(context))
    rows_by_ctx: dict[tuple[Value, ...], dict[Value, Number]] = {}
    from itertools import product as _product

    for combo in _product(*[joint.ref(name).domain for name in ctx]):
        assignment = dict(zip(ctx, combo))
        mass = joint.prob(assignment)
        if float(mass) <= 0:
            continue
        rows_by_ctx[combo] = {
            d: joint.prob({**assignment, decision: d}) / mass for d in dref.domain
        }
    policy = Policy(dref, ctx, rows_by_ctx)
    per_decision = {d: policy_to_atomic(joint, policy, d) for d in dref.domain}
    return BehaviouralDataset(dref, per_decision, utility=utility)


def joint_from_log(rows, weights=None) -> DistTable:
    return estimate_from_samples(list(rows), weights)


def scm_to_dataset(
    scm: Scm,
    decision: str,
    utility: str = "Y",
    domains: Sequence[tuple[str, Mapping[str, Value]]] = (),
) -> BehaviouralDataset:
    from .scm import scm_dataset

    return scm_dataset(scm, decision, utility=utility, domains=domains)
