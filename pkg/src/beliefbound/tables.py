"""Finite probability tables and behavioural datasets.

Tables are sparse mappings from full assignments over a canonical (name-sorted)
scope to probabilities.  Probabilities may be floats or ``fractions.Fraction``;
all table algebra is plain Python arithmetic, so exact rational inputs stay
exact through marginalisation, conditioning and expectations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import InputError, ZeroMassError

Value = Union[int, str]
Number = Union[int, float, Fraction]
Assignment = Mapping[str, Value]

SUM_TOL = 1e-12


def _close_to_one(total: Number) -> bool:
    return abs(float(total) - 1.0) <= SUM_TOL


@dataclass(frozen=True)
class VariableRef:
    """A named variable with an ordered finite domain."""

    name: str
    domain: tuple[Value, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", tuple(self.domain))
        if not self.domain:
            raise InputError(f"variable {self.name!r} has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise InputError(f"variable {self.name!r} has duplicate domain values")

    def index(self, value: Value) -> int:
        try:
            return self.domain.index(value)
        except ValueError:
            raise InputError(
                f"value {value!r} not in domain of {self.name!r} {self.domain}"
            ) from None

    @property
    def numeric(self) -> bool:
        return all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in self.domain)


def _sorted_scope(scope: Iterable[VariableRef]) -> tuple[VariableRef, ...]:
    refs = sorted(scope, key=lambda r: r.name)
    names = [r.name for r in refs]
    if len(set(names)) != len(names):
        raise InputError(f"duplicate variables in scope: {names}")
    return tuple(refs)


@dataclass(frozen=True)
class DistTable:
    """Joint probability table over a canonical, name-sorted scope.

    Missing cells carry probability zero.  Construction validates
    non-negativity and normalisation (within 1e-12).
    """

    scope: tuple[VariableRef, ...]
    entries: dict[tuple[Value, ...], Number] = field(default_factory=dict)

    def __post_init__(self) -> None:
        refs = _sorted_scope(self.scope)
        order = [r.name for r in refs]
        original = {r.name: i for i, r in enumerate(self.scope)}
        remap = tuple(original[name] for name in order)
        fixed: dict[tuple[Value, ...], Number] = {}
        for key, p in self.entries.items():
            key = tuple(key)
            if len(key) != len(refs):
                raise InputError(f"entry {key} does not match scope arity {len(refs)}")
            key = tuple(key[i] for i in remap)
            for ref, v in zip(refs, key):
                if v not in ref.domain:
                    raise InputError(f"value {v!r} not in domain of {ref.name!r}")
            if float(p) < -SUM_TOL:
                raise InputError(f"negative probability {p} at {key}")
            if key in fixed:
                raise InputError(f"duplicate entry for assignment {key}")
            fixed[key] = p
        total = sum(fixed.values(), start=0)
        if not _close_to_one(total):
            raise InputError(f"table mass {float(total)} is not 1 within {SUM_TOL}")
        object.__setattr__(self, "scope", refs)
        object.__setattr__(self, "entries", fixed)

    # -- lookups ---------------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.scope)

    def ref(self, name: str) -> VariableRef:
        for r in self.scope:
            if r.name == name:
                return r
        raise InputError(f"variable {name!r} not in scope {self.names}")

    def _positions(self, given: Assignment) -> list[tuple[int, Value]]:
        out = []
        for name, value in given.items():
            i = self.names.index(name) if name in self.names else -1
            if i < 0:
                raise InputError(f"variable {name!r} not in scope {self.names}")
            if value not in self.scope[i].domain:
                raise InputError(f"value {value!r} not in domain of {name!r}")
            out.append((i, value))
        return out

    def prob(self, event: Assignment) -> Number:
        """Probability mass of a (possibly partial) assignment."""
        pos = self._positions(event)
        return sum(
            (p for key, p in self.entries.items() if all(key[i] == v for i, v in pos)),
            start=0,
        )

    def assignments(self):
        """Iterate (assignment dict, probability) over stored cells."""
        for key, p in self.entries.items():
            yield dict(zip(self.names, key)), p

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistTable):
            return NotImplemented
        if self.scope != other.scope:
            return False
        keys = set(self.entries) | set(other.entries)
        return all(
            math.isclose(
                float(self.entries.get(k, 0)), float(other.entries.get(k, 0)),
                rel_tol=0.0, abs_tol=SUM_TOL,
            )
            for k in keys
        )

    __hash__ = None  # type: ignore[assignment]


def query(table: DistTable, target: Sequence[str], given: Assignment | None = None) -> DistTable:
    """Conditional-marginal table P(target | given).

    Raises ZeroMassError when the conditioning event has no mass.
    """
    given = dict(given or {})
    mass = table.prob(given) if given else 1
    if given and float(mass) <= 0.0:
        raise ZeroMassError(f"conditioning event {given} has probability zero")
    target = sorted(set(target))
    refs = [table.ref(name) for name in target]
    pos = table._positions(given)
    idx = [table.names.index(name) for name in target]
    cells: dict[tuple[Value, ...], Number] = {}
    for key, p in table.entries.items():
        if all(key[i] == v for i, v in pos):
            sub = tuple(key[i] for i in idx)
            cells[sub] = cells.get(sub, 0) + p
    if given:
        cells = {k: _div(p, mass) for k, p in cells.items()}
    return DistTable(tuple(refs), cells)


def _div(num: Number, den: Number) -> Number:
    if isinstance(num, Fraction) and isinstance(den, Fraction):
        return num / den
    return float(num) / float(den)


def expectation(table: DistTable, of: str, given: Assignment | None = None) -> Number:
    """Conditional mean of a numeric variable."""
    ref = table.ref(of)
    if not ref.numeric:
        raise InputError(f"variable {of!r} has a non-numeric domain {ref.domain}")
    cond = query(table, [of], given)
    return sum((key[0] * p for key, p in cond.entries.items()), start=0)


def total_variation(p: DistTable, q: DistTable) -> Number:
    """Total variation distance (half the L1 distance) between two tables."""
    if p.names != q.names or tuple(r.domain for r in p.scope) != tuple(r.domain for r in q.scope):
        raise InputError(f"scope mismatch: {p.names} vs {q.names}")
    keys = set(p.entries) | set(q.entries)
    acc: Number = 0
    for k in keys:
        a = p.entries.get(k, 0)
        b = q.entries.get(k, 0)
        d = a - b if isinstance(a, Fraction) and isinstance(b, Fraction) else float(a) - float(b)
        acc = acc + abs(d)
    return acc / 2 if isinstance(acc, Fraction) else acc / 2.0


def estimate_from_samples(
    rows: Sequence[Assignment],
    weights: Sequence[Number] | None = None,
) -> DistTable:
    """Normalised frequency table from (optionally weighted) sample rows.

    Domains are inferred from the observed values, sorted.  Weighted rows let
    aggregated logs (counts) load without expansion.
    """
    rows = list(rows)
    if not rows:
        raise InputError("no sample rows")
    if weights is None:
        weights = [1] * len(rows)
    weights = list(weights)
    if len(weights) != len(rows):
        raise InputError(f"{len(weights)} weights for {len(rows)} rows")
    if any(float(w) < 0 for w in weights):
        raise InputError("negative sample weight")
    total = sum(weights, start=0)
    if float(total) <= 0:
        raise InputError("all sample weights are zero")
    names = sorted(rows[0])
    domains: dict[str, set[Value]] = {n: set() for n in names}
    counts: dict[tuple[Value, ...], Number] = {}
    for row, w in zip(rows, weights):
        if sorted(row) != names:
            raise InputError(f"row variables {sorted(row)} differ from {names}")
        key = tuple(row[n] for n in names)
        for n in names:
            domains[n].add(row[n])
        counts[key] = counts.get(key, 0) + w
    refs = tuple(
        VariableRef(n, tuple(sorted(domains[n], key=lambda v: (str(type(v)), v))))
        for n in names
    )
    return DistTable(refs, {k: _div(w, total) for k, w in counts.items()})


# -- policies and behavioural data ---------------------------------------


@dataclass(frozen=True)
class Policy:
    """Stochastic decision rule: context assignment -> distribution over decisions."""

    decision: VariableRef
    context: tuple[str, ...]
    rows: dict[tuple[Value, ...], dict[Value, Number]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "context", tuple(sorted(self.context)))
        for ctx, row in self.rows.items():
            if len(ctx) != len(self.context):
                raise InputError(f"context key {ctx} does not match {self.context}")
            if not _close_to_one(sum(row.values(), start=0)):
                raise InputError(f"policy row for context {ctx} does not sum to 1")
            if any(float(p) < 0 for p in row.values()):
                raise InputError(f"negative policy probability in context {ctx}")
            for d in row:
                if d not in self.decision.domain:
                    raise InputError(f"decision {d!r} outside {self.decision.domain}")

    def prob(self, context: Assignment, d: Value) -> Number:
        key = tuple(context[name] for name in self.context)
        if key not in self.rows:
            raise InputError(f"policy has no row for context {dict(zip(self.context, key))}")
        return self.rows[key].get(d, 0)


def uniform_policy(decision: VariableRef, context: Sequence[VariableRef]) -> Policy:
    """Uniform-over-decisions policy on the full context product."""
    from itertools import product

    refs = sorted(context, key=lambda r: r.name)
    n = len(decision.domain)
    share = Fraction(1, n)
    rows = {
        ctx: {d: share for d in decision.domain}
        for ctx in product(*[r.domain for r in refs])
    }
    return Policy(decision, tuple(r.name for r in refs), rows)


@dataclass(frozen=True)
class ExperimentalDomain:
    """Per-decision tables observed in a domain where `intervened` was held fixed."""

    label: str
    intervened: dict[str, Value]
    per_decision: dict[Value, DistTable]


@dataclass(frozen=True)
class BehaviouralDataset:
    """Observed per-decision distributions P_d(V \\ {D}), optionally per domain.

    `utility` names the bounded numeric outcome column used by every bound.
    The base (un-intervened) tables count as the empty-intervention domain.
    """

    decision: VariableRef
    per_decision: dict[Value, DistTable]
    utility: str = "Y"
    domains: tuple[ExperimentalDomain, ...] = ()

    def __post_init__(self) -> None:
        if set(self.per_decision) != set(self.decision.domain):
            raise InputError(
                f"per-decision tables cover {sorted(map(str, self.per_decision))}, "
                f"expected decisions {self.decision.domain}"
            )
        scopes = {t.names for t in self.per_decision.values()}
        if len(scopes) != 1:
            raise InputError(f"per-decision tables disagree on scope: {scopes}")
        (names,) = scopes
        if self.decision.name in names:
            raise InputError("per-decision tables must not include the decision variable")
        for dom in self.domains:
            for d, t in dom.per_decision.items():
                if d not in self.decision.domain:
                    raise InputError(f"domain {dom.label!r} has unknown decision {d!r}")
                if t.names != names:
                    raise InputError(f"domain {dom.label!r} scope differs from base scope")
        self._check_utility(names)

    def _check_utility(self, names: tuple[str, ...]) -> None:
        if self.utility not in names:
            raise InputError(f"utility {self.utility!r} not in scope {names}")
        ref = self.table(self.decision.domain[0]).ref(self.utility)
        if not ref.numeric or any(v < 0 or v > 1 for v in ref.domain):
            raise InputError(
                f"utility domain {ref.domain} must be numeric within [0, 1]"
            )

    @property
    def scope(self) -> tuple[VariableRef, ...]:
        return self.table(self.decision.domain[0]).scope

    @property
    def decisions(self) -> tuple[Value, ...]:
        return self.decision.domain

    def table(self, d: Value) -> DistTable:
        if d not in self.per_decision:
            raise InputError(f"no table for decision {d!r}")
        return self.per_decision[d]

    def all_domains(self) -> tuple[ExperimentalDomain, ...]:
        """Base observational domain (empty intervention) plus experimental ones."""
        base = ExperimentalDomain("", {}, dict(self.per_decision))
        return (base, *self.domains)


def policy_to_atomic(p_pi: DistTable, pi: Policy, d: Value) -> DistTable:
    """Recover the atomic-decision table P_d(v) from a policy-generated joint.

    Uses P_d(y, c) = P_pi(y | d, c) * P_pi(c), which is valid whenever the
    policy gives the decision positive probability in every context.
    """
    if d not in pi.decision.domain:
        raise InputError(f"decision {d!r} outside {pi.decision.domain}")
    dname = pi.decision.name
    if dname not in p_pi.names:
        raise InputError(f"joint table lacks the decision variable {dname!r}")
    for name in pi.context:
        if name not in p_pi.names:
            raise InputError(f"joint table lacks context variable {name!r}")

    from itertools import product

    ctx_refs = [p_pi.ref(name) for name in pi.context]
    cond: dict[tuple[Value, ...], Number] = {}
    for values in product(*[r.domain for r in ctx_refs]):
        ctx = dict(zip(pi.context, values))
        mass_c = p_pi.prob(ctx)
        mass_dc = p_pi.prob({**ctx, dname: d})
        if float(mass_c) <= 0 or float(mass_dc) <= 0:
            raise ZeroMassError(
                f"positivity violated at context {ctx}: "
                f"P(context)={float(mass_c)}, P(decision, context)={float(mass_dc)}"
            )
        cond[values] = _div(mass_dc, mass_c)

    keep = [i for i, name in enumerate(p_pi.names) if name != dname]
    d_at = p_pi.names.index(dname)
    ctx_at = [p_pi.names.index(name) for name in pi.context]
    out: dict[tuple[Value, ...], Number] = {}
    for key, p in p_pi.entries.items():
        if key[d_at] != d:
            continue
        ctx_key = tuple(key[i] for i in ctx_at)
        sub = tuple(key[i] for i in keep)
        out[sub] = out.get(sub, 0) + _div(p, cond[ctx_key])
    refs = tuple(p_pi.scope[i] for i in keep)
    return DistTable(refs, out)


def merge_assignments(*parts: Assignment) -> dict[str, Value]:
    """Union of partial assignments; overlapping variables must agree."""
    merged: dict[str, Value] = {}
    for part in parts:
        for name, value in part.items():
            if name in merged and merged[name] != value:
                raise InputError(
                    f"conflicting values for {name!r}: {merged[name]!r} vs {value!r}"
                )
            merged[name] = value
    return merged
