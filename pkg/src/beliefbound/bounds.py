"""Closed-form partial-identification bounds on behavioural gap quantities.

Each operation maps observed per-decision tables to a provenance-carrying
interval on a gap the agent's internal model cannot be asked about directly:
preference gaps under shifts, counterfactual fairness and harm gaps, direct
discrimination, and causal harm.  Formulas are pure functions of the tables;
nothing here mutates state.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .errors import DataError, InputError, ZeroMassError
from .tables import (
    Assignment,
    BehaviouralDataset,
    DistTable,
    Number,
    Value,
    expectation,
    merge_assignments,
)

KIND_RANGES = {
    "preference": (-1.0, 1.0),
    "fairness": (-1.0, 1.0),
    "harm": (0.0, 1.0),
    "direct-discrimination": (-1.0, 1.0),
    "causal-harm": (0.0, 1.0),
}

_RANGE_TOL = 1e-9


@dataclass(frozen=True)
class GapInterval:
    """[lower, upper] bound on a gap, with provenance.

    `tight` is set only when the sourcing theorem proves both endpoints are
    achieved by data-compatible models.  `raw_lower`/`raw_upper` keep the
    pre-clamp values whenever a clamp fired; `notes` records clamps and known
    formula caveats so reports can surface them as warnings.
    """

    lower: float
    upper: float
    kind: str
    theorem: str
    tight: bool
    inputs_digest: str
    raw_lower: float | None = None
    raw_upper: float | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KIND_RANGES:
            raise InputError(f"unknown interval kind {self.kind!r}")
        lo, hi = KIND_RANGES[self.kind]
        if self.lower > self.upper + _RANGE_TOL:
            raise DataError(
                f"{self.theorem}: lower {self.lower} exceeds upper {self.upper}; "
                "inputs are mutually inconsistent"
            )
        if self.lower < lo - _RANGE_TOL or self.upper > hi + _RANGE_TOL:
            raise InputError(
                f"{self.theorem}: interval [{self.lower}, {self.upper}] outside "
                f"the {self.kind} range [{lo}, {hi}]"
            )
        object.__setattr__(self, "notes", tuple(self.notes))

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def as_dict(self) -> dict:
        out = {
            "lower": self.lower,
            "upper": self.upper,
            "kind": self.kind,
            "theorem": self.theorem,
            "tight": self.tight,
            "inputs_digest": self.inputs_digest,
            "notes": list(self.notes),
        }
        if self.raw_lower is not None:
            out["raw_lower"] = self.raw_lower
        if self.raw_upper is not None:
            out["raw_upper"] = self.raw_upper
        return out


@dataclass(frozen=True)
class ShiftSpec:
    """What is known about the deployment shift.

    atomic: do(z) with known values; unknown: only the affected variables;
    covariate-informed: unknown mechanism but known shifted covariate table.
    """

    mode: str
    variables: tuple[str, ...]
    values: dict[str, Value] | None = None
    covariates: DistTable | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("atomic", "unknown", "covariate-informed"):
            raise InputError(f"unknown shift mode {self.mode!r}")
        object.__setattr__(self, "variables", tuple(self.variables))
        if self.mode == "unknown" and not self.variables:
            raise InputError("an unknown shift needs a non-empty variable set")
        if self.mode == "atomic" and (
            self.values is None or set(self.values) != set(self.variables)
        ):
            raise InputError("atomic shift values must cover exactly its variables")
        if self.mode == "covariate-informed" and self.covariates is None:
            raise InputError("covariate-informed shift needs the shifted covariate table")


def digest(payload: object) -> str:
    """Stable short digest of bound inputs, for report provenance."""

    def default(obj):
        if isinstance(obj, DistTable):
            return {
                "scope": [[r.name, list(r.domain)] for r in obj.scope],
                "entries": sorted(
                    (list(map(str, k)), float(p)) for k, p in obj.entries.items()
                ),
            }
        if isinstance(obj, frozenset):
            return sorted(map(str, obj))
        return str(obj)

    blob = json.dumps(payload, sort_keys=True, default=default).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _pieces(
    table: DistTable, utility: str, c: Assignment, z: Assignment
) -> tuple[Number, Number]:
    """Per-decision envelope of E[Y | do(z), c] from one observational table.

    lower = E[Y|c,z] P(c,z) / (P(c,z) + 1 - P(z))
    upper = (E[Y|c,z] P(c,z) + 1 - P(z)) / (P(c,z) + 1 - P(z))
    """
    cz = merge_assignments(c, z)
    p_cz = table.prob(cz)
    p_z = table.prob(z)
    den = p_cz + 1 - p_z
    if float(p_cz) <= 0.0:
        raise ZeroMassError(f"event {cz} has zero probability in the table")
    if float(den) <= 0.0:
        raise ZeroMassError(f"denominator P{cz} + 1 - P{dict(z)} vanishes")
    e = expectation(table, utility, cz)
    return e * p_cz / den, (e * p_cz + 1 - p_z) / den


def _check_pair(data: BehaviouralDataset, d: Value, d_star: Value) -> None:
    if d == d_star:
        raise InputError("decision and baseline must differ")
    for value in (d, d_star):
        if value not in data.decisions:
            raise InputError(f"decision {value!r} not in {data.decisions}")


def thm1_gap_interval(
    data: BehaviouralDataset,
    c: Assignment,
    z: Assignment,
    d: Value,
    d_star: Value,
) -> GapInterval:
    """Preference-gap interval under a known atomic shift do(z), context c.

    Both endpoints are achieved by models that reproduce the observed tables,
    so the interval is tight.
    """
    _check_pair(data, d, d_star)
    lo_d, up_d = _pieces(data.table(d), data.utility, c, z)
    lo_s, up_s = _pieces(data.table(d_star), data.utility, c, z)
    return GapInterval(
        lower=float(lo_d - up_s),
        upper=float(up_d - lo_s),
        kind="preference",
        theorem="known-shift",
        tight=True,
        inputs_digest=digest(
            {"op": "thm1", "c": dict(c), "z": dict(z), "d": d, "d_star": d_star,
             "tables": {str(k): v for k, v in data.per_decision.items()}}
        ),
    )


def thm2_multidomain_lower(
    data: BehaviouralDataset,
    c: Assignment,
    z: Assignment,
    d: Value,
    d_star: Value,
) -> GapInterval:
    """Preference-gap interval pooled over experimentally grounded domains.

    Every ordered pair of domains yields a valid single-domain interval whose
    shift target shrinks to the not-yet-intervened part of z; the pooled lower
    bound is the max (and the upper the min) over pairs.  Tightness is proved
    for at most two domains, so the flag is set only for k <= 2.
    """
    _check_pair(data, d, d_star)
    domains = data.all_domains()
    pieces = []
    for dom in domains:
        extra = set(dom.intervened) - set(z)
        if extra:
            raise InputError(
                f"domain {dom.label or '(base)'} intervenes on {sorted(extra)}, "
                "which is outside the shift set"
            )
        for name, value in dom.intervened.items():
            if z[name] != value:
                raise InputError(
                    f"domain {dom.label or '(base)'} fixes {name}={value!r} but the "
                    f"shift sets {name}={z[name]!r}"
                )
        residual = {k: v for k, v in z.items() if k not in dom.intervened}
        pieces.append(
            (
                dom.label,
                _pieces(dom.per_decision[d], data.utility, c, residual),
                _pieces(dom.per_decision[d_star], data.utility, c, residual),
            )
        )
    lower, lower_pair = max(
        ((float(pi[0] - pj[1]), (li, lj)) for li, pi, _ in pieces for lj, _, pj in pieces),
        key=lambda t: t[0],
    )
    upper, upper_pair = min(
        ((float(pi[1] - pj[0]), (li, lj)) for li, pi, _ in pieces for lj, _, pj in pieces),
        key=lambda t: t[0],
    )
    return GapInterval(
        lower=lower,
        upper=upper,
        kind="preference",
        theorem="multi-domain",
        tight=len(domains) <= 2,
        inputs_digest=digest(
            {"op": "thm2", "c": dict(c), "z": dict(z), "d": d, "d_star": d_star,
             "domains": [dom.label for dom in domains]}
        ),
        notes=(
            f"lower from domain pair {lower_pair}",
            f"upper from domain pair {upper_pair}",
        ),
    )


def thm3_unknown_shift_interval() -> GapInterval:
    """Preference gap under a shift whose nature is unknown: always [-1, 1].

    Tight: canonical witness models achieve both ends whatever the data says.
    """
    return GapInterval(
        lower=-1.0,
        upper=1.0,
        kind="preference",
        theorem="unknown-shift",
        tight=True,
        inputs_digest=digest({"op": "thm3"}),
    )


def thm4_covariate_shift_lower(
    data: BehaviouralDataset,
    p_sigma_c: DistTable,
    c: Assignment,
    z: Assignment,
    d: Value,
    d_star: Value,
) -> GapInterval:
    """Preference-gap interval when only the shifted covariate table is known.

    Lower bound:
        1 - (2 + E_{d*}[Y|c] P_{d*}(c) - E_d[Y|c] P_d(c)
               - P_d(z) - P_{d*}(z) + P_d(c)) / P_sigma(c)
    clamped to >= -1.  The upper bound is the mirrored lower bound of the
    swapped pair; unlike the lower bound it is a derived convenience, and the
    whole interval is not tight in general.
    """
    _check_pair(data, d, d_star)
    extra = set(z) - set(c)
    if extra:
        raise InputError(f"shift variables {sorted(extra)} are not context variables")
    merge_assignments(c, z)
    missing = set(c) - set(p_sigma_c.names)
    if missing:
        raise InputError(f"shifted covariate table lacks {sorted(missing)}")
    ps = p_sigma_c.prob(c)
    if float(ps) <= 0.0:
        raise ZeroMassError(f"context {dict(c)} has zero shifted probability")

    def raw_lower(a: Value, b: Value) -> float:
        ta, tb = data.table(a), data.table(b)
        e_a = expectation(ta, data.utility, c)
        e_b = expectation(tb, data.utility, c)
        num = (
            2
            + e_b * tb.prob(c)
            - e_a * ta.prob(c)
            - ta.prob(z)
            - tb.prob(z)
            + ta.prob(c)
        )
        return float(1 - num / ps)

    lo_raw = raw_lower(d, d_star)
    up_raw = -raw_lower(d_star, d)
    lower = max(lo_raw, -1.0)
    upper = min(up_raw, 1.0)
    notes = ["upper bound is the mirrored lower bound of the swapped pair, not a stated result"]
    if lo_raw < -1.0:
        notes.append(f"lower clamped from {lo_raw}")
    if up_raw > 1.0:
        notes.append(f"upper clamped from {up_raw}")
    if lower > upper + _RANGE_TOL:
        raise DataError(
            "shifted covariate probabilities are inconsistent with the observed "
            f"tables (raw interval [{lo_raw}, {up_raw}])"
        )
    return GapInterval(
        lower=lower,
        upper=upper,
        kind="preference",
        theorem="covariate-shift",
        tight=False,
        inputs_digest=digest(
            {"op": "thm4", "c": dict(c), "z": dict(z), "d": d, "d_star": d_star,
             "sigma": p_sigma_c}
        ),
        raw_lower=lo_raw if lo_raw < -1.0 else None,
        raw_upper=up_raw if up_raw > 1.0 else None,
        notes=tuple(notes),
    )


def fairness_gap_interval(
    data: BehaviouralDataset,
    d: Value,
    z0: Assignment,
    c: Assignment,
) -> GapInterval:
    """Counterfactual fairness gap relative to baseline attribute value z0.

    The interval is [-E, 1 - E] with E = E_d[Y | z0, c]: width exactly one,
    whatever the data.  Flipping the protected attribute is never ruled in or
    out by behaviour alone.
    """
    if d not in data.decisions:
        raise InputError(f"decision {d!r} not in {data.decisions}")
    if len(z0) != 1:
        raise InputError("z0 must assign exactly the protected attribute")
    (attr, value) = next(iter(z0.items()))
    ref = data.table(d).ref(attr)
    if len(ref.domain) != 2:
        raise InputError(f"protected attribute {attr!r} must be binary, got {ref.domain}")
    if value not in ref.domain:
        raise InputError(f"baseline value {value!r} outside domain of {attr!r}")
    if attr in c:
        raise InputError(f"protected attribute {attr!r} must not appear in the context")
    e = expectation(data.table(d), data.utility, merge_assignments(z0, c))
    lower = -float(e)
    return GapInterval(
        lower=lower,
        upper=lower + 1.0,
        kind="fairness",
        theorem="counterfactual-fairness",
        tight=True,
        inputs_digest=digest(
            {"op": "fairness", "d": d, "z0": dict(z0), "c": dict(c)}
        ),
    )


def harm_gap_interval(
    data: BehaviouralDataset,
    d: Value,
    d0: Value,
    c: Assignment,
) -> GapInterval:
    """Counterfactual harm gap of d against baseline d0 in context c.

    With a = E_d[Y|c] and b = E_{d0}[Y|c], the joint-counterfactual harm mass
    is limited to the Frechet interval [max(0, a + b - 1), min(a, b)].
    """
    _check_pair(data, d, d0)
    ref = data.table(d).ref(data.utility)
    if tuple(sorted(ref.domain)) != (0, 1):
        raise InputError(f"harm bounds need a binary 0/1 utility, got {ref.domain}")
    a = float(expectation(data.table(d), data.utility, c))
    b = float(expectation(data.table(d0), data.utility, c))
    return GapInterval(
        lower=max(0.0, a + b - 1.0),
        upper=min(a, b),
        kind="harm",
        theorem="counterfactual-harm",
        tight=True,
        inputs_digest=digest({"op": "harm", "d": d, "d0": d0, "c": dict(c)}),
    )


def direct_discrimination_interval(
    data: BehaviouralDataset,
    d: Value,
    z0: Assignment,
    z1: Assignment,
    c: Assignment,
) -> GapInterval:
    """Direct-discrimination gap: utility difference when the protected
    attribute is set to z1 versus z0 with everything else held at c."""
    if d not in data.decisions:
        raise InputError(f"decision {d!r} not in {data.decisions}")
    if len(z0) != 1 or len(z1) != 1 or set(z0) != set(z1):
        raise InputError("z0 and z1 must assign the same single protected attribute")
    (attr,) = z0
    table = data.table(d)
    ref = table.ref(attr)
    if len(ref.domain) != 2:
        raise InputError(f"protected attribute {attr!r} must be binary, got {ref.domain}")
    if z0[attr] == z1[attr]:
        raise InputError("z0 and z1 must differ")
    if attr in c:
        raise InputError(f"protected attribute {attr!r} must not appear in the context")
    e1 = expectation(table, data.utility, merge_assignments(z1, c))
    e0 = expectation(table, data.utility, merge_assignments(z0, c))
    p1 = table.prob(merge_assignments(z1, c))
    p0 = table.prob(merge_assignments(z0, c))
    diff = e1 * p1 - e0 * p0
    return GapInterval(
        lower=float(diff + p0 - 1),
        upper=float(diff + 1 - p1),
        kind="direct-discrimination",
        theorem="direct-discrimination",
        tight=True,
        inputs_digest=digest(
            {"op": "direct", "d": d, "z0": dict(z0), "z1": dict(z1), "c": dict(c)}
        ),
    )


def causal_harm_interval(
    p: DistTable,
    d1: Value,
    d0: Value,
    c: Assignment,
    decision: str = "D",
    utility: str = "Y",
    harm_value: Value = 1,
) -> GapInterval:
    """Causal harm gap of d1 against d0 from one observational joint table.

    The table must include the training policy's decision column.  The printed
    lower-bound numerator cancels to zero once the interventional conditionals
    are read off the observational table, so the lower bound is identically
    zero; this is kept as stated and flagged in the notes rather than repaired.
    """
    if d1 == d0:
        raise InputError("decision and baseline must differ")
    if decision not in p.names:
        raise InputError(f"table lacks the decision column {decision!r}")
    ref = p.ref(utility)
    if tuple(sorted(ref.domain)) != (0, 1):
        raise InputError(f"causal harm needs a binary 0/1 utility, got {ref.domain}")
    y1 = harm_value
    if y1 not in ref.domain:
        raise InputError(f"harm value {y1!r} outside domain of {utility!r}")
    (y0,) = [v for v in ref.domain if v != y1]

    c = dict(c)
    p_y1_d1 = p.prob(merge_assignments({utility: y1, decision: d1}, c))
    p_d1 = p.prob(merge_assignments({decision: d1}, c))
    p_y0_d0 = p.prob(merge_assignments({utility: y0, decision: d0}, c))
    p_d0 = p.prob(merge_assignments({decision: d0}, c))
    p_c = p.prob(c)
    if float(p_c) <= 0 or float(p_d1) <= 0 or float(p_d0) <= 0:
        raise ZeroMassError(f"decision marginals undefined given context {c}")
    q_y1_d1 = p_y1_d1 / p_d1          # P_{d1}(y1 | c) under grounding
    q_y0_d0 = p_y0_d0 / p_d0          # P_{d0}(y0 | c)
    pol_d1 = p_d1 / p_c               # P(d1 | c), the training policy
    pol_d0 = p_d0 / p_c
    den = q_y0_d0 * pol_d0
    if float(den) <= 0.0:
        raise ZeroMassError(
            f"baseline event (utility={y0!r}, decision={d0!r}) has zero mass given {c}"
        )
    up_raw = float(q_y1_d1 * (1 - pol_d1) / den)
    upper = min(1.0, max(0.0, up_raw))
    notes = ["lower-bound numerator cancels to zero under grounding (kept as stated)"]
    if up_raw > 1.0:
        notes.append(f"upper clamped from {up_raw}")
    return GapInterval(
        lower=0.0,
        upper=upper,
        kind="causal-harm",
        theorem="causal-harm",
        tight=False,
        inputs_digest=digest(
            {"op": "causal-harm", "d1": d1, "d0": d0, "c": dict(c), "table": p}
        ),
        raw_upper=up_raw if up_raw > 1.0 else None,
        notes=tuple(notes),
    )
