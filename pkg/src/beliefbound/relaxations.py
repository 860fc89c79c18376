"""Bounds under weakened assumptions.

Three relaxations of the exact-grounding story: behaviour known only up to a
total-variation ball, utility observed only through an aligned proxy, and
structural side-knowledge that one covariate deconfounds the shifted variable
from the utility.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import lp
from .bounds import GapInterval, digest, _RANGE_TOL
from .errors import InputError, OracleError, SamplingError, UnsupportedError
from .tables import (
    Assignment,
    BehaviouralDataset,
    DistTable,
    Value,
    expectation,
    merge_assignments,
)

DEFAULT_SAMPLES = 10_000
DEFAULT_CONCENTRATION = 400.0


@dataclass(frozen=True)
class GroundingBall:
    """Total-variation neighbourhood of the observed per-decision tables.

    `centres` may pin explicit centre tables; by default the ball sits on the
    dataset the bound is called with.  Only the total-variation discrepancy
    ships; the field exists so reports can name the metric.
    """

    delta: float
    discrepancy: str = "tv"
    centres: dict[Value, DistTable] | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta <= 1.0:
            raise InputError(f"delta must lie in [0, 1], got {self.delta}")
        if self.discrepancy != "tv":
            raise UnsupportedError(
                f"only the total-variation discrepancy is implemented, got {self.discrepancy!r}"
            )

    def centre(self, data: BehaviouralDataset, d: Value) -> DistTable:
        if self.centres is not None:
            if d not in self.centres:
                raise InputError(f"ball has no centre table for decision {d!r}")
            return self.centres[d]
        return data.table(d)


def _reduced_objective_cells(
    data: BehaviouralDataset, z: Assignment
) -> tuple[list[tuple[Value, ...]], dict[str, int]]:
    scope = data.scope
    cells = list(product(*[r.domain for r in scope]))
    positions = {r.name: i for i, r in enumerate(scope)}
    for name in z:
        if name not in positions:
            raise InputError(f"shift variable {name!r} not in data scope")
    return cells, positions


def _cell_coeff(
    cell: tuple[Value, ...],
    positions: dict[str, int],
    z: Assignment,
    utility: str,
    success_side: bool,
) -> float:
    if any(cell[positions[n]] != v for n, v in z.items()):
        return 0.0
    y = float(cell[positions[utility]])
    return y if success_side else 1.0 - y


def _ball_minimum(
    centre: DistTable,
    coeffs: np.ndarray,
    delta: float,
    cells: list[tuple[Value, ...]],
) -> float:
    """min coeffs . p over the simplex intersected with the TV ball."""
    n = len(coeffs)
    centre_vec = np.array([float(centre.entries.get(k, 0)) for k in cells])
    # variables: p (n), u (n), a (n), b (n), s (1)
    nv = 4 * n + 1
    rows, rhs = [], []
    row = np.zeros(nv)
    row[:n] = 1.0
    rows.append(row)
    rhs.append(1.0)
    for i in range(n):
        row = np.zeros(nv)
        row[i] = 1.0
        row[n + i] = -1.0
        row[2 * n + i] = 1.0
        rows.append(row)
        rhs.append(centre_vec[i])
        row = np.zeros(nv)
        row[i] = 1.0
        row[n + i] = 1.0
        row[3 * n + i] = -1.0
        rows.append(row)
        rhs.append(centre_vec[i])
    row = np.zeros(nv)
    row[n : 2 * n] = 1.0
    row[-1] = 1.0
    rows.append(row)
    rhs.append(2.0 * delta)
    cost = np.zeros(nv)
    cost[:n] = coeffs
    try:
        return lp.solve_lp(cost, np.vstack(rows), np.asarray(rhs)).value
    except (lp.LpInfeasible, lp.LpUnbounded) as exc:  # pragma: no cover
        raise OracleError(f"TV-ball program failed: {exc}") from exc


def centre_keys(centre: DistTable) -> list[tuple[Value, ...]]:
    return list(product(*[r.domain for r in centre.scope]))


def approx_grounding_lower(
    data: BehaviouralDataset,
    ball: GroundingBall,
    c: Assignment,
    z: Assignment,
    d: Value,
    d_star: Value,
    method: str = "exact-lp",
    *,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int | None = None,
    concentration: float = DEFAULT_CONCENTRATION,
) -> float:
    """Worst-case gap lower bound when tables are known only up to a TV ball.

    The objective is the reduced context-equals-shift form
        E[Y 1_z] under d  +  E[(1-Y) 1_z] under d*  -  1,
    minimised over independent TV balls around the two centre tables.
    `exact-lp` solves the two small linear programs; `sample` reproduces the
    propose/accept procedure (simplex proposals concentrated on the centres,
    rejected outside the ball) and returns the empirical minimum, which can
    only sit above the exact one.
    """
    if merge_assignments(c, z) != dict(z):
        raise UnsupportedError(
            "the ball relaxation is implemented for the reduced objective with "
            f"context inside the shift; got context {dict(c)} vs shift {dict(z)}"
        )
    if d == d_star or d not in data.decisions or d_star not in data.decisions:
        raise InputError(f"bad decision pair ({d!r}, {d_star!r})")
    cells, positions = _reduced_objective_cells(data, z)
    coeff = {
        t: np.array(
            [_cell_coeff(cell, positions, z, data.utility, side) for cell in cells]
        )
        for t, side in ((d, True), (d_star, False))
    }
    centres = {t: ball.centre(data, t) for t in (d, d_star)}
    for t in (d, d_star):
        if centres[t].names != tuple(r.name for r in data.scope):
            raise InputError(
                f"ball centre for decision {t!r} has scope {centres[t].names}, "
                f"expected {tuple(r.name for r in data.scope)}"
            )

    if method == "exact-lp":
        return float(
            _ball_minimum(centres[d], coeff[d], ball.delta, cells)
            + _ball_minimum(centres[d_star], coeff[d_star], ball.delta, cells)
            - 1.0
        )
    if method != "sample":
        raise InputError(f"method must be 'exact-lp' or 'sample', got {method!r}")
    if seed is None:
        raise InputError("the sampling method needs an explicit seed")
    if n_samples < 1:
        raise InputError("need at least one proposal")

    rng = np.random.default_rng(seed)
    support = {
        t: [k for k in cells if float(centres[t].entries.get(k, 0)) > 0.0]
        for t in (d, d_star)
    }
    alphas = {
        t: np.array([float(centres[t].entries[k]) for k in support[t]]) * concentration
        for t in (d, d_star)
    }
    index = {t: [cells.index(k) for k in support[t]] for t in (d, d_star)}
    best = np.inf
    accepted = 0
    for _ in range(n_samples):
        value = 0.0
        ok = True
        for t in (d, d_star):
            draw = rng.dirichlet(alphas[t])
            full = np.zeros(len(cells))
            full[index[t]] = draw
            centre_vec = np.array([float(centres[t].entries.get(k, 0)) for k in cells])
            tv = 0.5 * float(np.abs(full - centre_vec).sum())
            if tv > ball.delta:
                ok = False
            value += float(coeff[t] @ full)
        if ok:
            accepted += 1
            best = min(best, value - 1.0)
    if not accepted:
        raise SamplingError(
            f"no proposal landed inside the TV ball after {n_samples} draws; "
            "increase n_samples or the concentration"
        )
    return float(best)


def proxy_alignment_lower(
    data: BehaviouralDataset,
    alpha: float,
    z: Assignment,
    d: Value,
    d_star: Value,
) -> float:
    """Gap lower bound when the agent optimises an internal proxy of Y.

    With P(proxy succeeds | Y succeeds, z) >= alpha the only surviving
    constraint is alpha * P_d(z, Y=1) - 1; alpha = 0 is fully uninformative.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"alpha must lie in [0, 1], got {alpha}")
    if d == d_star or d not in data.decisions or d_star not in data.decisions:
        raise InputError(f"bad decision pair ({d!r}, {d_star!r})")
    table = data.table(d)
    ref = table.ref(data.utility)
    if tuple(sorted(ref.domain)) != (0, 1):
        raise InputError(f"proxy bounds need a binary 0/1 utility, got {ref.domain}")
    mass = table.prob(merge_assignments(z, {data.utility: 1}))
    return float(alpha * mass - 1)


def partial_unconfoundedness_interval(
    data: BehaviouralDataset,
    z: Assignment,
    w0: Assignment,
    w1: Assignment,
    d: Value,
    d_star: Value,
) -> GapInterval:
    """Gap interval when a binary covariate W deconfounds the shifted variable.

    Per decision the post-shift utility mean is pinned between
        E[Y 1_{z,w}] + (1 - P(z,w)) E[Y | z, w~]      (lower)
        E[Y 1_z] + (1 - P(z)) E[Y | z, w]             (upper)
    with (w, w~) ordered so that E[Y | z, w] >= E[Y | z, w~]; labels swap per
    decision when the data orders the slices the other way round.
    """
    if d == d_star or d not in data.decisions or d_star not in data.decisions:
        raise InputError(f"bad decision pair ({d!r}, {d_star!r})")
    if len(w0) != 1 or len(w1) != 1 or set(w0) != set(w1):
        raise InputError("w0 and w1 must assign the same single covariate")
    (wname,) = w0
    if w0[wname] == w1[wname]:
        raise InputError("w0 and w1 must differ")
    ref = data.table(d).ref(wname)
    if len(ref.domain) != 2:
        raise InputError(f"covariate {wname!r} must be binary, got {ref.domain}")
    if wname in z:
        raise InputError(f"covariate {wname!r} cannot be part of the shift")

    swapped = []

    def envelope(t: Value) -> tuple[float, float]:
        table = data.table(t)
        e_hi = expectation(table, data.utility, merge_assignments(z, w1))
        e_lo = expectation(table, data.utility, merge_assignments(z, w0))
        if float(e_hi) >= float(e_lo):
            w_hi, w_lo, e_w, e_wt = w1, w0, e_hi, e_lo
        else:
            w_hi, w_lo, e_w, e_wt = w0, w1, e_lo, e_hi
            swapped.append(t)
        p_zw = table.prob(merge_assignments(z, w_hi))
        p_z = table.prob(z)
        e_z = expectation(table, data.utility, z)
        lower = e_w * p_zw + (1 - p_zw) * e_wt
        upper = e_z * p_z + (1 - p_z) * e_w
        return float(lower), float(upper)

    lo_d, up_d = envelope(d)
    lo_s, up_s = envelope(d_star)
    raw_lower = lo_d - up_s
    raw_upper = up_d - lo_s
    lower = max(-1.0, raw_lower)
    upper = min(1.0, raw_upper)
    notes = []
    if swapped:
        notes.append(f"slice labels swapped for decisions {sorted(map(str, swapped))}")
    if raw_lower < -1.0:
        notes.append(f"lower clamped from {raw_lower}")
    if raw_upper > 1.0:
        notes.append(f"upper clamped from {raw_upper}")
    if lower > upper + _RANGE_TOL:
        raise InputError("deconfounding envelopes crossed; inputs are inconsistent")
    return GapInterval(
        lower=lower,
        upper=upper,
        kind="preference",
        theorem="partial-unconfoundedness",
        tight=False,
        inputs_digest=digest(
            {"op": "unconf", "z": dict(z), "w0": dict(w0), "w1": dict(w1),
             "d": d, "d_star": d_star}
        ),
        raw_lower=raw_lower if raw_lower < -1.0 else None,
        raw_upper=raw_upper if raw_upper > 1.0 else None,
        notes=tuple(notes),
    )
