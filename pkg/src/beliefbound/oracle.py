"""Independent certification of gap bounds by exact polytope optimization.

The closed-form bounds are verified against linear programs over canonical
response-type models: one simplex variable per joint response type, one
equality per observed per-decision cell.  The optimum of the gap objective
over that polytope is the exact partial-identification envelope, so matching
it certifies a closed-form bound as tight.

Also houses the constructive side: extracting a concrete model from any
feasible point, the bound-achieving witness models for atomic shifts, and the
row-preserving reshuffles that realise the +/-1 extremes under unknown shifts.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from . import lp
from .errors import (
    AtomLimitError,
    DataError,
    InputError,
    ModelError,
    OracleError,
    UnsupportedError,
)
from .scm import ExoDistribution, Mechanism, Scm
from .tables import (
    Assignment,
    BehaviouralDataset,
    DistTable,
    Number,
    Value,
    VariableRef,
    merge_assignments,
    query,
)

DEFAULT_ATOM_LIMIT = 1_000_000
ATOM_LIMIT_ENV = "BELIEFBOUND_ATOM_LIMIT"


def atom_limit(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    raw = os.environ.get(ATOM_LIMIT_ENV)
    return int(float(raw)) if raw else DEFAULT_ATOM_LIMIT


@dataclass(frozen=True)
class SkeletonVariable:
    """Declared structure of one modelled variable: name, domain, parents.

    Parents may include the decision variable and other skeleton variables.
    """

    name: str
    domain: tuple[Value, ...]
    parents: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "parents", tuple(self.parents))
        if not self.domain:
            raise InputError(f"skeleton variable {self.name!r} has an empty domain")


class CanonicalAtomSpace:
    """Product space of per-variable response functions.

    Each variable contributes the full finite set of maps from its parent
    assignments to its domain; an atom picks one response per variable.  A
    binary root variable has 2 types; a binary variable with two binary
    parents has 2**4 = 16.
    """

    def __init__(
        self,
        decision: VariableRef,
        variables: Sequence[SkeletonVariable],
        limit: int | None = None,
    ) -> None:
        self.decision = decision
        names = [v.name for v in variables]
        if len(set(names)) != len(names) or decision.name in names:
            raise InputError(f"bad skeleton variable names: {names}")
        by_name = {v.name: v for v in variables}
        known = set(names) | {decision.name}
        for v in variables:
            for p in v.parents:
                if p not in known:
                    raise InputError(f"{v.name!r} has unknown parent {p!r}")
        self.variables = tuple(sorted(variables, key=lambda v: v.name))
        self.order = self._toposort(by_name)

        cap = atom_limit(limit)
        total = 1
        self.parent_combos: dict[str, tuple[tuple[Value, ...], ...]] = {}
        counts: dict[str, int] = {}
        for v in self.variables:
            doms = [
                decision.domain if p == decision.name else by_name[p].domain
                for p in v.parents
            ]
            combos = tuple(product(*doms))
            self.parent_combos[v.name] = combos
            counts[v.name] = len(v.domain) ** len(combos)
            total *= counts[v.name]
            if total > cap:
                raise AtomLimitError(
                    f"canonical space needs {total}+ atoms, over the cap of {cap} "
                    f"(set {ATOM_LIMIT_ENV} to raise it)"
                )
        self.responses: dict[str, tuple[tuple[Value, ...], ...]] = {
            v.name: tuple(product(v.domain, repeat=len(self.parent_combos[v.name])))
            for v in self.variables
        }
        self.dimension = total
        self._combo_index = {
            name: {combo: i for i, combo in enumerate(combos)}
            for name, combos in self.parent_combos.items()
        }
        self._by_name = by_name

    def _toposort(self, by_name: dict[str, SkeletonVariable]) -> tuple[str, ...]:
        order: list[str] = []
        state: dict[str, int] = {}

        def visit(name: str) -> None:
            if state.get(name) == 2 or name == self.decision.name:
                return
            if state.get(name) == 1:
                raise ModelError(f"cyclic skeleton at {name!r}")
            state[name] = 1
            for p in by_name[name].parents:
                visit(p)
            state[name] = 2
            order.append(name)

        for v in self.variables:
            visit(v.name)
        return tuple(order)

    def atoms(self):
        """Deterministic enumeration of response-index tuples (name-sorted vars)."""
        return product(*[range(len(self.responses[v.name])) for v in self.variables])

    def atom_index(self) -> dict[str, int]:
        return {v.name: i for i, v in enumerate(self.variables)}

    def evaluate(
        self, atom: Sequence[int], d: Value, intervention: Assignment | None = None
    ) -> dict[str, Value]:
        """Potential response of one atom under do(intervention) and decision d."""
        iv = dict(intervention or {})
        pos = self.atom_index()
        values: dict[str, Value] = {self.decision.name: d}
        for name in self.order:
            if name in iv:
                values[name] = iv[name]
                continue
            combo = tuple(values[p] for p in self._by_name[name].parents)
            response = self.responses[name][atom[pos[name]]]
            values[name] = response[self._combo_index[name][combo]]
        del values[self.decision.name]
        return values

    def ancestors(self, name: str) -> frozenset[str]:
        """All (decision included) ancestors of a skeleton variable."""
        seen: set[str] = set()

        def walk(n: str) -> None:
            if n == self.decision.name:
                return
            for p in self._by_name[n].parents:
                if p not in seen:
                    seen.add(p)
                    walk(p)

        walk(name)
        return frozenset(seen)


@dataclass(eq=False)
class Polytope:
    """Linear description of all canonical models matching the observed cells."""

    space: CanonicalAtomSpace
    data: BehaviouralDataset
    a_eq: np.ndarray
    b_eq: np.ndarray
    row_labels: tuple[str, ...] = field(default=())

    def feasible_point(self, objective: Sequence[float] | None = None) -> np.ndarray:
        """A feasible atom-probability vector, optionally optimizing a direction."""
        c = np.zeros(self.space.dimension) if objective is None else np.asarray(objective, float)
        try:
            return lp.solve_lp(c, self.a_eq, self.b_eq).x
        except lp.LpInfeasible as exc:
            raise DataError(f"infeasible polytope: {exc}") from exc
        except lp.LpUnbounded as exc:  # pragma: no cover - simplex is bounded
            raise OracleError(f"unbounded feasibility solve: {exc}") from exc


def build_polytope(
    data: BehaviouralDataset,
    skeleton: Sequence[SkeletonVariable],
    limit: int | None = None,
) -> Polytope:
    """One simplex variable per atom, one equality per observed (d, cell) pair.

    Tables from experimental domains contribute equalities of their own,
    evaluated under the domain's intervention, so a two-domain dataset pins
    the polytope down to models reproducing both environments.  Raises
    DataError straight away when the tables are mutually inconsistent (the
    equality system has no distribution solving it).
    """
    space = CanonicalAtomSpace(data.decision, skeleton, limit)
    scope_names = tuple(v.name for v in space.variables)
    data_names = tuple(r.name for r in data.scope)
    if set(scope_names) != set(data_names):
        raise InputError(
            f"skeleton covers {sorted(scope_names)}, data scope is {sorted(data_names)}"
        )
    for v in space.variables:
        ref = data.table(data.decisions[0]).ref(v.name)
        if tuple(ref.domain) != tuple(v.domain):
            raise InputError(
                f"domain mismatch for {v.name!r}: skeleton {v.domain} vs data {ref.domain}"
            )

    atoms = list(space.atoms())
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    labels: list[str] = []
    for dom in data.all_domains():
        for d in data.decisions:
            table = dom.per_decision[d]
            evaluated = [space.evaluate(atom, d, dom.intervened) for atom in atoms]
            for cell in product(*[v.domain for v in space.variables]):
                assignment = dict(zip(scope_names, cell))
                row = np.fromiter(
                    (1.0 if ev == assignment else 0.0 for ev in evaluated),
                    dtype=float,
                    count=len(atoms),
                )
                rows.append(row)
                rhs.append(float(table.prob(assignment)))
                labels.append(f"{dom.label or 'base'}: P_{d}({assignment})")
    rows.append(np.ones(len(atoms)))
    rhs.append(1.0)
    labels.append("total mass")
    polytope = Polytope(
        space=space,
        data=data,
        a_eq=np.vstack(rows),
        b_eq=np.asarray(rhs),
        row_labels=tuple(labels),
    )
    polytope.feasible_point()
    return polytope


def _objective_terms(
    polytope: Polytope,
    z: Assignment,
    c: Assignment,
    d: Value,
    d_star: Value,
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Per-atom numerator coefficients and context indicators for the gap."""
    space = polytope.space
    data = polytope.data
    utility = data.utility
    names = {v.name for v in space.variables}
    for key in (*z, *c):
        if key not in names:
            raise InputError(f"{key!r} is not a modelled variable")
    merge_assignments(c, z)
    for name in c:
        if name in z:
            continue
        if data.decision.name in space.ancestors(name):
            raise UnsupportedError(
                f"context variable {name!r} is downstream of the decision; the "
                "conditional objective is not a single-denominator program"
            )
    num = np.zeros(space.dimension)
    den = np.zeros(space.dimension)
    degenerate = all(name in z for name in c)
    for i, atom in enumerate(space.atoms()):
        ev_d = space.evaluate(atom, d, z)
        ev_s = space.evaluate(atom, d_star, z)
        sat_d = all(ev_d[k] == v for k, v in c.items())
        sat_s = all(ev_s[k] == v for k, v in c.items())
        if sat_d != sat_s:  # pragma: no cover - excluded by the ancestry check
            raise OracleError("context indicator depends on the decision")
        den[i] = 1.0 if sat_d else 0.0
        y_d = ev_d[utility]
        y_s = ev_s[utility]
        num[i] = (float(y_d) - float(y_s)) * den[i]
    return num, den, degenerate


def optimize_gap(
    polytope: Polytope,
    z: Assignment,
    c: Assignment,
    d: Value,
    d_star: Value,
    direction: str = "min",
) -> float:
    """Exact optimum of the preference gap over all compatible canonical models.

    Conditional contexts are handled by the standard rescaling that turns the
    linear-fractional objective into a linear program; that needs the context
    probability under do(z) to be decision-independent, which the ancestry
    check enforces before solving.
    """
    if direction not in ("min", "max"):
        raise InputError(f"direction must be 'min' or 'max', got {direction!r}")
    if d == d_star:
        raise InputError("decision and baseline must differ")
    for value in (d, d_star):
        if value not in polytope.data.decisions:
            raise InputError(f"decision {value!r} not in {polytope.data.decisions}")
    num, den, degenerate = _objective_terms(polytope, z, c, d, d_star)
    sign = 1.0 if direction == "min" else -1.0

    if degenerate:
        if c and any(z[name] != c[name] for name in c):
            raise InputError(f"context {dict(c)} conflicts with the shift {dict(z)}")
        try:
            sol = lp.solve_lp(sign * num, polytope.a_eq, polytope.b_eq)
        except lp.LpInfeasible as exc:
            raise DataError(f"infeasible polytope: {exc}") from exc
        except lp.LpUnbounded as exc:  # pragma: no cover
            raise OracleError(str(exc)) from exc
        return sign * sol.value

    # Charnes-Cooper: q = p / (den . p), t = 1 / (den . p).
    n = polytope.space.dimension
    rows = np.hstack([polytope.a_eq, -polytope.b_eq.reshape(-1, 1)])
    norm = np.hstack([den, [0.0]])
    a_eq = np.vstack([rows, norm])
    b_eq = np.zeros(rows.shape[0] + 1)
    b_eq[-1] = 1.0
    cost = np.hstack([sign * num, [0.0]])
    try:
        sol = lp.solve_lp(cost, a_eq, b_eq)
    except lp.LpInfeasible as exc:
        raise DataError(
            f"context {dict(c)} has zero probability under do({dict(z)}) for every "
            f"compatible model: {exc}"
        ) from exc
    except lp.LpUnbounded as exc:
        raise OracleError(
            f"fractional reduction unbounded; context probability is not bounded "
            f"away from zero: {exc}"
        ) from exc
    if sol.x[n] <= lp.FEAS_EPS:
        raise OracleError("degenerate rescaling (t = 0); context mass collapses")
    return sign * sol.value


def feasible_scm(polytope: Polytope) -> Scm:
    """Concrete model whose response-type atoms carry a feasible point.

    The returned model reproduces every per-decision observational joint of
    the data (up to LP tolerance); verification is by reproduction, not by
    uniqueness of the feasible point.
    """
    x = polytope.feasible_point()
    space = polytope.space
    exo_refs = tuple(
        VariableRef(f"R_{v.name}", tuple(range(len(space.responses[v.name]))))
        for v in space.variables
    )
    kept = [
        (tuple(atom), p)
        for atom, p in zip(space.atoms(), x)
        if p > 1e-12
    ]
    total = sum(p for _, p in kept)
    atoms = tuple((atom, p / total) for atom, p in kept)
    exo = ExoDistribution(exo_refs, atoms)

    decision = polytope.data.decision
    refs = {v.name: VariableRef(v.name, v.domain) for v in space.variables}
    refs[decision.name] = decision
    mechanisms: dict[str, Mechanism] = {
        decision.name: Mechanism.constant(decision, decision.domain[0])
    }
    for i, v in enumerate(space.variables):
        table = {}
        for r, response in enumerate(space.responses[v.name]):
            for ci, combo in enumerate(space.parent_combos[v.name]):
                table[(*combo, r)] = response[ci]
        mechanisms[v.name] = Mechanism(
            refs[v.name], v.parents, (exo_refs[i].name,), table
        )
    return Scm(tuple(refs.values()), mechanisms, exo)


def witness_thm1_scm(
    base: Scm,
    z: Assignment,
    c: Assignment,
    d1: Value,
    d0: Value,
    decision: str = "D",
    utility: str = "Y",
) -> Scm:
    """Bound-achieving rewrite of `base` for the atomic-shift gap (d1 over d0).

    Observationally identical to `base` (the rewrites only fire on atoms whose
    natural shift-variable values differ from their actual ones, which never
    happens without an intervention).  Under do(z) given c, its gap equals the
    closed-form lower bound: off-branch atoms clamp the context to c and the
    utility to its maximum for d0 and minimum for d1.
    """
    dref = base.ref(decision)
    if d1 == d0 or d1 not in dref.domain or d0 not in dref.domain:
        raise InputError(f"bad decision pair ({d1!r}, {d0!r}) for domain {dref.domain}")
    merged = merge_assignments(c, z)
    for name, value in merged.items():
        ref = base.ref(name)
        if value not in ref.domain:
            raise InputError(f"value {value!r} outside domain of {name!r}")
    z_names = sorted(z)
    for name in z_names:
        if base.mechanisms[name].parents:
            raise UnsupportedError(
                f"shift variable {name!r} has endogenous parents; the witness "
                "construction needs exogenously driven shift variables"
            )
    yref = base.ref(utility)
    if not yref.numeric:
        raise InputError(f"utility {utility!r} must be numeric")
    y_lo, y_hi = min(yref.domain), max(yref.domain)

    z_exo = []
    for name in z_names:
        for e in base.mechanisms[name].exo_parents:
            if e not in z_exo:
                z_exo.append(e)
    exo_refs = {r.name: r for r in base.exo.variables}

    def natural(assign: Mapping[str, Value], name: str) -> Value:
        mech = base.mechanisms[name]
        return mech.table[tuple(assign[e] for e in mech.exo_parents)]

    def on_branch(assign: Mapping[str, Value]) -> bool:
        return all(assign[name] == natural(assign, name) for name in z_names)

    def rewrite(name: str, clamp) -> Mechanism:
        mech = base.mechanisms[name]
        parents = list(mech.parents)
        for extra in z_names + ([decision] if name == utility else []):
            if extra not in parents and extra != name:
                parents.append(extra)
        exo = list(mech.exo_parents)
        for extra in z_exo:
            if extra not in exo:
                exo.append(extra)

        def fn(assign: Mapping[str, Value]) -> Value:
            if on_branch(assign):
                key = tuple(assign[p] for p in mech.parents) + tuple(
                    assign[e] for e in mech.exo_parents
                )
                return mech.table[key]
            return clamp(assign)

        return Mechanism.from_function(
            base.ref(name),
            [base.ref(p) for p in parents],
            [exo_refs[e] for e in exo],
            fn,
        )

    mechanisms = dict(base.mechanisms)
    for name in c:
        if name in z:
            continue
        value = c[name]
        mechanisms[name] = rewrite(name, lambda assign, v=value: v)
    mechanisms[utility] = rewrite(
        utility,
        lambda assign: y_hi if assign[decision] == d0 else y_lo,
    )
    return Scm(base.variables, mechanisms, base.exo)


# -- canonical (z, y) response tables and unknown-shift witnesses ----------


@dataclass(frozen=True)
class ResponseTypeTable:
    """Joint law of (z-response, y-response) types for binary Z and 0/1 Y.

    y-response codes: 0 never succeeds, 1 tracks Z, 2 opposes Z, 3 always
    succeeds.  Cells index (r_z, r_y) with r_z the Z-domain position.
    """

    z: VariableRef
    y: VariableRef
    cells: dict[tuple[int, int], Number]

    def __post_init__(self) -> None:
        if len(self.z.domain) != 2:
            raise InputError(f"Z must be binary, got {self.z.domain}")
        if tuple(sorted(self.y.domain)) != (0, 1):
            raise InputError(f"Y must be 0/1, got {self.y.domain}")
        cells = {}
        for (a, b), p in self.cells.items():
            if a not in (0, 1) or b not in (0, 1, 2, 3):
                raise InputError(f"bad response cell ({a}, {b})")
            if float(p) < 0:
                raise InputError(f"negative cell mass {p}")
            if p != 0:
                cells[(a, b)] = p
        total = sum(cells.values(), start=0)
        if abs(float(total) - 1.0) > 1e-12:
            raise InputError(f"cell mass {float(total)} is not 1")
        object.__setattr__(self, "cells", cells)

    def row_sums(self) -> tuple[Number, Number, Number, Number]:
        """Marginal of the y-response type; invariant under row-preserving shifts."""
        return tuple(
            sum((p for (a, b), p in self.cells.items() if b == ry), start=0)
            for ry in range(4)
        )

    def y_value(self, z_index: int, ry: int) -> int:
        lo, hi = sorted(self.y.domain)
        return (lo, (lo, hi)[z_index], (hi, lo)[z_index], hi)[ry]

    def to_scm(self) -> Scm:
        """Canonical two-variable model carrying exactly these response types."""
        rz = VariableRef(f"R_{self.z.name}", (0, 1))
        ry = VariableRef(f"R_{self.y.name}", (0, 1, 2, 3))
        exo = ExoDistribution((rz, ry), tuple((key, p) for key, p in self.cells.items()))
        z_mech = Mechanism(self.z, (), (rz.name,), {(a,): self.z.domain[a] for a in (0, 1)})
        y_table = {
            (self.z.domain[a], b): self.y_value(a, b)
            for a in (0, 1)
            for b in range(4)
        }
        y_mech = Mechanism(self.y, (self.z.name,), (ry.name,), y_table)
        return Scm((self.z, self.y), {self.z.name: z_mech, self.y.name: y_mech}, exo)


def canonical_zy_table(
    table: DistTable,
    z_name: str = "Z",
    y_name: str = "Y",
    given: Assignment | None = None,
) -> ResponseTypeTable:
    """Canonical parameterization of one (Z, Y) law with empty corner rows.

    Any observed binary law is expressible with all mass on the Z-tracking and
    Z-opposing y-responses, which satisfies the zero-cell conventions both
    extreme reshuffles need.
    """
    zy = query(table, [z_name, y_name], given)
    zref, yref = zy.ref(z_name), zy.ref(y_name)
    lo, hi = sorted(yref.domain)
    cells: dict[tuple[int, int], Number] = {}
    for a in (0, 1):
        zv = zref.domain[a]
        cells[(a, 1)] = zy.prob({z_name: zv, y_name: (lo, hi)[a]})
        cells[(a, 2)] = zy.prob({z_name: zv, y_name: (hi, lo)[a]})
    return ResponseTypeTable(zref, yref, cells)


def unknown_shift_witnesses(p_ab: ResponseTypeTable) -> tuple[Scm, Scm]:
    """Two shifted canonical models preserving the y-response row sums.

    The shift only redistributes mass across the z-response columns within
    each y-response row; the low model drives every steerable row to its
    failure column, the high model to its success column.  With the corner
    rows empty these reach success probability exactly 0 and 1.
    """

    def reshuffle(success: bool) -> ResponseTypeTable:
        cells: dict[tuple[int, int], Number] = {}
        for (a, b), p in p_ab.cells.items():
            if b == 1:
                target = (1 if success else 0, b)
            elif b == 2:
                target = (0 if success else 1, b)
            else:
                target = (a, b)
            cells[target] = cells.get(target, 0) + p
        return ResponseTypeTable(p_ab.z, p_ab.y, cells)

    return reshuffle(False).to_scm(), reshuffle(True).to_scm()
