"""Finite discrete structural models: evaluation, sub-models, shifts.

A model is a set of endogenous variables, one extensional mechanism table per
variable, and a joint distribution over exogenous atoms.  Everything here is
an immutable value; every operation returns a new model or a plain result, so
concurrent use is safe.

Mechanisms are tables rather than expressions: the whole package relies on
exhaustive exogenous enumeration, and tables keep that exact (rationals pass
through untouched).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Sequence

from .errors import InputError, ModelError, UnsupportedError
from .tables import (
    Assignment,
    BehaviouralDataset,
    DistTable,
    Number,
    Policy,
    Value,
    VariableRef,
    _close_to_one,
    query,
)


@dataclass(frozen=True)
class Mechanism:
    """Total map (parent assignment x exogenous assignment) -> target value.

    Keys are flat tuples: parent values in `parents` order followed by
    exogenous values in `exo_parents` order.
    """

    target: VariableRef
    parents: tuple[str, ...]
    exo_parents: tuple[str, ...]
    table: dict[tuple[Value, ...], Value]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "exo_parents", tuple(self.exo_parents))
        object.__setattr__(self, "table", dict(self.table))

    @classmethod
    def from_function(
        cls,
        target: VariableRef,
        parents: Sequence[VariableRef],
        exo_parents: Sequence[VariableRef],
        fn,
    ) -> "Mechanism":
        """Tabulate ``fn(assignment) -> value`` over the full input product."""
        names = [r.name for r in (*parents, *exo_parents)]
        table = {}
        for combo in product(*[r.domain for r in (*parents, *exo_parents)]):
            table[tuple(combo)] = fn(dict(zip(names, combo)))
        return cls(target, tuple(r.name for r in parents), tuple(r.name for r in exo_parents), table)

    @classmethod
    def constant(cls, target: VariableRef, value: Value) -> "Mechanism":
        if value not in target.domain:
            raise InputError(f"constant {value!r} outside domain of {target.name!r}")
        return cls(target, (), (), {(): value})


@dataclass(frozen=True)
class ExoDistribution:
    """Joint distribution over exogenous atoms (one block, confounding allowed)."""

    variables: tuple[VariableRef, ...]
    atoms: tuple[tuple[tuple[Value, ...], Number], ...]

    def __post_init__(self) -> None:
        refs = tuple(self.variables)
        names = [r.name for r in refs]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate exogenous names: {names}")
        seen = set()
        atoms = []
        for key, p in self.atoms:
            key = tuple(key)
            if len(key) != len(refs):
                raise InputError(f"exogenous atom {key} does not match arity {len(refs)}")
            for ref, v in zip(refs, key):
                if v not in ref.domain:
                    raise InputError(f"value {v!r} not in domain of exogenous {ref.name!r}")
            if key in seen:
                raise InputError(f"duplicate exogenous atom {key}")
            if float(p) < 0:
                raise InputError(f"negative exogenous probability {p}")
            seen.add(key)
            atoms.append((key, p))
        total = sum((p for _, p in atoms), start=0)
        if not _close_to_one(total):
            raise InputError(f"exogenous mass {float(total)} is not 1 within 1e-12")
        object.__setattr__(self, "variables", refs)
        object.__setattr__(self, "atoms", tuple(atoms))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.variables)

    def assignments(self):
        for key, p in self.atoms:
            yield dict(zip(self.names, key)), p

    @classmethod
    def independent(cls, ref: VariableRef, probs: Mapping[Value, Number]) -> "ExoDistribution":
        atoms = tuple(((v,), probs[v]) for v in ref.domain if probs.get(v, 0) != 0)
        return cls((ref,), atoms)

    @classmethod
    def product(cls, left: "ExoDistribution", right: "ExoDistribution") -> "ExoDistribution":
        """Independent product of two blocks; zero-probability atoms dropped."""
        clash = set(left.names) & set(right.names)
        if clash:
            raise InputError(f"exogenous name clash: {sorted(clash)}")
        atoms = []
        for lk, lp in left.atoms:
            if float(lp) == 0.0:
                continue
            for rk, rp in right.atoms:
                if float(rp) == 0.0:
                    continue
                atoms.append((lk + rk, lp * rp))
        return cls(left.variables + right.variables, tuple(atoms))


@dataclass(frozen=True)
class Intervention:
    """Atomic do-assignment on endogenous variables."""

    assignments: dict[str, Value]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignments", dict(self.assignments))


@dataclass(frozen=True)
class Shift:
    """Mechanism/exogenous replacement for a set of endogenous variables.

    A shift with no replacement mechanisms is only a *symbolic* object (the
    unknown-shift bounds handle it); applying it to a model is unsupported.
    """

    targets: tuple[str, ...]
    mechanisms: dict[str, Mechanism] | None = None
    exo: ExoDistribution | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "targets", tuple(self.targets))


def _as_assignments(iv: Intervention | Assignment) -> dict[str, Value]:
    if isinstance(iv, Intervention):
        return dict(iv.assignments)
    return dict(iv)


@dataclass(frozen=True)
class Scm:
    """Recursive structural model over finite domains.

    Construction rejects cyclic dependency structures and partial mechanism
    tables; the topological order is computed once and reused everywhere.
    """

    variables: tuple[VariableRef, ...]
    mechanisms: dict[str, Mechanism]
    exo: ExoDistribution
    order: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        refs = tuple(self.variables)
        names = [r.name for r in refs]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate endogenous names: {names}")
        if set(self.mechanisms) != set(names):
            raise ModelError(
                f"mechanisms cover {sorted(self.mechanisms)}, expected {sorted(names)}"
            )
        by_name = {r.name: r for r in refs}
        exo_by_name = {r.name: r for r in self.exo.variables}
        for name, mech in self.mechanisms.items():
            if mech.target.name != name or mech.target != by_name[name]:
                raise ModelError(f"mechanism for {name!r} targets {mech.target}")
            for p in mech.parents:
                if p not in by_name:
                    raise ModelError(f"{name!r} has unknown parent {p!r}")
            for e in mech.exo_parents:
                if e not in exo_by_name:
                    raise ModelError(f"{name!r} has unknown exogenous parent {e!r}")
            self._check_total(mech, by_name, exo_by_name)
        object.__setattr__(self, "variables", refs)
        object.__setattr__(self, "mechanisms", dict(self.mechanisms))
        object.__setattr__(self, "order", self._toposort(names))

    @staticmethod
    def _check_total(mech: Mechanism, by_name, exo_by_name) -> None:
        doms = [by_name[p].domain for p in mech.parents]
        doms += [exo_by_name[e].domain for e in mech.exo_parents]
        for combo in product(*doms):
            if combo not in mech.table:
                raise ModelError(
                    f"mechanism for {mech.target.name!r} is missing input {combo}"
                )
            out = mech.table[combo]
            if out not in mech.target.domain:
                raise ModelError(
                    f"mechanism for {mech.target.name!r} outputs {out!r} outside domain"
                )

    def _toposort(self, names: list[str]) -> tuple[str, ...]:
        indeg = {n: 0 for n in names}
        children: dict[str, list[str]] = {n: [] for n in names}
        for name, mech in self.mechanisms.items():
            for p in mech.parents:
                indeg[name] += 1
                children[p].append(name)
        ready = sorted(n for n in names if indeg[n] == 0)
        order: list[str] = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for c in sorted(children[n]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort()
        if len(order) != len(names):
            cyclic = sorted(set(names) - set(order))
            raise ModelError(f"cyclic dependencies among {cyclic}")
        return tuple(order)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.variables)

    def ref(self, name: str) -> VariableRef:
        for r in self.variables:
            if r.name == name:
                return r
        raise InputError(f"no endogenous variable {name!r}")


def evaluate(scm: Scm, u: Assignment) -> dict[str, Value]:
    """Unique potential response V(u): apply mechanisms in topological order."""
    exo = {}
    for ref in scm.exo.variables:
        if ref.name not in u:
            raise InputError(f"exogenous variable {ref.name!r} unassigned")
        if u[ref.name] not in ref.domain:
            raise InputError(f"value {u[ref.name]!r} outside domain of {ref.name!r}")
        exo[ref.name] = u[ref.name]
    values: dict[str, Value] = {}
    for name in scm.order:
        mech = scm.mechanisms[name]
        key = tuple(values[p] for p in mech.parents) + tuple(exo[e] for e in mech.exo_parents)
        values[name] = mech.table[key]
    return values


def submodel(scm: Scm, iv: Intervention | Assignment) -> Scm:
    """Sub-model under do(x): targeted mechanisms become constants."""
    assignments = _as_assignments(iv)
    if not assignments:
        return scm
    mechanisms = dict(scm.mechanisms)
    for name, value in assignments.items():
        ref = scm.ref(name)
        mechanisms[name] = Mechanism.constant(ref, value)
    return Scm(scm.variables, mechanisms, scm.exo)


def apply_shift(scm: Scm, shift: Shift) -> Scm:
    """Replace mechanisms (and exogenous block) of the shift targets.

    Raises UnsupportedError when the shift carries no replacement mechanisms:
    an unspecified shift is a symbolic object for the bound formulas, not an
    executable model transformation.
    """
    if not shift.targets:
        return scm
    for name in shift.targets:
        scm.ref(name)
    if shift.mechanisms is None:
        raise UnsupportedError(
            "shift carries no replacement mechanisms; only bound formulas "
            "can reason about an unspecified shift"
        )
    missing = set(shift.targets) - set(shift.mechanisms)
    if missing:
        raise UnsupportedError(f"shift lacks replacement mechanisms for {sorted(missing)}")
    exo = scm.exo if shift.exo is None else ExoDistribution.product(scm.exo, shift.exo)
    mechanisms = dict(scm.mechanisms)
    for name in shift.targets:
        mechanisms[name] = shift.mechanisms[name]
    return Scm(scm.variables, mechanisms, exo)


def joint_distribution(scm: Scm) -> DistTable:
    """Push the exogenous distribution through the mechanisms."""
    names = sorted(scm.names)
    cells: dict[tuple[Value, ...], Number] = {}
    for u, p in scm.exo.assignments():
        values = evaluate(scm, u)
        key = tuple(values[n] for n in names)
        cells[key] = cells.get(key, 0) + p
    refs = tuple(scm.ref(n) for n in names)
    return DistTable(refs, cells)


def counterfactual_probability(
    scm: Scm,
    events: Sequence[tuple[Intervention | Assignment, Assignment]],
) -> Number:
    """Probability that every (do(x), partial assignment) event holds jointly.

    Sums P(u) over exogenous atoms whose potential responses satisfy all the
    listed counterfactual events simultaneously.
    """
    prepared = []
    for iv, event in events:
        sub = submodel(scm, iv)
        for name in event:
            scm.ref(name)
        prepared.append((sub, dict(event)))
    total: Number = 0
    for u, p in scm.exo.assignments():
        if all(
            all(evaluate(sub, u)[name] == value for name, value in event.items())
            for sub, event in prepared
        ):
            total = total + p
    return total


# -- stochastic policies and induced data ---------------------------------


def policy_model(scm: Scm, policy: Policy) -> Scm:
    """Model whose decision variable samples from the policy.

    The policy is encoded through a fresh exogenous block: one independent
    draw of a decision per context cell, so the decision stays a deterministic
    mechanism of (context, fresh noise).
    """
    dname = policy.decision.name
    ref = scm.ref(dname)
    if ref.domain != policy.decision.domain:
        raise InputError(
            f"decision domain mismatch: model {ref.domain} vs policy {policy.decision.domain}"
        )
    ctx_refs = [scm.ref(name) for name in policy.context]
    contexts = list(product(*[r.domain for r in ctx_refs]))
    missing = [ctx for ctx in contexts if ctx not in policy.rows]
    if missing:
        raise InputError(
            f"policy lacks rows for contexts {missing[:3]}"
            + (" ..." if len(missing) > 3 else "")
        )
    choices = list(product(ref.domain, repeat=len(contexts)))

    noise_name = f"U_{dname}"
    while noise_name in scm.exo.names:
        noise_name += "_"
    noise = VariableRef(noise_name, tuple(range(len(choices))))
    atoms = []
    for i, choice in enumerate(choices):
        p: Number = 1
        for ctx, d in zip(contexts, choice):
            p = p * policy.rows[ctx].get(d, 0)
        if float(p) != 0.0:
            atoms.append(((i,), p))
    block = ExoDistribution((noise,), tuple(atoms))

    position = {ctx: i for i, ctx in enumerate(contexts)}
    table = {
        (*ctx, i): choices[i][position[ctx]]
        for ctx in contexts
        for i in range(len(choices))
    }
    mech = Mechanism(ref, tuple(policy.context), (noise_name,), table)
    mechanisms = dict(scm.mechanisms)
    mechanisms[dname] = mech
    return Scm(scm.variables, mechanisms, ExoDistribution.product(scm.exo, block))


def scm_dataset(
    scm: Scm,
    decision: str,
    utility: str = "Y",
    domains: Iterable[tuple[str, Assignment]] = (),
) -> BehaviouralDataset:
    """Per-decision behavioural tables generated by a known model.

    `domains` lists extra (label, intervened assignment) environments whose
    per-decision tables are computed from the corresponding sub-models.
    """
    from .tables import ExperimentalDomain

    dref = scm.ref(decision)
    rest = sorted(n for n in scm.names if n != decision)

    def tables_under(base: Assignment) -> dict[Value, DistTable]:
        out = {}
        for d in dref.domain:
            joint = joint_distribution(submodel(scm, {**base, decision: d}))
            out[d] = query(joint, rest)
        return out

    extra = tuple(
        ExperimentalDomain(label, dict(iv), tables_under(iv)) for label, iv in domains
    )
    return BehaviouralDataset(dref, tables_under({}), utility=utility, domains=extra)
