"""Shared generators for randomized suites.

Everything is driven by explicit integer seeds so failures replay exactly.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from beliefbound.scm import ExoDistribution, Mechanism, Scm
from beliefbound.tables import BehaviouralDataset, DistTable, VariableRef

D = VariableRef("D", (0, 1))
Z = VariableRef("Z", (0, 1))
Y = VariableRef("Y", (0, 1))


def random_behaviour_model(seed: int, max_atoms: int = 16) -> Scm:
    """Random hidden model: Z <- U, Y <- (D, Z, U), shared latent U.

    Atom probabilities are exact rationals so the engine's exactness
    guarantees hold on every generated model; Z is forced non-constant so
    positivity-style preconditions are satisfiable.
    """
    rng = np.random.default_rng(seed)
    k = int(rng.integers(3, max_atoms + 1))
    u = VariableRef("U", tuple(range(k)))
    weights = rng.integers(1, 20, size=k)
    total = int(weights.sum())
    probs = [Fraction(int(w), total) for w in weights]
    exo = ExoDistribution((u,), tuple(((i,), p) for i, p in enumerate(probs)))
    z_out = rng.integers(0, 2, size=k)
    z_out[0], z_out[1] = 0, 1
    y_out = rng.integers(0, 2, size=(2, 2, k))
    mechanisms = {
        "D": Mechanism.constant(D, 0),
        "Z": Mechanism.from_function(Z, (), (u,), lambda a: int(z_out[a["U"]])),
        "Y": Mechanism.from_function(
            Y, (D, Z), (u,), lambda a: int(y_out[a["D"], a["Z"], a["U"]])
        ),
    }
    return Scm((D, Z, Y), mechanisms, exo)


def model_with_positive_cells(seed: int, cells=None) -> Scm:
    """First random model (scanning seeds upward) whose joint hits every cell."""
    from beliefbound.scm import joint_distribution, submodel

    cells = cells or [
        {"Z": z, "Y": y} for z in (0, 1) for y in (0, 1)
    ]
    attempt = seed
    while True:
        scm = random_behaviour_model(attempt)
        ok = True
        for d in (0, 1):
            joint = joint_distribution(submodel(scm, {"D": d}))
            if any(joint.prob(cell) == 0 for cell in cells):
                ok = False
                break
        if ok:
            return scm
        attempt += 10_000


def random_binary_dataset(seed: int) -> BehaviouralDataset:
    """Random per-decision (Z, Y) tables with a shared, interior Z marginal."""
    rng = np.random.default_rng(seed)
    pz = float(rng.uniform(0.15, 0.85))
    tables = {}
    for d in (0, 1):
        py_z1 = float(rng.uniform(0.05, 0.95))
        py_z0 = float(rng.uniform(0.05, 0.95))
        tables[d] = DistTable(
            (Y, Z),
            {
                (1, 1): pz * py_z1,
                (0, 1): pz * (1 - py_z1),
                (1, 0): (1 - pz) * py_z0,
                (0, 0): (1 - pz) * (1 - py_z0),
            },
        )
    return BehaviouralDataset(D, tables)


def exact_dataset(per_decision_cells: dict) -> BehaviouralDataset:
    """Dataset over (Y, Z) from {(y, z): Fraction} cell maps, keyed by decision."""
    tables = {
        d: DistTable((Y, Z), {k: Fraction(v) if not isinstance(v, Fraction) else v
                              for k, v in cells.items()})
        for d, cells in per_decision_cells.items()
    }
    return BehaviouralDataset(D, tables)
