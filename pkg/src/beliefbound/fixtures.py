"""Built-in example models and datasets.

`medai` is a three-variable clinical decision-support model (treatment D,
blood-pressure marker Z, recovery Y, one five-valued latent cause) whose two
variants entail identical per-decision behaviour but opposite optimal
treatments once Z is clamped.  It exercises every bound in the package and
ships both as code and as JSON files under ``beliefbound/fixtures/``.
"""

from __future__ import annotations

from fractions import Fraction
from importlib import resources

from .scm import ExoDistribution, Mechanism, Scm, scm_dataset
from .tables import BehaviouralDataset, VariableRef

U = VariableRef("U", (1, 2, 3, 4, 5))
D = VariableRef("D", (0, 1))
Z = VariableRef("Z", (0, 1))
Y = VariableRef("Y", (0, 1))

FIFTH = Fraction(1, 5)


def _model(y_rule) -> Scm:
    exo = ExoDistribution.independent(U, {u: FIFTH for u in U.domain})
    mechanisms = {
        "D": Mechanism.constant(D, 0),
        "Z": Mechanism.from_function(Z, (), (U,), lambda a: int(a["U"] in (1, 4))),
        "Y": Mechanism.from_function(Y, (D, Z), (U,), y_rule),
    }
    return Scm((D, Z, Y), mechanisms, exo)


def medai_scm() -> Scm:
    """Primary variant: treated recovery tracks everything but one latent state."""

    def rule(a) -> int:
        u, z = a["U"], a["Z"]
        if a["D"] == 0:
            return int(u == 4) if z == 1 else int(u in (1, 3, 4))
        return int(u != 2) if z == 1 else int(u in (2, 4))

    return _model(rule)


def medai_alt_scm() -> Scm:
    """Alternative variant: same behaviour, opposite optimum under do(Z=1)."""

    def rule(a) -> int:
        u, z = a["U"], a["Z"]
        if a["D"] == 0:
            return int(u != 1) if z == 1 else int(u in (3, 4))
        return int(u in (1, 4)) if z == 1 else int(u in (1, 2))

    return _model(rule)


def medai_dataset() -> BehaviouralDataset:
    """Observational per-decision tables of the primary variant."""
    return scm_dataset(medai_scm(), "D")


def medai_experiment_dataset() -> BehaviouralDataset:
    """Observational tables plus the do(Z=1) experimental domain."""
    return scm_dataset(medai_scm(), "D", domains=[("do_z1", {"Z": 1})])


def fixture_path(name: str):
    """Filesystem path of a shipped fixture file (context-manager free)."""
    return resources.files("beliefbound").joinpath("fixtures", name)
