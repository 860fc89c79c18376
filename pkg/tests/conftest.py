from __future__ import annotations

import pytest

from beliefbound.fixtures import (
    medai_alt_scm,
    medai_dataset,
    medai_experiment_dataset,
    medai_scm,
)


@pytest.fixture(scope="session")
def medai():
    return medai_dataset()


@pytest.fixture(scope="session")
def medai_exp():
    return medai_experiment_dataset()


@pytest.fixture(scope="session")
def m1():
    return medai_scm()


@pytest.fixture(scope="session")
def m2():
    return medai_alt_scm()
