"""Exception hierarchy.

Every error raised on purpose by this package derives from BeliefBoundError,
so callers (and the CLI) can distinguish bad input from genuine bugs.
"""

from __future__ import annotations


class BeliefBoundError(Exception):
    """Base class for all package errors."""


class InputError(BeliefBoundError):
    """Malformed or inconsistent caller input (bad value, scope mismatch...)."""


class ModelError(BeliefBoundError):
    """A structural model is invalid (cycles, partial mechanism tables...)."""


class ZeroMassError(BeliefBoundError):
    """Conditioning on (or dividing by) an event of probability zero.

    Kept distinct from InputError because bound formulas divide by these
    masses and a silent NaN would poison every downstream report.
    """


class UnsupportedError(BeliefBoundError):
    """The request is well-formed but outside what this package implements."""


class DataError(BeliefBoundError):
    """Observed tables are mutually inconsistent (e.g. infeasible polytope)."""


class AtomLimitError(BeliefBoundError):
    """A canonical response-type space would exceed the configured atom cap."""


class SamplingError(BeliefBoundError):
    """A Monte Carlo routine produced no usable samples."""


class ProviderError(BeliefBoundError):
    """A gap-lower provider failed; the message names the offending pair."""


class OracleError(BeliefBoundError):
    """Internal optimizer failure that valid inputs should never trigger."""
