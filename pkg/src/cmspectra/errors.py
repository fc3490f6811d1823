"""Exception types shared across the package.

Flat hierarchy under :class:`CmspectraError` so callers can catch either the
specific failure or anything raised by this package. Grouped bases exist for
the CLI exit-code mapping (config / sampling / convergence).
"""


class CmspectraError(Exception):
    """Base class for all errors raised by cmspectra."""


class ConfigError(CmspectraError):
    """Invalid configuration or parameters (CLI exit code 2)."""


class SamplingError(CmspectraError):
    """A sampler cannot produce the requested graph (CLI exit code 3)."""


class SolverError(CmspectraError):
    """An iterative solver failed (CLI exit code 4)."""


# -- degree sequences --------------------------------------------------------

class NonPositiveDegreeError(ConfigError):
    """A degree sequence contains an entry smaller than 1."""


class OddSumError(ConfigError):
    """The degree sum is odd, so no multigraph realizes the sequence."""


class InfeasibleParamsError(ConfigError):
    """Degree-family parameters cannot produce a valid sequence."""


# -- samplers ----------------------------------------------------------------

class NotGraphicalError(SamplingError):
    """No simple graph realizes the degree sequence."""


class AttemptsExhaustedError(SamplingError):
    """Rejection sampling hit its attempt budget without a simple graph.

    Signals that the simplicity probability is too small (possibly zero)
    for rejection; switching MCMC is the usual remedy.
    """

    def __init__(self, attempts: int):
        super().__init__(
            f"no simple graph after {attempts} matchings; "
            "P(simple) may be tiny or zero, consider the MCMC sampler"
        )
        self.attempts = attempts


class InvalidRegimeError(SamplingError):
    """Soft-constraint edge probabilities would leave [0, 1)."""


# -- spectral engine ---------------------------------------------------------

class NoConvergenceError(SolverError):
    """Krylov iteration did not reach tolerance within its budget."""

    def __init__(self, msg: str, matvecs: int):
        super().__init__(msg)
        self.matvecs = matvecs


class DimensionTooLargeError(ConfigError):
    """Dense-spectrum path requested above its size cap."""


class DimensionMismatchError(ConfigError):
    """Operator and vector dimensions disagree."""


class DegreeMismatchError(ConfigError):
    """Graph degrees do not match the supplied degree sequence."""


# -- theory ------------------------------------------------------------------

class InvalidDegreeError(ConfigError):
    """A formula requires degree >= 2."""


class DegenerateSequenceError(ConfigError):
    """A closed form requires a larger degree sum (m1 >= 3)."""


# -- exact oracle ------------------------------------------------------------

class TooLargeError(ConfigError):
    """Exhaustive enumeration requested beyond its hard caps."""


class DegenerateSupportError(ConfigError):
    """Uniformity test needs at least two distinct simple realizations."""


# -- experiment harness ------------------------------------------------------

class EmptySampleError(ConfigError):
    """Summary statistics of an empty value sequence."""


class EmptyExperimentError(ConfigError):
    """An experiment was configured with zero replicates."""
