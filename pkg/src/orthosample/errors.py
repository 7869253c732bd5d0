"""Exception types shared across the package."""


class OrthosampleError(ValueError):
    """Base class for all errors raised by this package."""


class SingularGradient(OrthosampleError):
    """Constraint gradient too small: the tangent projector is undefined."""


class NonPositiveEta(OrthosampleError):
    """A temperature or step size that must be positive was not."""


class NonPositiveBandwidth(OrthosampleError):
    """Kernel bandwidth must be strictly positive."""


class DegenerateEnsemble(OrthosampleError):
    """All particles coincide; pairwise-distance bandwidth selection fails."""


class DimensionMismatch(OrthosampleError):
    """Two sample sets (or a sample set and a target) disagree in dimension."""


class NonFiniteEvaluation(OrthosampleError):
    """A user callable returned NaN or infinity during a numerical routine."""


class BadSchedule(OrthosampleError):
    """Annealing schedule is not strictly decreasing and positive."""


class UnstableStepSize(OrthosampleError):
    """Step size and drift gain sit outside the stable region (eta*alpha > 2 at beta=0)."""


class SamplerRuntimeError(OrthosampleError):
    """A step failed mid-run; the message names the failing iteration."""


class ConfigError(OrthosampleError):
    """Experiment configuration file is missing, malformed, or inconsistent."""
