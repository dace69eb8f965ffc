"""Exception hierarchy shared across the package."""


class ScnSqueezeError(Exception):
    """Base class for all package errors."""


class ValidationError(ScnSqueezeError, ValueError):
    """An input value violates a structural invariant (non-unitary, asymmetric, ...)."""


class ParameterError(ScnSqueezeError, ValueError):
    """An argument is outside its admissible range or inconsistent with others."""


class NumericError(ScnSqueezeError, RuntimeError):
    """A numerical routine failed to produce a usable result."""


class FitError(NumericError):
    """Interferogram fit is under-determined or rank deficient."""


class DegenerateLadderError(ParameterError):
    """Frequency ladder has coincident pair tones."""


class IntegrationError(NumericError):
    """Adaptive quadrature failed to converge."""


class RefinementError(NumericError):
    """Step refinement exhausted its budget before reaching tolerance."""


class ConfigError(ScnSqueezeError, ValueError):
    """Experiment configuration is malformed or fails schema validation."""
