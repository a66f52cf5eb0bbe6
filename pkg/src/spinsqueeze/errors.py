"""Exception types raised by the simulation modules."""


class SpinSqueezeError(RuntimeError):
    """Base class for numerical failures (CLI exit status 3)."""


class DegenerateFrameError(SpinSqueezeError, ValueError):
    """Mean spin has no component in the (n2, n3) plane of the frame."""


class SearchError(SpinSqueezeError):
    def __init__(self, message, samples=None):
        super().__init__(message)
        self.samples = samples


class ConvergenceError(SpinSqueezeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StabilityError(SpinSqueezeError):
    pass


class GridError(SpinSqueezeError):
    pass


class WindowError(SpinSqueezeError):
    pass


class FitError(SpinSqueezeError):
    pass


class SamplingError(SpinSqueezeError):
    pass


class ConfigError(ValueError):
    """Malformed experiment configuration (CLI exit status 2)."""

    def __init__(self, message, line=None, key=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.key = key
