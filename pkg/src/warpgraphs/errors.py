"""Exception hierarchy shared by every subpackage."""


class WarpGraphError(Exception):
    """Base class for all errors raised by warpgraphs."""


class GridError(WarpGraphError, ValueError):
    pass


class FieldError(WarpGraphError, ValueError):
    pass


class FieldFormatError(FieldError):
    """A field CSV file could not be parsed. ``path`` names the file."""

    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{self.path}: {message}")


class MetricError(WarpGraphError, ValueError):
    """Metric is not positive definite; ``index`` is the offending grid point."""

    def __init__(self, index, message="metric is not positive definite"):
        self.index = tuple(int(i) for i in index)
        super().__init__(f"{message} at grid point {self.index}")


class ValidityError(MetricError):
    """Induced metric of a graph fails to be Riemannian somewhere."""


class OrientationError(WarpGraphError, ValueError):
    pass


class CMCRequiredError(WarpGraphError, ValueError):
    pass


class UnsupportedError(WarpGraphError, ValueError):
    pass


class ConvergenceError(WarpGraphError, RuntimeError):
    def __init__(self, message, final_residual, report=None):
        self.final_residual = final_residual
        self.report = report
        super().__init__(f"{message} (final residual {final_residual:.3e})")


class SpacelikeConeError(ConvergenceError):
    pass


class AuditModelError(WarpGraphError, ValueError):
    pass


class ConfigError(WarpGraphError, ValueError):
    pass
