"""interspace exception classes."""

from __future__ import annotations


class InterspaceError(Exception):
    """Base exception for all interspace errors."""

    pass


class PathError(InterspaceError):
    """Raised when a dyadic path or one of its arguments is invalid."""

    pass


class CoefficientError(InterspaceError):
    """Raised when a coefficient sequence does not fit the requested operation."""

    pass


class ModelError(InterspaceError):
    """Raised when a basis model cannot be built or evaluated."""

    def __init__(self, kind: str, message: str) -> None:
        self.kind = kind
        super().__init__(f"Model '{kind}': {message}")


class ScheduleError(InterspaceError):
    """Raised when a block threshold cannot be certified within the tail window."""

    def __init__(self, k: int, threshold: float, best_bound: float, j_max: int) -> None:
        self.k = k
        self.threshold = threshold
        self.best_bound = best_bound
        self.j_max = j_max
        super().__init__(
            f"Block {k}: threshold {threshold:.3e} unreachable within J_max={j_max} "
            f"(best certified bound {best_bound:.3e}); deepen truncation or reduce K"
        )


class BlockIndexError(InterspaceError):
    """Raised when a block index falls outside the schedule."""

    def __init__(self, k: int, block_count: int) -> None:
        self.k = k
        self.block_count = block_count
        super().__init__(f"Block index {k} outside 0..{block_count - 1}")


class ExperimentError(InterspaceError):
    """Raised when an experiment cannot produce a meaningful estimate."""

    def __init__(self, experiment: str, message: str) -> None:
        self.experiment = experiment
        super().__init__(f"Experiment '{experiment}': {message}")


class SolverError(InterspaceError):
    """Raised when the K-functional solver exhausts its iteration budget."""

    def __init__(self, t: float, message: str) -> None:
        self.t = t
        super().__init__(f"K-functional at t={t:.3e}: {message}")


class ConfigError(InterspaceError):
    """Raised when a run configuration fails validation."""

    pass


class ParameterError(InterspaceError):
    """Raised when a numerical parameter is outside its admissible range."""

    def __init__(self, param_name: str, message: str) -> None:
        self.param_name = param_name
        super().__init__(f"Parameter '{param_name}': {message}")
