"""
interspace: intermediate Banach-space norms for Gaussian series measures

A numerical library that provides:
- Dyadic piecewise-linear paths with sup, Hölder and H^1 norms
- Haar/Schauder transforms and Ciesielski weights
- Gaussian series models with reproducible, worker-independent sampling
- Certified block schedules and the sum-block / sup-block norms
- Monte Carlo experiments checking every bound against its oracle
"""

from interspace.blocks import BlockSchedule, Variant, block_project, build_schedule, dyadic_schedule
from interspace.core.report import ExperimentReport, ReportItem
from interspace.core.sampling import ReplicateSampler
from interspace.errors import (
    BlockIndexError,
    CoefficientError,
    ConfigError,
    ExperimentError,
    InterspaceError,
    ModelError,
    ParameterError,
    PathError,
    ScheduleError,
    SolverError,
)
from interspace.haar import CoeffSeq, analyze, ciesielski_seq_norm, ciesielski_weight, synthesize
from interspace.models import BasisModel, TailParams, basis_path, make_model, sample_partial_sum
from interspace.norms import (
    block_tail_bound,
    rkhs_norm,
    sum_block_norm,
    sup_block_norm,
)
from interspace.paths import DyadicPath, h1_seminorm, make_path, modulus_of_continuity, sup_norm

__version__ = "0.1.0"

__all__ = [
    # Paths and coefficients
    "DyadicPath",
    "CoeffSeq",
    "make_path",
    "sup_norm",
    "h1_seminorm",
    "modulus_of_continuity",
    "analyze",
    "synthesize",
    "ciesielski_weight",
    "ciesielski_seq_norm",
    # Models
    "BasisModel",
    "TailParams",
    "make_model",
    "basis_path",
    "sample_partial_sum",
    # Blocks and norms
    "BlockSchedule",
    "Variant",
    "build_schedule",
    "dyadic_schedule",
    "block_project",
    "sum_block_norm",
    "sup_block_norm",
    "rkhs_norm",
    "block_tail_bound",
    # Runs
    "ReplicateSampler",
    "ExperimentReport",
    "ReportItem",
    # Errors
    "InterspaceError",
    "PathError",
    "CoefficientError",
    "ModelError",
    "ScheduleError",
    "BlockIndexError",
    "ExperimentError",
    "SolverError",
    "ConfigError",
    "ParameterError",
]
