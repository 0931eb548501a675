"""Monte Carlo verification experiments."""

from interspace.experiments.ciesielski import ciesielski_batch, ciesielski_equivalence_check
from interspace.experiments.concentration import (
    Body,
    BodyKind,
    Subspace,
    concentration_check,
    line_concentration_check,
)
from interspace.experiments.convergence import borel_cantelli_check, zn_convergence
from interspace.experiments.fernique import NormSpec, estimate_fernique
from interspace.experiments.key_inequality import verify_key_inequality
from interspace.experiments.kfunctional import (
    k_functional,
    kfunctional_experiment,
    theta_norm,
    theta_norm_experiment,
)
from interspace.experiments.tightness import tightness_experiment
from interspace.experiments.variance import block_variance_profile

__all__ = [
    "Body",
    "BodyKind",
    "NormSpec",
    "Subspace",
    "block_variance_profile",
    "borel_cantelli_check",
    "ciesielski_batch",
    "ciesielski_equivalence_check",
    "concentration_check",
    "estimate_fernique",
    "k_functional",
    "kfunctional_experiment",
    "line_concentration_check",
    "theta_norm",
    "theta_norm_experiment",
    "tightness_experiment",
    "verify_key_inequality",
    "zn_convergence",
]
