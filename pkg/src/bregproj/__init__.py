"""
Bregman divergences, left and right projections and proximal maps on
normed spaces of vectors and Hermitian matrices.
"""

__version__ = "0.1.0"

from .errors import (BregprojError, InfeasibleError, PreconditionError, UnsupportedOperation,
                     ValidationError)
from .spaces import NormSpec, Space
from .gauges import GaugePotential, PowerGauge, Quasigauge, gauge_from_dict
from .potentials import potential_from_dict
from .divergence import bregman, bregman_value, identity_suite, one_sided_bregman, psi_angle
from .convex_sets import set_from_dict
from .projections import ProjectionResult, left_project, right_project, verify_pythagorean
from .operators import (MonotoneMap, certify_quasinonexpansive, cyclic_project, left_prox,
                        left_resolvent, right_prox, right_resolvent)
from .embeddings import Embedding, d_gamma, embedding_from_dict, pullback_project

__all__ = [
    "__version__", "BregprojError", "InfeasibleError", "PreconditionError", "UnsupportedOperation",
    "ValidationError", "NormSpec", "Space", "GaugePotential", "PowerGauge", "Quasigauge",
    "gauge_from_dict", "potential_from_dict", "bregman", "bregman_value", "identity_suite",
    "one_sided_bregman", "psi_angle", "set_from_dict", "ProjectionResult", "left_project",
    "right_project", "verify_pythagorean", "MonotoneMap", "certify_quasinonexpansive",
    "cyclic_project", "left_prox", "left_resolvent", "right_prox", "right_resolvent",
    "Embedding", "d_gamma", "embedding_from_dict", "pullback_project",
]
