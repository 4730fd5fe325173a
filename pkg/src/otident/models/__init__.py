"""Worked models: linear projection, fairness disparities, supermodular expectations."""

from .fairness import (
    DdModel,
    DisparityMatrix,
    SupportRouteInterval,
    TprdModel,
    canonical_direction,
    dd_interval,
    dd_support,
    dd_support_batch,
    dd_theta_bounds,
    tprd_endpoint_theta,
    tprd_frechet_bounds,
    tprd_interval,
    tprd_interval_via_support,
    tprd_map,
    tprd_candidates,
    tprd_map_batch,
    tprd_theta_support,
    tprd_theta_support_batch,
)
from .linear_projection import (
    AtomCloud,
    GaussianVector,
    LinearProjectionModel,
    ProjectionRow,
    lp_candidates,
    lp_halfspace,
    lp_halfspaces,
    lp_support,
    lp_support_batch,
    projected_support_2d,
)
from .supermodular import supermodular_interval

__all__ = [
    "AtomCloud",
    "DdModel",
    "DisparityMatrix",
    "GaussianVector",
    "LinearProjectionModel",
    "ProjectionRow",
    "SupportRouteInterval",
    "TprdModel",
    "canonical_direction",
    "dd_interval",
    "dd_support",
    "dd_support_batch",
    "dd_theta_bounds",
    "lp_candidates",
    "lp_halfspace",
    "lp_halfspaces",
    "lp_support",
    "lp_support_batch",
    "projected_support_2d",
    "supermodular_interval",
    "tprd_candidates",
    "tprd_endpoint_theta",
    "tprd_frechet_bounds",
    "tprd_interval",
    "tprd_interval_via_support",
    "tprd_map",
    "tprd_map_batch",
    "tprd_theta_support",
    "tprd_theta_support_batch",
]
