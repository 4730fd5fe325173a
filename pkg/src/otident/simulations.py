"""Built-in data-generating processes for the two linear-projection experiments.

Both regress ``Y1`` on ``(Y0a, Y0b, 1, X)`` and compare, in the plane of the two
``Y0`` coefficients, the identified set with the larger set obtained when the
``t0`` part of each direction may have only one non-zero coordinate.

* Experiment 1: ``(Y0a, Y0b, X)`` jointly normal with ``corr(Y0a, Y0b) = rho``,
  ``Y1 = Y0a + Y0b + X + eps``.  Conditional laws are Gaussian, so every
  quantile integral has a closed form.
* Experiment 2: ``X ~ N(0, 4)``, ``Y0a = X^2 + eta_a``, ``Y0b = Y0a^2 + eta_b``,
  ``Y1 = Y0a + 0.2 Y0b + 1 + X + eps``.  Conditional laws are built by
  quadrature on an equal-probability grid (no Monte Carlo).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import InvalidArgument
from .measures import GaussianSpec, make_discrete, standard_normal_nodes
from .models.linear_projection import (
    AtomCloud,
    GaussianVector,
    LinearProjectionModel,
    ProjectionRow,
    lp_halfspaces,
    projected_support_2d,
)
from .setapprox import (
    HalfspaceStack,
    IdentifiedSetApprox,
    containment_violations,
    convex_hull_2d,
    filter_candidates,
    grid_2d,
    polygon_area,
    project_support,
    restricted_directions,
    sample_sphere,
)

SIM1_RHOS = (0.0, 0.25, 0.5, 0.75, 0.9, 1.0)
SIM2_SIGMAS = ((2.0, 40.0), (2.0, 20.0), (2.0, 2.0), (0.5, 20.0), (0.5, 4.0), (0.5, 0.1))
SIM1_TRUTH = np.array([1.0, 1.0, 0.0, 1.0])
SIM2_TRUTH = np.array([1.0, 0.2, 1.0, 1.0])
COORDS = (0, 1)


@dataclass(frozen=True)
class SimConfig:
    directions: int = 2000
    grid_side: int = 200
    x_grid: int = 101
    atoms: int = 40
    projection_angles: int = 256
    seed: int = 0
    tol: float = 1e-9
    box_padding: float = 0.08

    def __post_init__(self):
        for name in ("directions", "grid_side", "x_grid", "atoms", "projection_angles"):
            if getattr(self, name) < 1:
                raise InvalidArgument(f"{name} must be at least 1")
        if self.tol <= 0:
            raise InvalidArgument("tolerance must be positive")


@dataclass
class Panel:
    label: str
    params: dict
    ours: IdentifiedSetApprox
    outer: IdentifiedSetApprox | None
    ours_area: float
    outer_area: float | None
    containment_violations: int | None
    truth_accepted: bool
    sum_interval: tuple[float, float] | None = None
    box: tuple[tuple[float, float], tuple[float, float]] = field(default=((0, 0), (0, 0)))


# --- models -----------------------------------------------------------------------


def sim1_model(rho: float, x_grid: int = 101) -> LinearProjectionModel:
    if not -1.0 <= rho <= 1.0:
        raise InvalidArgument("rho must lie in [-1, 1]")
    cov0 = np.array([[1.0, rho], [rho, 1.0]])
    sd1 = float(np.sqrt(3.0 + 2.0 * rho))  # Var(Y0a + Y0b + eps)
    xs = standard_normal_nodes(x_grid)
    law0 = GaussianVector(np.zeros(2), cov0)
    rows = [ProjectionRow(1.0 / x_grid, np.array([1.0, x]), GaussianSpec(float(x), sd1), law0) for x in xs]
    m = np.zeros((4, 4))
    m[:2, :2] = cov0
    m[2:, 2:] = np.eye(2)
    return LinearProjectionModel(rows, d0=2, dx=2, moment_matrix=m, cross_moment=[0.0, 1.0])


def sim2_model(sigma_a: float, sigma_b: float, x_grid: int = 101, atoms: int = 40) -> LinearProjectionModel:
    """Quadrature version of experiment 2.

    Per covariate node ``x``: ``atoms`` nodes for ``eta_a`` times ``atoms``
    nodes for ``eta_b`` give the joint law of ``Y0``; given ``eta_a`` the
    outcome is normal with variance ``1 + 0.04 sigma_b^2``, discretized with
    the same ``atoms`` nodes.  Moments come from the same quadrature.
    """
    if sigma_a < 0 or sigma_b < 0:
        raise InvalidArgument("noise scales must be non-negative")
    xs = 2.0 * standard_normal_nodes(x_grid)
    z = standard_normal_nodes(atoms)
    za, zb = np.meshgrid(z, z, indexing="ij")
    probs = np.full(za.size, 1.0 / za.size)
    sd_y1 = float(np.sqrt(1.0 + 0.04 * sigma_b**2))
    rows = []
    for x in xs:
        a = x * x + sigma_a * za.ravel()
        b = a * a + sigma_b * zb.ravel()
        mean_y1 = a + 0.2 * a * a + 1.0 + x
        y1_vals = mean_y1 + sd_y1 * zb.ravel()  # zb reused as the outcome noise nodes
        law1 = make_discrete(zip(y1_vals, probs))
        rows.append(ProjectionRow(1.0 / x_grid, np.array([1.0, x]), law1, AtomCloud(np.column_stack([a, b]), probs)))
    return LinearProjectionModel(rows, d0=2, dx=2)


# --- panel construction -----------------------------------------------------------


def _angles(n: int) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(ang), np.sin(ang)])


def _box_from_support(h_pos, h_neg, padding):
    """Rectangle from supports at +e1, +e2 (``h_pos``) and -e1, -e2 (``h_neg``)."""
    lo = -np.asarray(h_neg)
    hi = np.asarray(h_pos)
    span = np.maximum(hi - lo, 1e-6)
    return lo - padding * span, hi + padding * span


def _axis_supports(h_fn):
    vals = h_fn(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]))
    return vals[:2], vals[2:]


def _planar(dirs, offsets):
    return HalfspaceStack(dirs, offsets)


def _hull_area(approx: IdentifiedSetApprox) -> float:
    pts = approx.accepted_points
    return polygon_area(convex_hull_2d(pts)) if pts.shape[0] else 0.0


def regular_panel(model: LinearProjectionModel, cfg: SimConfig, truth, label: str, params: dict) -> Panel:
    """Identified set vs restricted-direction set when the moment matrix is invertible."""
    dirs = sample_sphere(2, cfg.directions, cfg.seed)
    ours_h = _planar(dirs, projected_support_2d(model, dirs, COORDS))

    t_restricted = restricted_directions(model.d0, model.dx, cfg.directions, cfg.seed)
    outer_4d = lp_halfspaces(model, t_restricted)
    ang = _angles(cfg.projection_angles)
    outer_h = _planar(ang, project_support(outer_4d, ang, COORDS))

    h_pos, h_neg = _axis_supports(lambda d: project_support(outer_4d, d, COORDS))
    lo, hi = _box_from_support(h_pos, h_neg, cfg.box_padding)
    cand = grid_2d(lo, hi, cfg.grid_side)
    ours = filter_candidates(cand, ours_h, cfg.tol)
    outer = filter_candidates(cand, outer_h, cfg.tol)
    truth_ok = bool(filter_candidates(np.asarray(truth)[list(COORDS)][None, :], ours_h, cfg.tol).accepted[0])
    return Panel(
        label,
        params,
        ours,
        outer,
        _hull_area(ours),
        _hull_area(outer),
        containment_violations(ours, outer),
        truth_ok,
        box=((float(lo[0]), float(hi[0])), (float(lo[1]), float(hi[1]))),
    )


def _linear_extremes(hs: HalfspaceStack, c) -> tuple[float, float]:
    bounds = [(None, None)] * hs.dim
    out = []
    for sgn in (1.0, -1.0):
        res = linprog(-sgn * np.asarray(c, dtype=float), A_ub=hs.normals, b_ub=hs.offsets, bounds=bounds, method="highs")
        out.append(sgn * -res.fun if res.status == 0 else sgn * np.inf)
    return out[1], out[0]


def singular_panel(model: LinearProjectionModel, cfg: SimConfig, truth, label: str, params: dict) -> Panel:
    """Halfspace-only construction for a singular moment matrix.

    Full-sphere directions are used together with the pair ``+-t`` where
    ``t0`` is proportional to ``(1, 1)`` and ``tX = 0``.  The planar set is a
    strip; the reported interval is the range of ``theta_0 + theta_1``.
    """
    t = sample_sphere(model.dim, cfg.directions, cfg.seed)
    pair = np.zeros((2, model.dim))
    pair[:, :2] = np.array([[1.0, 1.0], [-1.0, -1.0]]) / np.sqrt(2.0)
    hs = lp_halfspaces(model, np.vstack([t, pair]))
    sum_fn = np.zeros(model.dim)
    sum_fn[list(COORDS)] = 1.0
    s_lo, s_hi = _linear_extremes(hs, sum_fn)

    diag = np.array([[1.0, 1.0], [-1.0, -1.0]]) / np.sqrt(2.0)
    dirs = np.vstack([sample_sphere(2, cfg.projection_angles, cfg.seed), diag])
    planar = _planar(dirs, project_support(hs, dirs, COORDS)).finite()
    half = max(abs(s_lo), abs(s_hi)) + 1.0
    lo, hi = np.array([-half, -half]), np.array([half, half])
    cand = grid_2d(lo, hi, cfg.grid_side)
    ours = filter_candidates(cand, planar, cfg.tol)
    truth_ok = bool(s_lo - cfg.tol <= float(np.asarray(truth)[list(COORDS)].sum()) <= s_hi + cfg.tol)
    return Panel(
        label,
        params,
        ours,
        None,
        _hull_area(ours),
        None,
        None,
        truth_ok,
        sum_interval=(float(s_lo), float(s_hi)),
        box=((float(lo[0]), float(hi[0])), (float(lo[1]), float(hi[1]))),
    )


def run_sim1(cfg: SimConfig = SimConfig(), rhos=SIM1_RHOS) -> list[Panel]:
    panels = []
    for rho in rhos:
        model = sim1_model(rho, cfg.x_grid)
        label = f"rho={rho:g}"
        if model.condition_number() > 1e12 or not np.isfinite(model.condition_number()):
            panels.append(singular_panel(model, cfg, SIM1_TRUTH, label, {"rho": rho}))
        else:
            panels.append(regular_panel(model, cfg, SIM1_TRUTH, label, {"rho": rho}))
    return panels


def run_sim2(cfg: SimConfig = SimConfig(), sigmas=SIM2_SIGMAS) -> list[Panel]:
    panels = []
    for sa, sb in sigmas:
        model = sim2_model(sa, sb, cfg.x_grid, cfg.atoms)
        label = f"sigma_a={sa:g},sigma_b={sb:g}"
        panels.append(regular_panel(model, cfg, SIM2_TRUTH, label, {"sigma_a": sa, "sigma_b": sb}))
    return panels
