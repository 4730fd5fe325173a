"""Command-line entry point: ``otident <command> [options]``.

Commands
  support      support-function values of a model at sampled directions
  set          accepted candidate points and the halfspaces that filtered them
  sim1, sim2   the two built-in linear-projection experiments (six panels each)
  dream-solve  solve one 2 x J partial transport instance given as JSON
  verify       randomized equivalence suites against the LP oracle

Exit codes: 0 success, 2 parse/config error, 3 verification failure,
4 degenerate model or empty identified set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import io
from .dream import PartialOtInstance, solve_dream
from .errors import EmptySet, InvalidArgument, OtIdentError, SingularMoment, VerificationFailure
from .models import (
    canonical_direction,
    dd_interval,
    dd_support_batch,
    lp_candidates,
    lp_halfspaces,
    lp_support_batch,
    tprd_candidates,
    tprd_interval,
    tprd_map_batch,
    tprd_theta_support_batch,
)
from .setapprox import (
    DEFAULT_CANDIDATES,
    DEFAULT_DIRECTIONS,
    DEFAULT_TOL,
    HalfspaceStack,
    diagnostics,
    filter_candidates,
    restricted_directions,
    sample_sphere,
    uniform_box,
)
from .simulations import SIM1_TRUTH, SIM2_TRUTH, SimConfig, run_sim1, run_sim2
from .verify import raise_on_failure, run_all

SIM_CANDIDATES = 40000


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str | None
    seed: int
    directions: int
    candidates: int
    grid: int
    tol: float
    out: str
    restricted: bool
    svg: bool

    def __post_init__(self):
        if self.directions < 1 or self.candidates < 1 or self.grid < 1:
            raise InvalidArgument("--directions, --candidates and --grid must be at least 1")
        if not self.tol > 0:
            raise InvalidArgument("--tol must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidArgument("--seed must be an unsigned 64-bit integer")


def _config(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        model=getattr(args, "model", None),
        seed=args.seed,
        directions=args.directions,
        candidates=args.candidates,
        grid=args.grid,
        tol=args.tol,
        out=args.out,
        restricted=getattr(args, "restricted", False),
        svg=getattr(args, "svg", False),
    )


def _say(msg: str) -> None:
    print(msg, flush=True)


def _require_model(cfg: RunConfig):
    if not cfg.model:
        raise InvalidArgument(f"{cfg.command}: --model PATH is required")
    return io.load_model(cfg.model)


# --- support -------------------------------------------------------------------------


def _lp_directions(model, cfg: RunConfig):
    if cfg.restricted:
        return restricted_directions(model.d0, model.dx, cfg.directions, cfg.seed)
    return sample_sphere(model.dim, cfg.directions, cfg.seed)


def support_values(loaded, cfg: RunConfig, canonical: bool = False):
    """Directions and support values for any model kind."""
    m = loaded.model
    if loaded.kind == "dd":
        E = loaded.contrasts
        dirs = sample_sphere(E.K, cfg.directions, cfg.seed)
        return dirs, dd_support_batch(m, E, dirs)
    if loaded.kind == "tprd":
        if canonical:
            dirs = np.array([canonical_direction(m.J, j, jd, s) for j, jd in loaded.pairs for s in (1.0, -1.0)])
        else:
            dirs = sample_sphere(2 * m.J, cfg.directions, cfg.seed)
        return dirs, tprd_theta_support_batch(m, dirs)
    dirs = _lp_directions(m, cfg)
    try:
        return dirs, lp_support_batch(m, dirs)
    except SingularMoment as exc:
        raise SingularMoment(f"{exc}; run 'otident set' on this model for halfspace filtering") from None


def cmd_support(cfg: RunConfig, canonical: bool = False) -> int:
    loaded = _require_model(cfg)
    dirs, vals = support_values(loaded, cfg, canonical)
    path = os.path.join(cfg.out, "support.csv")
    header = [f"q_{k + 1}" for k in range(dirs.shape[1])] + ["support"]
    io.write_csv(path, header, (list(d) + [v] for d, v in zip(dirs.tolist(), vals.tolist())))
    _say(f"wrote {len(vals)} support values to {path}")
    return 0


# --- set -------------------------------------------------------------------------------


def _read_extra_halfspaces(path, dim):
    try:
        header, data = io.read_csv(path)
    except (OSError, ValueError, StopIteration) as exc:
        raise InvalidArgument(f"{path}: cannot read halfspaces ({exc})") from None
    if data.shape[1] != dim + 1:
        raise InvalidArgument(f"{path}: expected {dim} normal columns plus an offset")
    return HalfspaceStack(data[:, :dim], data[:, dim])


def _lp_box(loaded, cfg):
    m = loaded.model
    if loaded.box is not None:
        return loaded.box[:, 0], loaded.box[:, 1]
    try:
        eye = np.eye(m.dim)
        hi = lp_support_batch(m, eye)
        lo = -lp_support_batch(m, -eye)
    except SingularMoment:
        raise InvalidArgument("singular moment matrix: give the candidate box in the model file ('box')") from None
    span = np.maximum(hi - lo, 1e-6)
    return lo - 0.1 * span, hi + 0.1 * span


def build_set(loaded, cfg: RunConfig):
    """Candidates, halfspaces and (for a comparison) the restricted-family halfspaces."""
    m = loaded.model
    comparison = None
    if loaded.kind == "dd":
        E = loaded.contrasts
        dirs = sample_sphere(E.K, cfg.directions, cfg.seed)
        hs = HalfspaceStack(dirs, dd_support_batch(m, E, dirs))
        cand = uniform_box(-np.ones(E.K), np.ones(E.K), cfg.candidates, cfg.seed + 1)
    elif loaded.kind == "tprd":
        dirs = sample_sphere(2 * m.J, cfg.directions, cfg.seed)
        hs = HalfspaceStack(dirs, tprd_theta_support_batch(m, dirs))
        cand = tprd_candidates(m, cfg.candidates, cfg.seed + 1)
    else:
        lo, hi = _lp_box(loaded, cfg)
        cand = lp_candidates(m, lo, hi, cfg.candidates, cfg.seed + 1)
        if cfg.restricted:
            hs = lp_halfspaces(m, restricted_directions(m.d0, m.dx, cfg.directions, cfg.seed))
        else:
            hs = lp_halfspaces(m, sample_sphere(m.dim, cfg.directions, cfg.seed))
            if m.d0 > 1:
                comparison = lp_halfspaces(m, restricted_directions(m.d0, m.dx, cfg.directions, cfg.seed))
    return cand, hs, comparison


def cmd_set(cfg: RunConfig, extra_halfspaces: str | None = None) -> int:
    loaded = _require_model(cfg)
    cand, hs, comparison = build_set(loaded, cfg)
    if extra_halfspaces:
        hs = hs.concat(_read_extra_halfspaces(extra_halfspaces, hs.dim))
    approx = filter_candidates(cand, hs, cfg.tol)
    io.write_halfspaces(os.path.join(cfg.out, "halfspaces.csv"), hs.normals, hs.offsets)
    io.write_points(os.path.join(cfg.out, "accepted.csv"), approx.accepted_points)
    diag = diagnostics(approx)  # raises EmptySet when nothing survives
    _say(f"accepted {diag.accepted_count} of {cand.shape[0]} candidates against {len(hs)} halfspaces")
    outer_pts = None
    if comparison is not None:
        outer = filter_candidates(cand, comparison, cfg.tol)
        outer_pts = outer.accepted_points
        io.write_points(os.path.join(cfg.out, "accepted_restricted.csv"), outer_pts)
        _say(f"restricted directions accept {outer_pts.shape[0]} candidates")
    if loaded.kind == "dd":
        for k, (j, jd) in enumerate(loaded.pairs):
            e = np.zeros(loaded.contrasts.K)
            e[k] = 1.0
            lo, hi = diag.functional_interval(e)
            exact = dd_interval(loaded.model, j, jd)
            _say(f"pair ({j},{jd}): sampled [{lo:.6g}, {hi:.6g}], exact [{exact[0]:.6g}, {exact[1]:.6g}]")
    plot_pts = approx.accepted_points
    if loaded.kind == "tprd":
        mapped, ok = tprd_map_batch(approx.accepted_points, loaded.pairs)
        excluded = int((~ok).sum())
        io.write_points(os.path.join(cfg.out, "mapped.csv"), mapped[ok], prefix="delta")
        _say(f"mapped {int(ok.sum())} points to rate differences; excluded {excluded} with a vanishing denominator")
        for j, jd in loaded.pairs:
            try:
                lo, hi = tprd_interval(loaded.model, j, jd)
                _say(f"pair ({j},{jd}): exact [{lo:.6g}, {hi:.6g}]")
            except OtIdentError as exc:
                _say(f"pair ({j},{jd}): {exc}")
        if mapped.shape[1] >= 2:
            plot_pts = mapped[ok]
    if cfg.svg:
        from .plotting import scatter_sets  # matplotlib loads only when a figure is requested

        pts = plot_pts if plot_pts.shape[1] >= 2 else np.column_stack([plot_pts[:, 0], np.zeros(len(plot_pts))])
        outer2 = outer_pts[:, :2] if outer_pts is not None else None
        path = os.path.join(cfg.out, "accepted.svg")
        scatter_sets(path, pts[:, :2], outer2, title=f"{loaded.kind} identified set")
        _say(f"wrote {path}")
    return 0


# --- simulations ---------------------------------------------------------------------


def _sim_config(cfg: RunConfig):
    side = max(2, int(math.isqrt(cfg.candidates)))
    return SimConfig(directions=cfg.directions, grid_side=side, x_grid=cfg.grid, seed=cfg.seed, tol=cfg.tol)


def _emit_panels(name, panels, cfg: RunConfig, truth):
    rows = []
    for k, p in enumerate(panels):
        base = os.path.join(cfg.out, f"{name}_panel{k + 1}")
        io.write_points(base + "_ours.csv", p.ours.accepted_points, prefix="alpha")
        if p.outer is not None:
            io.write_points(base + "_restricted.csv", p.outer.accepted_points, prefix="alpha")
        s_lo, s_hi = p.sum_interval if p.sum_interval else (float("nan"), float("nan"))
        rows.append(
            [
                k + 1,
                p.label,
                int(p.ours.accepted.sum()),
                int(p.outer.accepted.sum()) if p.outer is not None else -1,
                p.ours_area,
                p.outer_area if p.outer_area is not None else float("nan"),
                p.containment_violations if p.containment_violations is not None else -1,
                p.truth_accepted,
                s_lo,
                s_hi,
            ]
        )
        extra = f", sum interval [{s_lo:.6g}, {s_hi:.6g}]" if p.sum_interval else ""
        _say(
            f"{name} {p.label}: ours {rows[-1][2]} pts (area {p.ours_area:.6g}), "
            f"restricted {rows[-1][3]} pts, containment violations {rows[-1][6]}, truth accepted {p.truth_accepted}{extra}"
        )
    header = ["panel", "label", "ours_count", "restricted_count", "ours_area", "restricted_area",
              "containment_violations", "truth_accepted", "sum_lower", "sum_upper"]
    io.write_csv(os.path.join(cfg.out, f"{name}_summary.csv"), header, rows)
    if cfg.svg:
        from .plotting import panel_grid  # matplotlib loads only when a figure is requested

        path = os.path.join(cfg.out, f"{name}.svg")
        panel_grid(
            path,
            [{"ours": p.ours.accepted_points, "outer": p.outer.accepted_points if p.outer is not None else None,
              "title": p.label, "truth": truth[:2]} for p in panels],
        )
        _say(f"wrote {path}")


def cmd_sim1(cfg: RunConfig) -> int:
    _emit_panels("sim1", run_sim1(_sim_config(cfg)), cfg, SIM1_TRUTH)
    return 0


def cmd_sim2(cfg: RunConfig) -> int:
    _emit_panels("sim2", run_sim2(_sim_config(cfg)), cfg, SIM2_TRUTH)
    return 0


# --- dream-solve / verify ------------------------------------------------------------


def cmd_dream_solve(cfg: RunConfig) -> int:
    if not cfg.model:
        raise InvalidArgument("dream-solve: --model PATH (instance JSON) is required")
    inst = PartialOtInstance.from_json(io.read_json(cfg.model))
    sol = solve_dream(inst)
    print(json.dumps({
        "cost": sol.cost,
        "plan": sol.plan.tolist(),
        "pivot": sol.pivot,
        "bracket": list(sol.bracket),
        "order": sol.order.tolist(),
    }))
    return 0


def cmd_verify(cfg: RunConfig, count: int, fixture: str | None) -> int:
    if count < 0:
        raise InvalidArgument("--count must be non-negative")
    fx = io.read_json(fixture) if fixture else None
    if count == 0 and fx is None:
        print("warning: --count 0 runs no cases; vacuous pass", file=sys.stderr)
    results = run_all(count, cfg.seed, fx)
    for r in results:
        _say(r.line())
    raise_on_failure(results)
    return 0


# --- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otident", description="Identified sets via optimal transport.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, directions=DEFAULT_DIRECTIONS, candidates=DEFAULT_CANDIDATES):
        p.add_argument("--seed", type=int, default=0, help="random seed (unsigned 64-bit)")
        p.add_argument("--directions", type=int, default=directions, help="number of sampled directions")
        p.add_argument("--candidates", type=int, default=candidates, help="number of candidate points")
        p.add_argument("--grid", type=int, default=101, help="covariate grid size for built-in processes")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="halfspace acceptance tolerance")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("support", help="support-function values at sampled directions")
    p.add_argument("--model", help="model JSON file")
    p.add_argument("--restricted", action="store_true", help="restricted directions (linear projection)")
    p.add_argument("--canonical", action="store_true", help="TPRD: only the canonical interval directions")
    common(p)

    p = sub.add_parser("set", help="approximate the identified set by halfspace filtering")
    p.add_argument("--model", help="model JSON file")
    p.add_argument("--restricted", action="store_true", help="restricted directions (linear projection)")
    p.add_argument("--halfspaces", help="extra halfspaces CSV (normal columns then offset)")
    p.add_argument("--svg", action="store_true", help="also write a scatter plot")
    common(p)

    for name, text in (("sim1", "experiment 1: correlated regressors"), ("sim2", "experiment 2: dependence on X")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--svg", action="store_true", help="also write the six-panel figure")
        common(p, candidates=SIM_CANDIDATES)

    p = sub.add_parser("dream-solve", help="solve a 2 x J partial transport instance")
    p.add_argument("--model", help="instance JSON {pi, gamma1, gamma0}")
    common(p)

    p = sub.add_parser("verify", help="oracle equivalence suites")
    p.add_argument("--count", type=int, default=100, help="cases per suite unit (0 = none)")
    p.add_argument("--fixture", help="pinned instance JSON {instance, expected_cost}")
    common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if cfg.command == "support":
            return cmd_support(cfg, args.canonical)
        if cfg.command == "set":
            return cmd_set(cfg, args.halfspaces)
        if cfg.command == "sim1":
            return cmd_sim1(cfg)
        if cfg.command == "sim2":
            return cmd_sim2(cfg)
        if cfg.command == "dream-solve":
            return cmd_dream_solve(cfg)
        return cmd_verify(cfg, args.count, args.fixture)
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        if exc.instance is not None:
            print(json.dumps(exc.instance, sort_keys=True), file=sys.stderr)
        return exc.exit_code
    except EmptySet as exc:
        print(f"error: empty set: {exc}", file=sys.stderr)
        return exc.exit_code
    except OtIdentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
