"""Model files (JSON) and result files (CSV).

Model files carry a ``"kind"`` of ``"dd"``, ``"tprd"`` or
``"linear_projection"``::

    {"kind": "dd",
     "rows": [{"weight": 0.5, "p_pos": 0.6, "class_given_x": [0.5, 0.5]}, ...],
     "pairs": [[0, 1]]}                       # optional, default: each class vs the last

    {"kind": "tprd",
     "rows": [{"weight": 1.0, "p01": 0.2, "p11": 0.5, "class_given_x": [0.3, 0.7]}],
     "pairs": [[0, 1]]}                       # optional, default: each class vs the last

    {"kind": "linear_projection", "d0": 1, "dx": 1,
     "rows": [{"weight": 1.0, "x": [1.0],
               "law1": [[0.0, 0.5], [1.0, 0.5]] | {"mean": 0.0, "sd": 1.0},
               "law0": {"atoms": [[0.0], [1.0]], "probs": [0.5, 0.5]}
                       | {"mean": [0.0], "cov": [[1.0]]}}],
     "moment_matrix": [[...]], "cross_moment": [...],   # optional, computed from rows
     "box": [[lo, hi], ...]}                             # optional candidate box

    {"kind": "linear_projection", "dgp": "sim1", "rho": 0.5}
    {"kind": "linear_projection", "dgp": "sim2", "sigma_a": 0.5, "sigma_b": 4}

Class indices are 0-based.  CSV output uses a header row, ``,`` separators,
12 significant digits and ``\\n`` line endings.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import InvalidArgument, ParseError
from .measures import GaussianSpec, make_discrete
from .models.fairness import DdModel, DisparityMatrix, TprdModel
from .models.linear_projection import AtomCloud, GaussianVector, LinearProjectionModel, ProjectionRow
from .simulations import sim1_model, sim2_model

SIG_DIGITS = 12


@dataclass
class LoadedModel:
    kind: str
    model: Any
    pairs: list[tuple[int, int]] | None = None
    box: np.ndarray | None = None

    @property
    def contrasts(self) -> DisparityMatrix:
        return DisparityMatrix.from_pairs(self.pairs, self.model.J)


def read_json(path) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _field(obj, key, where):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    return obj[key]


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {type(value).__name__}")
    return float(value)


def _numbers(value, where) -> np.ndarray:
    if not isinstance(value, list):
        raise ParseError(f"{where}: expected an array of numbers")
    return np.array([_number(v, f"{where}[{i}]") for i, v in enumerate(value)], dtype=float)


def _matrix(value, where) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected a non-empty array of arrays")
    rows = [_numbers(r, f"{where}[{i}]") for i, r in enumerate(value)]
    if len({r.size for r in rows}) != 1:
        raise ParseError(f"{where}: rows have different lengths")
    return np.vstack(rows)


def _rows(obj, where="rows"):
    rows = _field(obj, "rows", "model")
    if not isinstance(rows, list) or not rows:
        raise ParseError(f"{where}: expected a non-empty array")
    return rows


def _pairs(obj, J):
    if "pairs" not in obj:
        return [(j, J - 1) for j in range(J - 1)]
    raw = obj["pairs"]
    if not isinstance(raw, list) or not raw:
        raise ParseError("pairs: expected a non-empty array of [j, j_dagger]")
    out = []
    for i, p in enumerate(raw):
        if not isinstance(p, list) or len(p) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in p):
            raise ParseError(f"pairs[{i}]: expected two integer class indices")
        if p[0] == p[1] or not (0 <= p[0] < J and 0 <= p[1] < J):
            raise ParseError(f"pairs[{i}]: classes must be distinct and in 0..{J - 1}")
        out.append((p[0], p[1]))
    return out


def _wrap(fn, where):
    try:
        return fn()
    except ParseError:
        raise
    except InvalidArgument as exc:
        raise ParseError(f"{where}: {exc}") from None


def parse_dd(obj) -> LoadedModel:
    rows = _rows(obj)
    w = np.array([_number(_field(r, "weight", f"rows[{i}]"), f"rows[{i}].weight") for i, r in enumerate(rows)])
    pa = np.array([_number(_field(r, "p_pos", f"rows[{i}]"), f"rows[{i}].p_pos") for i, r in enumerate(rows)])
    c = [_numbers(_field(r, "class_given_x", f"rows[{i}]"), f"rows[{i}].class_given_x") for i, r in enumerate(rows)]
    if len({v.size for v in c}) != 1 or c[0].size < 2:
        raise ParseError("rows[*].class_given_x: every row needs the same number (>= 2) of classes")
    cp = _numbers(obj["class_probs"], "class_probs") if "class_probs" in obj else None
    model = _wrap(lambda: DdModel(w, pa, np.vstack(c), cp), "model")
    return LoadedModel("dd", model, _pairs(obj, model.J))


def parse_tprd(obj) -> LoadedModel:
    rows = _rows(obj)

    def col(key):
        return np.array([_number(_field(r, key, f"rows[{i}]"), f"rows[{i}].{key}") for i, r in enumerate(rows)])

    c = [_numbers(_field(r, "class_given_x", f"rows[{i}]"), f"rows[{i}].class_given_x") for i, r in enumerate(rows)]
    if len({v.size for v in c}) != 1 or c[0].size < 2:
        raise ParseError("rows[*].class_given_x: every row needs the same number (>= 2) of classes")
    model = _wrap(lambda: TprdModel(col("weight"), col("p01"), col("p11"), np.vstack(c)), "model")
    return LoadedModel("tprd", model, _pairs(obj, model.J))


def _law1(raw, where):
    if isinstance(raw, dict):
        return _wrap(lambda: GaussianSpec(_number(_field(raw, "mean", where), f"{where}.mean"),
                                          _number(_field(raw, "sd", where), f"{where}.sd")), where)
    pairs = _matrix(raw, where)
    if pairs.shape[1] != 2:
        raise ParseError(f"{where}: expected [value, prob] pairs")
    return _wrap(lambda: make_discrete(pairs), where)


def _law0(raw, where):
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: expected an object with atoms/probs or mean/cov")
    if "atoms" in raw:
        atoms = _matrix(raw["atoms"], f"{where}.atoms")
        probs = _numbers(_field(raw, "probs", where), f"{where}.probs")
        return _wrap(lambda: AtomCloud(atoms, probs), where)
    mean = _numbers(_field(raw, "mean", where), f"{where}.mean")
    cov = _matrix(_field(raw, "cov", where), f"{where}.cov")
    return _wrap(lambda: GaussianVector(mean, cov), where)


def parse_linear_projection(obj) -> LoadedModel:
    box = _matrix(obj["box"], "box") if "box" in obj else None
    if box is not None and box.shape[1] != 2:
        raise ParseError("box: expected [lo, hi] per coordinate")
    if "dgp" in obj:
        dgp = obj["dgp"]
        grid = int(_number(obj.get("x_grid", 101), "x_grid"))
        if dgp == "sim1":
            model = _wrap(lambda: sim1_model(_number(_field(obj, "rho", "model"), "rho"), grid), "model")
        elif dgp == "sim2":
            model = _wrap(
                lambda: sim2_model(
                    _number(_field(obj, "sigma_a", "model"), "sigma_a"),
                    _number(_field(obj, "sigma_b", "model"), "sigma_b"),
                    grid,
                    int(_number(obj.get("atoms", 40), "atoms")),
                ),
                "model",
            )
        else:
            raise ParseError(f"dgp: unknown built-in process {dgp!r} (expected 'sim1' or 'sim2')")
        return LoadedModel("linear_projection", model, box=box)
    d0 = int(_number(_field(obj, "d0", "model"), "d0"))
    dx = int(_number(_field(obj, "dx", "model"), "dx"))
    rows = []
    for i, r in enumerate(_rows(obj)):
        where = f"rows[{i}]"
        weight = _number(_field(r, "weight", where), f"{where}.weight")
        x = _numbers(r["x"], f"{where}.x") if "x" in r else np.zeros(dx)
        rows.append(ProjectionRow(weight, x, _law1(_field(r, "law1", where), f"{where}.law1"),
                                  _law0(_field(r, "law0", where), f"{where}.law0")))
    m = _matrix(obj["moment_matrix"], "moment_matrix") if "moment_matrix" in obj else None
    c = _numbers(obj["cross_moment"], "cross_moment") if "cross_moment" in obj else None
    if (m is None or c is None) and any("x" not in r for r in obj["rows"]):
        raise ParseError("rows: every row needs 'x' when moment_matrix/cross_moment are omitted")
    model = _wrap(lambda: LinearProjectionModel(rows, d0, dx, m, c), "model")
    if box is not None and box.shape[0] != model.dim:
        raise ParseError(f"box: expected {model.dim} coordinate ranges")
    return LoadedModel("linear_projection", model, box=box)


def parse_model(obj) -> LoadedModel:
    kind = _field(obj, "kind", "model")
    parsers = {"dd": parse_dd, "tprd": parse_tprd, "linear_projection": parse_linear_projection}
    if kind not in parsers:
        raise ParseError(f"kind: unknown model kind {kind!r} (expected one of {sorted(parsers)})")
    return parsers[kind](obj)


def load_model(path) -> LoadedModel:
    obj = read_json(path)
    try:
        return parse_model(obj)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


# --- CSV ---------------------------------------------------------------------------


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0.0:
            return "0"  # no negative zero in output
        return format(v, f".{SIG_DIGITS}g")
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    directory = os.path.dirname(os.fspath(path))
    try:
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise InvalidArgument(f"{path}: cannot write ({exc.strerror})") from None


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    return header, np.array(data, dtype=float).reshape(-1, len(header))


def write_points(path, points, prefix="theta") -> None:
    points = np.atleast_2d(points)
    header = [f"{prefix}_{k + 1}" for k in range(points.shape[1])]
    write_csv(path, header, points.tolist())


def write_halfspaces(path, normals, offsets) -> None:
    normals = np.atleast_2d(normals)
    header = [f"normal_{k + 1}" for k in range(normals.shape[1])] + ["offset"]
    write_csv(path, header, (list(n) + [o] for n, o in zip(normals.tolist(), np.asarray(offsets).tolist())))
