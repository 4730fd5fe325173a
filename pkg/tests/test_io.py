import json

import numpy as np
import pytest

from otident import io
from otident.errors import InvalidArgument, ParseError
from otident.models import DdModel, LinearProjectionModel, TprdModel


def write(tmp_path, obj, name="model.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return path


DD = {"kind": "dd", "rows": [{"weight": 0.5, "p_pos": 0.6, "class_given_x": [0.5, 0.5]},
                             {"weight": 0.5, "p_pos": 0.2, "class_given_x": [0.5, 0.5]}]}
TPRD = {"kind": "tprd", "rows": [{"weight": 1.0, "p01": 0.2, "p11": 0.5, "class_given_x": [0.3, 0.7]}]}
LP = {
    "kind": "linear_projection", "d0": 1, "dx": 1,
    "rows": [
        {"weight": 0.5, "x": [1.0], "law1": [[0.0, 0.5], [1.0, 0.5]], "law0": {"atoms": [[0.0], [1.0]], "probs": [0.5, 0.5]}},
        {"weight": 0.5, "x": [1.0], "law1": {"mean": 0.0, "sd": 1.0}, "law0": {"mean": [0.5], "cov": [[1.0]]}},
    ],
}


class TestParse:
    def test_dd(self, tmp_path):
        loaded = io.load_model(write(tmp_path, DD))
        assert loaded.kind == "dd" and isinstance(loaded.model, DdModel)
        assert loaded.pairs == [(0, 1)]

    def test_tprd_pairs(self, tmp_path):
        loaded = io.load_model(write(tmp_path, dict(TPRD, pairs=[[1, 0]])))
        assert isinstance(loaded.model, TprdModel) and loaded.pairs == [(1, 0)]

    def test_linear_projection(self, tmp_path):
        loaded = io.load_model(write(tmp_path, LP))
        assert isinstance(loaded.model, LinearProjectionModel) and loaded.model.dim == 2

    def test_builtin_process(self, tmp_path):
        loaded = io.load_model(write(tmp_path, {"kind": "linear_projection", "dgp": "sim1", "rho": 0.5, "x_grid": 11}))
        assert loaded.model.dim == 4

    def test_malformed_json_position(self, tmp_path):
        with pytest.raises(ParseError, match=r"model.json:2:"):
            io.load_model(write(tmp_path, '{"kind": "dd",\n "rows": [}'))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="cannot read"):
            io.load_model(tmp_path / "absent.json")

    @pytest.mark.parametrize(
        "mutate, pattern",
        [
            (lambda o: o["rows"][0].update(p_pos="high"), r"rows\[0\]\.p_pos"),
            (lambda o: o["rows"][1].pop("class_given_x"), r"rows\[1\].*class_given_x"),
            (lambda o: o.update(pairs=[[0, 0]]), r"pairs\[0\]"),
            (lambda o: o.update(kind="other"), "unknown model kind"),
            (lambda o: o["rows"][0].update(weight=0.9), "model"),
        ],
    )
    def test_field_errors(self, tmp_path, mutate, pattern):
        obj = json.loads(json.dumps(DD))
        mutate(obj)
        with pytest.raises(ParseError, match=pattern):
            io.load_model(write(tmp_path, obj))

    def test_parse_error_is_invalid_argument(self):
        assert issubclass(ParseError, InvalidArgument)

    def test_unknown_process(self):
        with pytest.raises(ParseError, match="dgp"):
            io.parse_model({"kind": "linear_projection", "dgp": "sim3"})


class TestCsv:
    def test_format(self):
        assert io.fmt(0.0) == "0" and io.fmt(-0.0) == "0"
        assert io.fmt(1 / 3) == "0.333333333333"
        assert io.fmt(3) == "3" and io.fmt(True) == "1"

    def test_round_trip(self, tmp_path):
        path = tmp_path / "pts.csv"
        pts = np.array([[0.1, -2.5], [1e-5, 3.0]])
        io.write_points(path, pts)
        header, data = io.read_csv(path)
        assert header == ["theta_1", "theta_2"]
        np.testing.assert_allclose(data, pts, rtol=1e-11)

    def test_line_endings(self, tmp_path):
        path = tmp_path / "h.csv"
        io.write_halfspaces(path, [[1.0, 0.0]], [0.5])
        assert path.read_bytes() == b"normal_1,normal_2,offset\n1,0,0.5\n"

    def test_unwritable(self, tmp_path):
        (tmp_path / "file").write_text("x")
        with pytest.raises(InvalidArgument):
            io.write_csv(tmp_path / "file" / "out.csv", ["a"], [[1]])
