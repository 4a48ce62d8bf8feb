"""Tests for meso_dbm.datafiles."""

import json
import math

import numpy as np

from meso_dbm.datafiles import dumps, format_cell, read_csv, to_jsonable, write_csv, write_json


class TestCsv:
    def test_format_cell(self):
        assert format_cell(0.1) == "0.10000000000000001"
        assert format_cell(np.float64(2.0)) == "2"
        assert format_cell(np.int64(7)) == "7"
        assert format_cell(True) == "true"
        assert format_cell(None) == ""
        assert format_cell(float("nan")) == "nan"
        assert format_cell("deterministic_gue") == "deterministic_gue"

    def test_doubles_survive(self, tmp_path):
        values = [math.pi, 1e-300, -2.5e17]
        path = write_csv(tmp_path / "out" / "v.csv", ["v"], [{"v": v} for v in values])
        assert path.read_bytes().startswith(b"v\r\n")
        rows = read_csv(path)
        assert [float(r["v"]) for r in rows] == values

    def test_missing_column_is_empty(self, tmp_path):
        path = write_csv(tmp_path / "m.csv", ["a", "b"], [{"a": 1}])
        assert path.read_text().splitlines()[1] == "1,"


class TestJson:
    def test_to_jsonable(self):
        out = to_jsonable({"a": np.array([1.0, np.inf]), "b": 1 + 2j, 3: (np.bool_(True),)})
        assert out == {"a": [1.0, None], "b": [1.0, 2.0], "3": [True]}

    def test_dumps_stable(self, tmp_path):
        payload = {"z": 1, "a": [0.5, float("nan")]}
        assert dumps(payload) == dumps(dict(reversed(list(payload.items()))))
        path = write_json(tmp_path / "p.json", payload)
        assert json.loads(path.read_text()) == {"a": [0.5, None], "z": 1}
