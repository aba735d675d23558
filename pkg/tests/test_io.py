import json
import math

import numpy as np

from pqcone._io import dumps, write_json, write_manifest


def test_floats_round_trip_exactly():
    vals = [0.1, 1 / 3, math.pi * 1e-300, 2.0, 1e22]
    back = json.loads(dumps(vals))
    assert back == vals
    assert "2.0" in dumps(2.0) and dumps(np.float64(0.5)).strip() == "0.5"


def test_manifest_lists_everything(tmp_path):
    write_json({"a": 1}, tmp_path / "x.json")
    (tmp_path / "u.csv").write_text("x,u\n")
    write_manifest(tmp_path, {"tool": "t"}, canonical=True)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert sorted(f["path"] for f in man["files"]) == ["u.csv", "x.json"]
    assert "finished" not in man
