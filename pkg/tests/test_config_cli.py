import json
import math
import time

import numpy as np
import pytest

from coverembed.cli import main
from coverembed.config import config_hash, effective, parse_config
from coverembed.errors import ConfigError
from coverembed.pipeline import build_pipeline, run_suite

MINIMAL = {"n": 2, "metric": "identity", "oracle": "clifford", "group": "torus-2"}


def write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_minimal_defaults():
    cfg = parse_config(json.dumps(MINIMAL))
    assert cfg.split.fraction == 0.5
    assert (cfg.spiral.r_in, cfg.spiral.r_out, cfg.spiral.k) == (1.0, 2.0, 1.0)
    assert cfg.verify.seed == 0
    assert cfg.metric.family == "identity" and cfg.oracle.name == "clifford"


def test_group_defaults_to_lattice():
    cfg = parse_config({"n": 3, "metric": "identity", "oracle": "clifford"})
    assert cfg.group.name == "torus-3"


@pytest.mark.parametrize(
    "data, needle",
    [
        ({"n": 3, "metric": "identity", "oracle": "warped"}, "oracle.name"),
        ({"n": 2, "metric": {"family": "revolution", "R": 1, "rho": 1}, "oracle": "warped"}, "metric"),
        ({"n": 2, "metric": "identity", "oracle": "clifford", "colour": 1}, "colour"),
        ({"n": 2, "metric": "identity", "oracle": "clifford", "spiral": {"k": 5}}, "speed budget"),
        ({"n": 2, "metric": "identity", "oracle": "clifford", "group": "torus-3"}, "group.name"),
        ({"n": 2, "metric": {"family": "expression", "entries": ["1", "0", "sin(x3)"]},
          "oracle": "clifford"}, "metric.entries[2]"),
        ({"n": 2, "metric": {"family": "conformal", "f": "sin(x1"}, "oracle": "warped"}, "position"),
    ],
)
def test_rejections_name_the_field(data, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(data)
    assert needle in str(exc.value)


def test_invalid_json():
    with pytest.raises(ConfigError, match="not valid JSON"):
        parse_config("{n: 2")


def test_effective_round_trip():
    cfg = parse_config({"n": 2, "metric": {"family": "revolution"}, "oracle": "warped",
                        "group": {"generators": [{"A": [[1, 0], [0, 1]], "v": [1, 0]}]}})
    again = parse_config(json.loads(json.dumps(effective(cfg))))
    assert again == cfg
    assert config_hash(again) == config_hash(cfg)


def test_report_echo_round_trip():
    rep = run_suite(build_pipeline(parse_config(MINIMAL)))
    echoed = json.loads(rep.to_json())["config"]
    assert parse_config(echoed) == parse_config(MINIMAL)


def test_generator_group_pipeline():
    a = repr(0.5**0.5 / (4 * math.pi))
    b = repr(0.5**0.5 / (2 * math.pi))
    comps = [f"{a}*cos(4*pi*x1)", f"{a}*sin(4*pi*x1)", f"{b}*cos(2*pi*x2)", f"{b}*sin(2*pi*x2)"]
    cfg = parse_config({
        "n": 2, "metric": "identity",
        "oracle": {"name": "expression", "components": comps},
        "group": {"generators": [{"A": [[1, 0], [0, 1]], "v": [1, 0]},
                                 {"A": [[1, 0], [0, 1]], "v": [0, 1]},
                                 {"A": [[1, 0], [0, 1]], "v": ["1/2", 0]}]},
        "verify": {"samples": 300, "bound_samples": 2000, "injectivity_pairs": 2000},
    })
    rep = run_suite(build_pipeline(cfg))
    assert rep.passed, rep.summary_lines()
    assert rep["F.holonomy_equivariance"].residual < 1e-9
    assert rep.notes["extension_refused"] == []


def test_glide_refusal_is_reported():
    cfg = parse_config({"n": 2, "metric": "identity", "oracle": "clifford", "group": "pg",
                        "verify": {"samples": 200, "bound_samples": 2000, "injectivity_pairs": 2000}})
    rep = run_suite(build_pipeline(cfg))
    assert rep.passed
    [refused] = rep.notes["extension_refused"]
    assert refused["element"] == {"A": [[1, 0], [0, -1]], "v": ["1/2", 0]}
    assert "extension unavailable" in refused["reason"]


def test_cli_split(capsys):
    assert main(["split"]) == 0
    out = capsys.readouterr().out
    assert "c = 0.5\n" in out and "margin = 0.5\n" in out


def test_cli_embed_dimension(capsys):
    assert main(["embed", "--map", "E"]) == 0
    assert "D = 8\n" in capsys.readouterr().out
    assert main(["embed", "--map", "F"]) == 0
    out = capsys.readouterr().out
    assert "D = 6\n" in out and "bound = unbounded" in out


def test_cli_verify_default(tmp_path, capsys):
    out = tmp_path / "report.json"
    t0 = time.perf_counter()
    assert main(["verify", "--out", str(out)]) == 0
    assert time.perf_counter() - t0 < 10
    rep = json.loads(out.read_text())
    assert rep["passed"] and all(c["passed"] for c in rep["checks"])


def test_cli_verify_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "--seed", "7", "--samples", "200", "--out", str(a)]) == 0
    assert main(["verify", "--seed", "7", "--samples", "200", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["config"]["verify"]["seed"] == 7 and rep["config"]["verify"]["samples"] == 200


def test_cli_verify_failure_exit(tmp_path):
    cfg = write(tmp_path, {"n": 2, "metric": "identity", "oracle": "clifford",
                           "verify": {"fd_tol": 1e-30}})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "r.json")]) == 1


def test_cli_errors_exit_nonzero(tmp_path, capsys):
    bad = write(tmp_path, {"n": 2, "metric": {"family": "revolution"}, "oracle": "revolution"})
    assert main(["verify", "--config", bad]) == 2
    assert "not isometric" in capsys.readouterr().err
    assert main(["split", "--config", str(tmp_path / "missing.json")]) == 2


def test_cli_obj_export(tmp_path):
    out = tmp_path / "m.obj"
    assert main(["export", "--format", "obj", "--map", "F", "--window", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("#")
    assert any(config_hash(parse_config(MINIMAL)) in l for l in lines if l.startswith("#"))
    v = [l for l in lines if l.startswith("v ")]
    f = [l for l in lines if l.startswith("f ")]
    assert len(v) == 128 * 128 and len(f) == 127 * 127
    assert all(len(l.split()) == 4 for l in v) and all(len(l.split()) == 5 for l in f)
    first_f = next(i for i, l in enumerate(lines) if l.startswith("f "))
    assert not any(l.startswith("v ") for l in lines[first_f:])
    idx = np.array([l.split()[1:] for l in f], dtype=int)
    assert idx.min() == 1 and idx.max() == 128 * 128


def test_cli_csv_export_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["export", "--format", "csv", "--samples", "50", "--out", str(a)]) == 0
    assert main(["export", "--format", "csv", "--samples", "50", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "x1,x2," + ",".join(f"y{k}" for k in range(1, 9))
    assert len(lines) == 51
    row = np.array(lines[1].split(","), dtype=float)
    p = build_pipeline(parse_config(MINIMAL))
    assert np.array_equal(p.E(row[:2]), row[2:])


def test_obj_export_needs_two_dimensions(tmp_path, capsys):
    cfg = write(tmp_path, {"n": 1, "metric": "identity", "oracle": "clifford"})
    assert main(["export", "--config", cfg, "--format", "obj"]) == 2
