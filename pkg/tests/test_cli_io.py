import json

import numpy as np
import pytest
from click.testing import CliRunner

from ftvgs import io
from ftvgs.cli import cli
from ftvgs.lssp import LsspConfig
from ftvgs.sampling import subset_random_sample


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args, env=None):
    return runner.invoke(cli, [str(a) for a in args], env=env, catch_exceptions=False)


# --- formats -----------------------------------------------------------------

def test_matrix_csv_round_trip_is_lossless(tmp_path, rng):
    x = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-20, 20, (4, 3))
    path = tmp_path / "m.csv"
    io.write_matrix_csv(path, x)
    assert np.array_equal(io.read_matrix_csv(path), x)
    first = path.read_text().splitlines()[0].split(",")[0]
    assert first == repr(float(x[0, 0]))


def test_matrix_csv_header_and_errors(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("a,b\n1,2\n3,4\n")
    np.testing.assert_array_equal(io.read_matrix_csv(path, skip_header=True), [[1, 2], [3, 4]])
    with pytest.raises(io.FormatError, match="h.csv"):
        io.read_matrix_csv(path)
    path.write_text("1,2\n3\n")
    with pytest.raises(io.FormatError):
        io.read_matrix_csv(path)
    path.write_text("")
    with pytest.raises(io.FormatError):
        io.read_matrix_csv(path)


def test_edges_csv(tmp_path):
    path = tmp_path / "e.csv"
    io.write_edges_csv(path, [(0, 1), (2, 1)])
    assert path.read_text() == "0,1\n2,1\n"
    assert io.read_edges_csv(path) == [(0, 1), (2, 1)]
    path.write_text("0,1,2\n")
    with pytest.raises(io.FormatError):
        io.read_edges_csv(path)


def test_sample_set_json_round_trip(tmp_path, rng):
    x = rng.standard_normal((9, 7))
    s = subset_random_sample(x, 0.7, 0.6, seed=4)
    path = tmp_path / "s.json"
    io.write_sample_set(path, s)
    data = json.loads(path.read_text())
    assert set(data) >= {"n", "t", "rows", "cols", "entries", "alpha_rc", "alpha_sub", "seed",
                         "mode"}
    assert data["entries"][0] == [int(s.entries[0, 0]), int(s.entries[0, 1]), float(s.values[0])]
    back = io.read_sample_set(path)
    for field in ("rows", "cols", "entries", "values"):
        assert np.array_equal(getattr(back, field), getattr(s, field))
    assert (back.n, back.t, back.seed, back.mode) == (9, 7, 4, "without")


def test_sample_set_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 2}')
    with pytest.raises(io.FormatError):
        io.read_sample_set(path)
    path.write_text(json.dumps({"n": 2, "t": 2, "rows": [0], "cols": [0],
                                "entries": [[5, 0, 1.0]], "alpha_rc": 1, "alpha_sub": 1}))
    with pytest.raises(io.FormatError):
        io.read_sample_set(path)


def test_config_json_mirrors_fields(tmp_path):
    path = tmp_path / "c.json"
    io.write_json(path, LsspConfig(gamma_d=0.5).to_dict())
    assert LsspConfig.from_dict(io.read_json(path)).gamma_d == 0.5


# --- synth -----------------------------------------------------------------------

def test_synth_default(runner, tmp_path):
    out = tmp_path / "x.csv"
    res = invoke(runner, "synth", "--seed", 7, "--out", out)
    assert res.exit_code == 0
    assert len(out.read_text().splitlines()) == 128
    assert io.read_matrix_csv(out).shape == (128, 128)
    assert io.read_matrix_csv(tmp_path / "x.fj.csv").shape == (128, 128)
    assert io.read_edges_csv(tmp_path / "x.edges.csv")
    manifest = json.loads((tmp_path / "x.csv.manifest.json").read_text())
    assert manifest["command"] == "synth" and manifest["seeds"] == [7]
    assert manifest["flags"]["bandwidth_max"] == 88 and "duration_s" in manifest
    assert manifest["version"]


def test_synth_same_seed_identical(runner, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    invoke(runner, "synth", "--n", 16, "--t", 16, "--num-nonzero-rows", 4, "--bandwidth-min", 2,
           "--bandwidth-max", 5, "--seed", 3, "--out", a)
    invoke(runner, "synth", "--n", 16, "--t", 16, "--num-nonzero-rows", 4, "--bandwidth-min", 2,
           "--bandwidth-max", 5, "--seed", 3, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.fj.csv").read_bytes() == (tmp_path / "b.fj.csv").read_bytes()


def test_synth_bad_bandwidth_is_usage_error(runner, tmp_path):
    res = runner.invoke(cli, ["synth", "--bandwidth-min", "50", "--bandwidth-max", "40",
                              "--out", str(tmp_path / "x.csv")])
    assert res.exit_code == 2


def test_seed_env_fallback(runner, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["synth", "--n", 12, "--t", 12, "--num-nonzero-rows", 3, "--bandwidth-min", 2,
            "--bandwidth-max", 4]
    invoke(runner, *args, "--out", a, env={"FTVGS_SEED": "11"})
    invoke(runner, *args, "--seed", 11, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    assert json.loads((tmp_path / "a.csv.manifest.json").read_text())["seeds"] == [11]


# --- sample ---------------------------------------------------------------------------

def test_sample_metr_la_shape(runner, tmp_path):
    inp = tmp_path / "m.csv"
    io.write_matrix_csv(inp, np.ones((207, 512)))
    out = tmp_path / "s.json"
    res = invoke(runner, "sample", "--input", inp, "--alpha-rc", 0.7, "--alpha-sub", 0.7,
                 "--seed", 0, "--out", out)
    assert res.exit_code == 0 and "alpha_total=0.3429" in res.output
    data = json.loads(out.read_text())
    assert round(data["alpha_total"], 4) == 0.3429 and len(data["entries"]) == 36337
    assert (tmp_path / "s.json.manifest.json").exists()


def test_sample_full(runner, tmp_path):
    inp = tmp_path / "m.csv"
    io.write_matrix_csv(inp, np.arange(12.0).reshape(3, 4))
    out = tmp_path / "s.json"
    invoke(runner, "sample", "--input", inp, "--alpha-rc", 1, "--alpha-sub", 1, "--out", out)
    assert len(json.loads(out.read_text())["entries"]) == 12


def test_sample_skip_header(runner, tmp_path):
    inp = tmp_path / "m.csv"
    inp.write_text("v0,v1\n1,2\n3,4\n")
    out = tmp_path / "s.json"
    res = invoke(runner, "sample", "--input", inp, "--skip-header", "--alpha-rc", 1,
                 "--alpha-sub", 1, "--out", out)
    assert res.exit_code == 0
    assert json.loads(out.read_text())["n"] == 2


def test_sample_errors(runner, tmp_path):
    res = runner.invoke(cli, ["sample", "--input", str(tmp_path / "missing.csv"), "--alpha-rc",
                              "0.5", "--alpha-sub", "0.5", "--out", str(tmp_path / "s.json")])
    assert res.exit_code == 1 and "missing.csv" in res.output
    inp = tmp_path / "m.csv"
    io.write_matrix_csv(inp, np.ones((4, 4)))
    res = runner.invoke(cli, ["sample", "--input", str(inp), "--alpha-rc", "1.5",
                              "--alpha-sub", "0.5", "--out", str(tmp_path / "s.json")])
    assert res.exit_code == 2
    res = runner.invoke(cli, ["sample", "--input", str(inp), "--alpha-rc", "0.5",
                              "--alpha-sub", "0.5", "--out", str(tmp_path / "nodir" / "s.json")])
    assert res.exit_code == 1 and "nodir" in res.output


# --- reconstruct ------------------------------------------------------------------------

@pytest.fixture
def small_files(runner, tmp_path):
    x = tmp_path / "x.csv"
    invoke(runner, "synth", "--n", 24, "--t", 24, "--num-nonzero-rows", 6, "--bandwidth-min", 3,
           "--bandwidth-max", 8, "--seed", 5, "--out", x)
    return x, tmp_path / "x.edges.csv"


def test_reconstruct_lssp_full_observation(runner, tmp_path, small_files):
    x, edges = small_files
    s = tmp_path / "s.json"
    invoke(runner, "sample", "--input", x, "--alpha-rc", 1, "--alpha-sub", 1, "--out", s)
    out, diag = tmp_path / "xh.csv", tmp_path / "d.csv"
    res = invoke(runner, "reconstruct", "--samples", s, "--graph", edges, "--method", "lssp",
                 "--out", out, "--diagnostics", diag, "--truth", x)
    assert res.exit_code == 0
    value = float(res.output.strip().split("nrmse=")[1])
    assert value < 0.05
    lines = diag.read_text().splitlines()
    header = [l for l in lines if not l.startswith("#")][0]
    assert header.split(",") == list(io.DIAGNOSTIC_COLUMNS)
    assert len([l for l in lines if not l.startswith("#")]) == 1 + 5 * 50


def test_reconstruct_with_config(runner, tmp_path, small_files):
    x, edges = small_files
    s, cfg = tmp_path / "s.json", tmp_path / "c.json"
    invoke(runner, "sample", "--input", x, "--alpha-rc", 0.9, "--alpha-sub", 0.9, "--out", s)
    io.write_json(cfg, {"outer_iters": 1, "middle_iters": 3})
    diag = tmp_path / "d.csv"
    invoke(runner, "reconstruct", "--samples", s, "--graph", edges, "--config", cfg,
           "--out", tmp_path / "xh.csv", "--diagnostics", diag)
    assert len([l for l in diag.read_text().splitlines() if not l.startswith("#")]) == 4
    io.write_json(cfg, {"rho": 0.01})
    res = runner.invoke(cli, ["reconstruct", "--samples", str(s), "--graph", str(edges),
                              "--config", str(cfg), "--out", str(tmp_path / "xh.csv")])
    assert res.exit_code == 2


def test_reconstruct_svt_flags_structural_missing(runner, tmp_path, small_files):
    x, _ = small_files
    s = tmp_path / "s.json"
    invoke(runner, "sample", "--input", x, "--alpha-rc", 0.8, "--alpha-sub", 0.9, "--out", s)
    diag = tmp_path / "d.csv"
    res = invoke(runner, "reconstruct", "--samples", s, "--method", "svt",
                 "--out", tmp_path / "xs.csv", "--diagnostics", diag)
    assert res.exit_code == 0
    assert "structural-missing detected" in res.output
    assert "# structural-missing detected" in diag.read_text().splitlines()


def test_reconstruct_usage_errors(runner, tmp_path, small_files):
    x, edges = small_files
    s = tmp_path / "s.json"
    invoke(runner, "sample", "--input", x, "--alpha-rc", 1, "--alpha-sub", 1, "--out", s)
    res = runner.invoke(cli, ["reconstruct", "--samples", str(s), "--method", "magic",
                              "--out", str(tmp_path / "o.csv")])
    assert res.exit_code == 2
    res = runner.invoke(cli, ["reconstruct", "--samples", str(s), "--method", "lssp",
                              "--out", str(tmp_path / "o.csv")])
    assert res.exit_code == 2
    res = runner.invoke(cli, ["reconstruct", "--samples", str(tmp_path / "nope.json"),
                              "--method", "svt", "--out", str(tmp_path / "o.csv")])
    assert res.exit_code == 1 and "nope.json" in res.output


# --- bounds / verify ----------------------------------------------------------------------

def test_bounds_params(runner, tmp_path):
    out = tmp_path / "b.json"
    res = invoke(runner, "bounds", "--params", "2,1,1,1", "--n-rows", 128, "--n-cols", 128,
                 "--delta", 0.1, "--epsilon", 0.5, "--out", out)
    assert res.exit_code == 0
    report = json.loads(out.read_text())
    assert report["min_rows"] == 89
    assert report["feasible"] is False
    assert report["min_samples"] > report["size_i"] * report["size_j"]
    assert (tmp_path / "b.json.manifest.json").exists()


def test_bounds_theorem_example_stdout(runner):
    res = invoke(runner, "bounds", "--params", "1,1,1,1", "--n-rows", 100, "--n-cols", 100,
                 "--size-i", 50, "--size-j", 50, "--eta", 0)
    report = json.loads(res.output)
    assert report["min_samples"] == 164232 and report["feasible"] is False


def test_bounds_from_input(runner, tmp_path, small_files):
    x, _ = small_files
    res = invoke(runner, "bounds", "--input", x, "--size-i", 20, "--size-j", 20)
    report = json.loads(res.output)
    assert report["rank"] <= 6 and report["mu1"] >= 1


def test_bounds_usage_errors(runner):
    assert runner.invoke(cli, ["bounds", "--params", "2,1,1,1", "--n-rows", "10", "--n-cols",
                               "10", "--eta", "1"]).exit_code == 2
    assert runner.invoke(cli, ["bounds"]).exit_code == 2
    assert runner.invoke(cli, ["bounds", "--params", "2,1,1"]).exit_code == 2
    assert runner.invoke(cli, ["bounds", "--params", "2,1,1,1"]).exit_code == 2


def test_verify(runner, tmp_path, small_files):
    x, _ = small_files
    out = tmp_path / "v.json"
    res = invoke(runner, "verify", "--input", x, "--size-i", 24, "--trials", 5, "--out", out)
    assert res.exit_code == 0
    assert json.loads(out.read_text())["rank_preservation"] == 1.0
    res = invoke(runner, "verify", "--input", x, "--size-i", 12, "--size-j", 12, "--trials", 5)
    payload = json.loads(res.output)
    assert 0 <= payload["fraction_within"] <= 1
    assert runner.invoke(cli, ["verify", "--input", str(x), "--size-i", "99"]).exit_code == 2


# --- sweep --------------------------------------------------------------------------------

def test_sweep_csv(runner, tmp_path, small_files):
    x, edges = small_files
    out = tmp_path / "sw.csv"
    args = ["sweep", "--input", x, "--graph", edges, "--ratios", "0.6,0.7,0.8,0.9",
            "--seeds", "0-1", "--methods", "lssp,svt"]
    res = invoke(runner, *args, "--out", out)
    assert res.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method,alpha_rc,alpha_sub,alpha_total,seed_count,mean_nrmse,std_nrmse"
    assert len(lines) == 1 + 8
    assert sum(l.startswith("lssp,") for l in lines) == 4
    first = out.read_bytes()
    invoke(runner, *args, "--jobs", 2, "--out", out)
    assert out.read_bytes() == first


def test_sweep_usage_errors(runner, tmp_path, small_files):
    x, edges = small_files
    out = str(tmp_path / "sw.csv")
    assert runner.invoke(cli, ["sweep", "--input", str(x), "--methods", "svt", "--ratios", "0",
                               "--out", out]).exit_code == 2
    assert runner.invoke(cli, ["sweep", "--input", str(x), "--methods", "foo",
                               "--out", out]).exit_code == 2
    assert runner.invoke(cli, ["sweep", "--input", str(x), "--methods", "lssp",
                               "--out", out]).exit_code == 2
    assert runner.invoke(cli, ["sweep", "--input", str(x), "--methods", "svt", "--seeds", "a",
                               "--out", out]).exit_code == 2
