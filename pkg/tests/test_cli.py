import json

import pytest

from rcmsim.cli import main
from rcmsim.complex import SimplicialComplex
from rcmsim.config import load_config, preset_names
from rcmsim.errors import ConfigError
from rcmsim.functionals import make_K_p, make_L_p


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _read(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


def test_sample_quickstart_golden(tmp_path, capsys):
    code, out, _ = _run(capsys, "sample", "--config", "quickstart", "--out", tmp_path / "a")
    assert code == 0 and "sampled 53 points" in out
    pts = json.loads((tmp_path / "a" / "points.json").read_text())
    # recorded from the first run; Poisson mean is 2 * 25 = 50
    assert len(pts["points"]) == 53
    _run(capsys, "sample", "--config", "quickstart", "--out", tmp_path / "b")
    assert _read(tmp_path / "a") == _read(tmp_path / "b")


def test_sample_zero_intensity(tmp_path, capsys):
    code, _, _ = _run(capsys, "sample", "--config", "quickstart", "--set", "model.gamma=0", "--out", tmp_path)
    assert code == 0
    assert json.loads((tmp_path / "points.json").read_text())["points"] == []


def test_seed_flag_changes_sample(tmp_path, capsys):
    _run(capsys, "sample", "--config", "quickstart", "--out", tmp_path / "a")
    _run(capsys, "sample", "--config", "quickstart", "--seed", 7, "--out", tmp_path / "b")
    assert _read(tmp_path / "a") != _read(tmp_path / "b")


@pytest.mark.parametrize("preset", ["fig1a", "fig1b"])
def test_build_figure_presets(tmp_path, capsys, preset):
    code, out, _ = _run(capsys, "build", "--config", preset, "--render", "--out", tmp_path)
    assert code == 0 and "f-vector" in out
    cx = SimplicialComplex.from_json(json.loads((tmp_path / "complex.json").read_text()))
    assert cx.is_closed()
    svg = (tmp_path / "complex.svg").read_text()
    assert svg.startswith("<svg") and "<circle" in svg
    if preset == "fig1a":
        assert cx.f(2) > 0 and "<polygon" in svg


def test_build_without_edges_renders_vertices_only(tmp_path, capsys):
    kernel = json.dumps({"name": "constant", "alpha": 2, "params": {"c": 0}})
    code, _, _ = _run(capsys, "build", "--config", "quickstart", "--set", f"model.kernel={kernel}",
                      "--render", "--out", tmp_path)
    assert code == 0
    svg = (tmp_path / "complex.svg").read_text()
    assert "<line" not in svg and "<polygon" not in svg and "<circle" in svg


def test_build_from_points_file_matches_direct(tmp_path, capsys):
    _run(capsys, "sample", "--config", "quickstart", "--out", tmp_path)
    _run(capsys, "build", "--config", "quickstart", "--out", tmp_path / "direct")
    _run(capsys, "build", "--config", "quickstart", "--input", tmp_path / "points.json", "--out", tmp_path / "file")
    assert _read(tmp_path / "direct") == _read(tmp_path / "file")


def test_functional_on_witness_files(tmp_path, capsys):
    (tmp_path / "k1.json").write_text(json.dumps(make_K_p(1).to_json()))
    (tmp_path / "l1.json").write_text(json.dumps(make_L_p(1).to_json()))
    (tmp_path / "empty.json").write_text(json.dumps(SimplicialComplex.empty().to_json()))
    code, out, _ = _run(capsys, "functional", "euler", "vertices", "--input", tmp_path / "k1.json")
    assert code == 0 and out.splitlines()[:2] == ["euler\t0", "vertices\t3"]
    _, out, _ = _run(capsys, "functional", "betti:1", "--input", tmp_path / "l1.json")
    assert out.splitlines()[0] == "betti:1\t1"
    _, out, _ = _run(capsys, "functional", "betti:0", "--input", tmp_path / "empty.json")
    assert out.splitlines()[0] == "betti:0\t0"
    code, _, err = _run(capsys, "functional", "bogus:3", "--input", tmp_path / "k1.json")
    assert code == 2 and "bogus" in err


@pytest.mark.parametrize("preset,betti", [("ring6", ["beta_0 1", "beta_1 1"]), ("fig2-like", ["beta_0 6", "beta_1 3"])])
def test_nerve_presets(tmp_path, capsys, preset, betti):
    code, out, _ = _run(capsys, "nerve", "--config", preset, "--render", "--out", tmp_path)
    assert code == 0
    lines = out.splitlines()
    assert all(b in lines for b in betti)
    assert (tmp_path / "nerve.svg").exists() and (tmp_path / "nerve.json").exists()


def test_nerve_single_disk(tmp_path, capsys):
    (tmp_path / "one.json").write_text(json.dumps({"grains": [{"center": [0, 0], "ball": {"r": 1}}]}))
    code, out, _ = _run(capsys, "nerve", "--config", "ring6", "--input", tmp_path / "one.json", "--out", tmp_path)
    assert code == 0 and "f-vector [1]" in out


def test_experiment_clt_small_and_deterministic(tmp_path, capsys):
    args = ["experiment", "--config", "clt-beta0", "--set", "experiment.replications=20",
            "--set", "experiment.sides=[4,6,8]"]
    code, out, _ = _run(capsys, *args, "--out", tmp_path / "a")
    assert code == 0 and "Var/|W| change" in out
    _run(capsys, *args, "--threads", 2, "--out", tmp_path / "b")
    assert _read(tmp_path / "a") == _read(tmp_path / "b")
    rows = (tmp_path / "a" / "summary.csv").read_text().splitlines()[1:]
    sides = [float(r.split(",")[0]) for r in rows]
    assert sides == sorted(sides)


def test_experiment_degenerate_functional(tmp_path, capsys):
    code, out, _ = _run(capsys, "experiment", "--config", "clt-beta0", "--set", "experiment.replications=20",
                        "--set", "experiment.sides=[4]", "--set", 'experiment.functionals=["constant:value=1"]',
                        "--out", tmp_path)
    assert code == 0 and "degenerate" in out
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["summary"][0]["degenerate"] is True


@pytest.mark.parametrize("kind,extra,outfile", [
    ("degree", ["--set", "experiment.replications=50"], "degree.json"),
    ("poincare", ["--set", "experiment.replications=30", "--set", "experiment.inner_replications=30",
                  "--set", "experiment.side=4"], "poincare.json"),
    ("stabilization", ["--set", "experiment.replications=10", "--set", "experiment.sides=[3,5]"],
     "stabilization.json"),
    ("covariance", ["--set", "experiment.replications=20", "--set", "experiment.sides=[3,5]"],
     "covariance_report.json"),
])
def test_experiment_kinds(tmp_path, capsys, kind, extra, outfile):
    preset = {"degree": "degree-geometric", "poincare": "poincare", "stabilization": "stabilization",
              "covariance": "covariance"}[kind]
    code, _, err = _run(capsys, "experiment", "--config", preset, *extra, "--out", tmp_path)
    assert code == 0, err
    assert json.loads((tmp_path / outfile).read_text())


def test_unknown_key_is_named_and_nothing_written(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema": 1, "model": {"dim": 2, "gamma": 1, "kernal": {}},
                               "window": {"side": 2}}))
    out = tmp_path / "out"
    code, _, err = _run(capsys, "sample", "--config", bad, "--out", out)
    assert code == 2 and "model.kernal" in err
    assert not out.exists()


def test_malformed_json_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": 1,\n "model": {"dim": 2,,}}')
    code, _, err = _run(capsys, "sample", "--config", bad, "--out", tmp_path / "out")
    assert code == 2 and "bad.json:2:" in err
    assert not (tmp_path / "out").exists()


def test_failed_experiment_writes_nothing(tmp_path, capsys):
    code, _, _ = _run(capsys, "experiment", "--config", "clt-beta0", "--set", "experiment.sides=[8,4]",
                      "--out", tmp_path / "out")
    assert code == 2 and not (tmp_path / "out").exists()


def test_overrides_and_presets():
    names = preset_names()
    for name in ["quickstart", "fig1a", "fig1b", "clt-beta0", "covariance", "degree-geometric",
                 "degree-mixedpoisson", "poincare", "stabilization", "ring6", "fig2-like"]:
        assert name in names
        load_config(name)
    cfg, _ = load_config("quickstart", ["model.gamma=3.5", "window.side=2"], seed=11)
    assert cfg["model"]["gamma"] == 3.5 and cfg["window"]["side"] == 2 and cfg["master_seed"] == 11
    with pytest.raises(ConfigError):
        load_config("quickstart", ["model.nope=1"])
    with pytest.raises(ConfigError):
        load_config("no-such-preset")


def test_render_points_file_and_rejects_complex_file(tmp_path, capsys):
    _run(capsys, "sample", "--config", "quickstart", "--out", tmp_path)
    _run(capsys, "build", "--config", "quickstart", "--out", tmp_path / "c")
    code, _, _ = _run(capsys, "render", "--config", "quickstart", "--input", tmp_path / "points.json",
                      "--out", tmp_path / "r")
    assert code == 0 and (tmp_path / "r" / "complex.svg").read_text().startswith("<svg")
    code, _, err = _run(capsys, "render", "--config", "quickstart", "--input", tmp_path / "c" / "complex.json",
                        "--out", tmp_path / "bad")
    assert code == 2 and "not a point configuration" in err and not (tmp_path / "bad").exists()
