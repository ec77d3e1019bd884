import math

import numpy as np
import pytest

from rcmsim.errors import RejectedInputError, ReplicationError
from rcmsim.experiments import (
    ExperimentConfig,
    Model,
    degree_distribution_experiment,
    ks_normality_test,
    mixing_parameter,
    poincare_check,
    relative_change,
    run_clt_experiment,
    run_covariance_experiment,
    stabilization_probe,
    variance_stderr,
)
from rcmsim.grains import Grain
from rcmsim.kernels import constant, exponential, geometric, grain_intersection
from rcmsim.pointprocess import MarkSampler

GEOM = Model(2, 1.0, geometric(1.0))


def test_ks_golden_and_power():
    r = ks_normality_test(np.random.default_rng(20240101).standard_normal(10_000))
    # recorded from the first run of this seed
    assert r.statistic == pytest.approx(0.005066836005419129, rel=1e-12)
    assert r.pvalue == pytest.approx(0.9595085751355854, rel=1e-9)
    assert ks_normality_test(np.random.default_rng(1).exponential(size=10_000)).pvalue < 0.001
    assert ks_normality_test(np.ones(50)).degenerate
    with pytest.raises(RejectedInputError):
        ks_normality_test(np.arange(5.0))


def test_mixing_parameter_examples():
    assert mixing_parameter(geometric(0.5), 1.0, 2).value == pytest.approx(math.pi / 4)
    assert mixing_parameter(constant(0.0), 1.0, 2).value == 0.0
    disks = MarkSampler("fixed-ball", {"radius": 0.5})
    assert mixing_parameter(grain_intersection(1), 1.0, 2, disks, Grain.ball(0.5)).value == pytest.approx(math.pi)
    # E[(0.3 + R)^2] pi with R ~ U(0.2, 0.6)
    radii = MarkSampler("uniform-radius", {"low": 0.2, "high": 0.6})
    expected = math.pi * ((0.9**3 - 0.5**3) / (3 * 0.4))
    assert mixing_parameter(grain_intersection(1), 1.0, 2, radii, Grain.ball(0.3)).value == pytest.approx(expected)
    assert mixing_parameter(exponential(4.0, 0.1), 2.0, 2).value == pytest.approx(2 * 2 * math.pi / 16)


def test_mixing_monte_carlo_agrees_with_closed_form():
    radii = MarkSampler("uniform-radius", {"low": 0.2, "high": 0.6})
    k = grain_intersection(1)
    exact = mixing_parameter(k, 1.0, 2, radii, Grain.ball(0.3)).value
    # a categorical law forces the Monte-Carlo branch
    cat = MarkSampler("categorical", {"values": [{"ball": {"r": 0.2}}, {"ball": {"r": 0.6}}], "probs": [0.5, 0.5]})
    est = mixing_parameter(k, 1.0, 2, cat, Grain.ball(0.3), mc_samples=40_000, seed=3)
    target = math.pi * (0.5**2 + 0.9**2) / 2
    assert est.method == "monte-carlo"
    assert abs(est.value - target) <= 4 * est.stderr
    assert exact != target


def test_degree_degenerate_cases():
    r = degree_distribution_experiment(Model(2, 0.0, geometric(0.5)), 50, 20.0)
    assert r.passed and r.test == "degenerate" and set(r.degrees.tolist()) == {0}
    r = degree_distribution_experiment(Model(2, 1.0, constant(0.0)), 50, 10.0)
    assert r.passed and set(r.degrees.tolist()) == {0}


def test_degree_poisson_law_small():
    r = degree_distribution_experiment(Model(2, 1.0, geometric(0.5)), 2000, 20.0, master_seed=5)
    assert r.test == "chi-square" and r.pi == pytest.approx(math.pi / 4)
    assert r.degrees.mean() == pytest.approx(math.pi / 4, abs=4 * math.sqrt(math.pi / 4 / 2000))
    assert not r.warnings
    short = degree_distribution_experiment(Model(2, 1.0, geometric(0.5)), 20, 2.0)
    assert short.warnings


def test_experiment_config_validation():
    with pytest.raises(RejectedInputError):
        ExperimentConfig(GEOM, ["vertices"], [8, 4], 10)
    with pytest.raises(RejectedInputError):
        ExperimentConfig(GEOM, ["vertices"], [4, 8], 1)
    with pytest.raises(RejectedInputError):
        ExperimentConfig(GEOM, [], [4], 10)
    with pytest.raises(RejectedInputError):
        ExperimentConfig(GEOM, ["nonsense"], [4], 10)


def test_constant_functional_is_degenerate():
    rep = run_clt_experiment(ExperimentConfig(GEOM, ["constant:value=3", "vertices"], [4, 6], 30))
    s = rep.stat(6, "constant:value=3")
    assert s.degenerate and s.var == 0.0 and s.ks.degenerate
    assert not rep.stat(6, "vertices").degenerate
    assert rep.standardized(6, "constant:value=3").tolist() == [0.0] * 30


def test_vertex_count_variance_is_intensity():
    gamma = 1.5
    model = Model(2, gamma, geometric(1.0))
    rep = run_clt_experiment(ExperimentConfig(model, ["vertices"], [3, 5, 7], 400, master_seed=9))
    for side in (3, 5, 7):
        s = rep.stat(side, "vertices")
        assert s.var_over_volume == pytest.approx(s.var / side**2, rel=1e-15)
        assert abs(s.var_over_volume - gamma) <= 3 * s.var_over_volume_se
        z = rep.standardized(side, "vertices")
        assert abs(z.mean()) < 1e-12 and abs(z.var(ddof=1) - 1) < 1e-12


def test_edge_count_mean_under_constant_kernel():
    c, side = 0.4, 3.0
    model = Model(2, 1.0, constant(c))
    rep = run_clt_experiment(ExperimentConfig(model, ["f:1"], [side], 600, master_seed=4))
    x = rep.values[0, 0]
    expected = c * (side**2) ** 2 / 2
    assert abs(x.mean() - expected) <= 3 * x.std(ddof=1) / math.sqrt(len(x))


def test_nested_and_independent_designs():
    nested = run_clt_experiment(ExperimentConfig(GEOM, ["vertices"], [2, 4], 40, master_seed=1))
    indep = run_clt_experiment(ExperimentConfig(GEOM, ["vertices"], [2, 4], 40, master_seed=1, nested=False))
    # nested windows share points, so counts are ordered replication-wise
    assert np.all(nested.values[0, 0] <= nested.values[1, 0])
    assert not np.array_equal(nested.values, indep.values)


def test_outputs_are_deterministic():
    cfg = lambda: ExperimentConfig(GEOM, ["betti:0", "euler"], [3, 5], 25, master_seed=77)
    a, b = run_clt_experiment(cfg()), run_clt_experiment(cfg())
    assert a.files() == b.files()
    assert a.values_csv().splitlines()[0] == "side,rep,functional,value"
    assert len(a.values_csv().splitlines()) == 1 + 2 * 25 * 2
    threaded = run_clt_experiment(ExperimentConfig(GEOM, ["betti:0", "euler"], [3, 5], 25, master_seed=77,
                                                   threads=3))
    assert threaded.values_csv() == a.values_csv()


def test_write_files(tmp_path):
    rep = run_clt_experiment(ExperimentConfig(GEOM, ["vertices"], [3], 20))
    paths = rep.write(tmp_path)
    names = sorted(p.name for p in paths)
    assert {"values.csv", "summary.csv", "covariance.json", "report.json"} <= set(names)
    assert not list(tmp_path.glob("*.tmp"))


def test_covariance_duplicated_and_independent():
    cov = run_covariance_experiment(ExperimentConfig(GEOM, ["vertices", "vertices"], [3, 5], 60))
    m = cov.experiment.covariance[-1]
    assert m[0, 1] == pytest.approx(m[0, 0]) and m[1, 1] == pytest.approx(m[0, 0])
    assert all(cov.psd)
    cov = run_covariance_experiment(ExperimentConfig(GEOM, ["vertices", "constant:value=1"], [3, 5], 60))
    m = cov.experiment.covariance[-1]
    assert m[0, 1] == 0.0 and m[1, 1] == 0.0 and all(cov.psd)
    with pytest.raises(RejectedInputError):
        run_covariance_experiment(ExperimentConfig(GEOM, ["vertices"], [3, 5], 60))


def test_poincare_examples():
    r = poincare_check(GEOM, "vertices", 4.0, 400, 50, master_seed=2)
    assert r.rhs == pytest.approx(16.0) and r.rhs_se == 0.0
    assert r.agrees(3.0) and r.passed
    z = poincare_check(GEOM, "constant:value=2", 4.0, 30, 30)
    assert z.lhs == 0.0 and z.rhs == 0.0 and z.passed


def test_stabilization_examples():
    t = stabilization_probe(GEOM, "vertices", [2, 4, 6], 30, master_seed=3)
    assert t.fractions == [1.0, 1.0]
    # the insertion cost of the Euler characteristic only sees the unit neighbourhood
    t = stabilization_probe(GEOM, "euler", [3, 5, 7], 30, master_seed=3)
    assert t.fractions[-1] == 1.0
    with pytest.raises(RejectedInputError):
        stabilization_probe(GEOM, "vertices", [4, 2], 3)


def test_replication_errors_carry_index():
    def boom(cx):
        if cx.f(0) > 2:
            raise ValueError("too many")
        return 0.0

    with pytest.raises(ReplicationError) as info:
        run_clt_experiment(ExperimentConfig(GEOM, [boom], [5], 5))
    assert info.value.replication == 0


def test_statistics_helpers():
    assert relative_change(2.0, 2.3) == pytest.approx(0.15)
    assert relative_change(0.0, 0.0) == 0.0 and relative_change(0.0, 1.0) == math.inf
    x = np.random.default_rng(0).standard_normal(200_000)
    # Var of the sample variance of N(0,1) is about 2/n
    assert variance_stderr(x) == pytest.approx(math.sqrt(2 / len(x)), rel=0.02)
    assert math.isnan(variance_stderr(np.ones(3)))
    model = Model.from_json(GEOM.to_json())
    assert model.to_json() == GEOM.to_json()
