"""Monte Carlo experiment layer: statistics, fits, sweeps, thresholds."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surgesim import experiments, protocol
from surgesim.experiments import (
    AnalyticModel, ChannelEstimate, StopRule, correlation_measure,
    estimate_cnot_channel, estimate_optimal_h2, factorized_class_probs,
    fit_connection_params, predict_logical_rate, run_shots,
    symmetry_partner_check, wilson_interval, CNOT_CLASSES)
from surgesim.noise import NoiseParams


FIXED = StopRule(fixed_shots=2000)


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        StopRule()
    with pytest.raises(ValueError):
        StopRule(fixed_shots=100, min_failures=10)
    with pytest.raises(ValueError):
        StopRule(fixed_shots=0)
    with pytest.raises(ValueError):
        StopRule(min_failures=0)


def test_zero_noise_is_identity():
    spec = protocol.build_memory(3, 3)
    tally = run_shots(spec, NoiseParams("independent", 0.0, 0.0),
                      StopRule(fixed_shots=200), master_seed=1)
    assert tally.counts == {"I": 200}
    assert tally.failures == 0


def test_shot_determinism_across_batching():
    spec = protocol.build_zz(3, 1, 1, 3, 1)
    noise = NoiseParams("independent", 0.02)
    t1 = run_shots(spec, noise, StopRule(fixed_shots=3000), master_seed=7)
    t2 = run_shots(spec, noise, StopRule(fixed_shots=3000), master_seed=7)
    assert t1.counts == t2.counts
    # a prefix run tallies a subset of the same shots
    t3 = run_shots(spec, noise, StopRule(fixed_shots=1000), master_seed=7)
    assert sum(t3.counts.values()) == 1000
    assert all(t1.counts.get(k, 0) >= v for k, v in t3.counts.items())


def test_min_failures_stop_and_cap():
    spec = protocol.build_memory(3, 3)
    noise = NoiseParams("independent", 0.05)
    tally = run_shots(spec, noise, StopRule(min_failures=20), master_seed=3)
    assert tally.failures >= 20
    assert not tally.capped
    assert tally.shots % experiments.BATCH_SIZE == 0
    # tiny cap at low noise exhausts before reaching the failure target
    capped = run_shots(spec, NoiseParams("independent", 1e-4),
                       StopRule(min_failures=500, cap=2000), master_seed=3)
    assert capped.capped
    assert capped.shots == 2000


def test_wilson_interval_examples():
    assert wilson_interval(0, 100) == (0.0, pytest.approx(0.0370, abs=2e-3))
    assert wilson_interval(100, 100)[1] == 1.0
    low, high = wilson_interval(50, 100)
    assert low < 0.5 < high
    assert high - low == pytest.approx(0.192, abs=5e-3)
    low, high = wilson_interval(10, 10**6)
    assert low < 1e-5 < high
    with pytest.raises(ValueError):
        wilson_interval(5, 0)
    with pytest.raises(ValueError):
        wilson_interval(-1, 10)


def test_estimate_optimal_h2():
    assert estimate_optimal_h2(7, 0.01, 0.01) == pytest.approx(7.0)
    assert estimate_optimal_h2(7, 0.006, 0.001) == pytest.approx(
        8 * math.log(0.006) / math.log(0.001) - 1)
    assert estimate_optimal_h2(7, 0.006, 0.001) < 7
    assert estimate_optimal_h2(7, 0.006, 0.018) > 7
    with pytest.raises(ValueError):
        estimate_optimal_h2(7, 0.6, 0.01)


def test_predict_logical_rate():
    model = AnalyticModel(A=2.0, B=3.0)
    got = predict_logical_rate(model, 0.01, 0.02, 3, 3)
    assert got == pytest.approx(2 * 0.01**2 + 3 * 0.02**2)
    # monotone decreasing in both d and h2
    assert predict_logical_rate(model, 0.01, 0.02, 5, 3) < got
    assert predict_logical_rate(model, 0.01, 0.02, 3, 5) < got
    with pytest.raises(ValueError):
        AnalyticModel(A=0.5)


@given(p1=st.floats(0, 0.3), p2=st.floats(0, 0.3), p3=st.floats(0, 0.3))
@settings(max_examples=50, deadline=None)
def test_factorized_probs_normalized(p1, p2, p3):
    probs = factorized_class_probs(p1, p2, p3)
    assert set(probs) == set(CNOT_CLASSES)
    assert sum(probs.values()) == pytest.approx(1.0)
    assert all(v >= 0 for v in probs.values())


def test_factorized_probs_structure():
    probs = factorized_class_probs(0.1, 0.05, 0.02)
    p0 = 1 - 0.1 - 0.05 - 0.02
    assert probs["I"] == pytest.approx(p0 * p0)
    assert probs["X1"] == pytest.approx(0.02 * p0)       # X1 -> p3
    assert probs["X1X2"] == pytest.approx(0.1 * p0)      # X1X2 -> p1
    assert probs["Z1"] == pytest.approx(p0 * 0.05)       # Z1 -> p2
    assert probs["X1*Z2"] == pytest.approx(0.02 * 0.02)  # both -> p3


def _estimate_from_probs(probs, shots):
    return ChannelEstimate(
        probs={g: (probs[g], 0.0, 1.0) for g in CNOT_CLASSES}, shots=shots)


def test_fit_recovers_exact_factorized_channel():
    truth = (0.04, 0.02, 0.01)
    est = _estimate_from_probs(factorized_class_probs(*truth), shots=10**6)
    fit = fit_connection_params(est)
    assert fit.converged
    assert (fit.p1, fit.p2, fit.p3) == pytest.approx(truth, abs=1e-6)
    assert fit.objective < 1e-10
    assert fit.dof == 13


def test_fit_recovers_sampled_factorized_channel():
    truth = (0.04, 0.02, 0.01)
    probs = factorized_class_probs(*truth)
    n = 10**6
    rng = np.random.default_rng(5)
    counts = rng.multinomial(n, [probs[g] for g in CNOT_CLASSES])
    sampled = {g: c / n for g, c in zip(CNOT_CLASSES, counts)}
    fit = fit_connection_params(_estimate_from_probs(sampled, shots=n))
    assert fit.converged
    for got, want in zip((fit.p1, fit.p2, fit.p3), truth):
        se = math.sqrt(want * (1 - want) / n)
        assert abs(got - want) < 4 * se
    assert fit.chi_square_per_dof < 3.0


def test_symmetry_partner_check_formula():
    spec = protocol.build_cnot(3, 1, 1, 3, 1)
    tally = experiments.TallyTable(
        counts={"I": 9000, "X1": 120, "Z2": 80, "X2": 50, "Z1": 50},
        shots=9300, seed=0, spec=spec,
        noise=NoiseParams("independent", 0.01))
    result = dict(symmetry_partner_check(tally))
    assert result[("X1", "Z2")] == pytest.approx(40 / math.sqrt(200))
    assert result[("X2", "Z1")] == 0.0
    assert result[("X1X2", "Z1Z2")] == "no data"
    for c in experiments.SYMMETRY_FIXED_CLASSES:
        assert result[(c, c)] == 0.0


def test_estimate_cnot_channel():
    spec = protocol.build_cnot(3, 1, 1, 3, 1)
    tally = experiments.TallyTable(
        counts={"I": 980, "X1": 20}, shots=1000, seed=0, spec=spec,
        noise=NoiseParams("independent", 0.01))
    est = estimate_cnot_channel(tally)
    assert set(est.probs) == set(CNOT_CLASSES)
    assert est.probs["X1"][0] == pytest.approx(0.02)
    assert est.probs["Z1"][0] == 0.0
    mem = experiments.TallyTable(counts={}, shots=1, seed=0,
                                 spec=protocol.build_memory(3, 3),
                                 noise=NoiseParams("independent", 0.01))
    with pytest.raises(ValueError):
        estimate_cnot_channel(mem)


def test_correlation_measure_examples():
    spec = protocol.build_memory(3, 3)
    noise = NoiseParams("independent", 0.01)

    def mem_tally(pi, px, py, pz, n=10000):
        counts = {"I": round(pi * n), "X": round(px * n),
                  "Y": round(py * n), "Z": round(pz * n)}
        return experiments.TallyTable(counts=counts, shots=n, seed=0,
                                      spec=spec, noise=noise)

    est = correlation_measure(mem_tally(0.9, 0.04, 0.02, 0.04))
    assert est.m == pytest.approx(abs(0.9 * 0.02 - 0.04 * 0.04) / 0.10)
    # a perfectly factorized X/Z channel has M = 0
    px, pz = 0.1, 0.05
    est = correlation_measure(mem_tally((1 - px) * (1 - pz), px * (1 - pz),
                                        px * pz, (1 - px) * pz))
    assert est.m == pytest.approx(0.0, abs=1e-12)
    est = correlation_measure(mem_tally(1.0, 0, 0, 0))
    assert est.m is None and not est.m_defined


def test_sweep_h2_shapes_and_helpers():
    noise = NoiseParams("independent", 0.02)
    rows = experiments.sweep_h2(3, 1, 1, 1, noise, [1, 3, 5, 9],
                                StopRule(fixed_shots=4000), master_seed=11)
    assert [r["h2"] for r in rows] == [1, 3, 5, 9]
    for r in rows:
        assert 0 <= r["p_l_low"] <= r["p_l"] <= r["p_l_high"] <= 1
    # short merges are dominated by timelike failures, long ones are not
    assert rows[0]["timelike_fraction"] > rows[-1]["timelike_fraction"]
    sat = experiments.saturation_h2(rows)
    assert sat in [r["h2"] for r in rows]
    cross = experiments.timelike_crossing_h2(rows)
    if cross is not None:
        assert 1 <= cross <= 9


def test_timelike_crossing_interpolation():
    rows = [{"h2": 1, "timelike_fraction": 0.8},
            {"h2": 3, "timelike_fraction": 0.3}]
    assert experiments.timelike_crossing_h2(rows) == pytest.approx(
        1 + 0.3 / 0.5 * 2)
    rows = [{"h2": 1, "timelike_fraction": 0.9},
            {"h2": 3, "timelike_fraction": 0.8}]
    assert experiments.timelike_crossing_h2(rows) is None


def test_find_threshold_no_crossing():
    est = experiments.find_threshold(
        "memory", [3, 5], "independent", [0.001, 0.002, 0.003],
        StopRule(fixed_shots=500), master_seed=2)
    # deep below threshold both curves sit at the 0.5/shots floor or the
    # larger distance is strictly better: either no crossing is reported
    # or the crossing sits inside the grid
    if est.crossing is None:
        assert est.message == "no crossing"
    else:
        assert 0.001 <= est.crossing <= 0.003
    with pytest.raises(ValueError):
        experiments.find_threshold("memory", [3], "independent",
                                   [0.01, 0.02, 0.03], FIXED, 0)
    with pytest.raises(ValueError):
        experiments.find_threshold("memory", [3, 5], "independent",
                                   [0.01, 0.02], FIXED, 0)


def test_format_value_and_csv(tmp_path):
    assert experiments.format_value(None) == ""
    assert experiments.format_value(True) == "1"
    assert experiments.format_value(0.1 + 0.2) == "0.3"
    assert experiments.format_value(3) == "3"
    path = tmp_path / "out.csv"
    experiments.write_csv(path, ["a", "b"],
                          [{"a": 1, "b": None}, {"a": 0.5, "b": "x"}])
    assert path.read_text() == "a,b\n1,\n0.5,x\n"
