import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecs_metrology import coherent_algebra as ca
from ecs_metrology import detection as det
from ecs_metrology import fock

HELSTROM_E_MINUS_1 = 0.1024699511896749464   # (1 - sqrt(1 - e^-1))/2
MINIMAX_QUARTER = 0.0669872981077806766
H1_ALPHA1 = 0.7604333115894074415            # 1/sqrt(2(1 - e^-2))
FORCE_OVERLAP_ALPHA1_BETA1 = 0.7796176409147016766


def test_helstrom_examples():
    assert det.helstrom_error(0.5, 0.0) == 0.0
    assert det.helstrom_error(0.5, 1.0) == 0.5
    assert det.helstrom_error(0.5, math.exp(-1)) == pytest.approx(HELSTROM_E_MINUS_1, abs=1e-15)
    with pytest.raises(ValueError):
        det.helstrom_error(1.2, 0.3)
    with pytest.raises(ValueError):
        det.helstrom_error(0.5, 1.5)


def test_helstrom_grid_properties():
    priors = np.linspace(0, 1, 101)
    overlaps = np.linspace(0, 1, 101)
    table = np.array([[det.helstrom_error(p, x) for x in overlaps] for p in priors])
    assert np.all(table <= np.minimum(priors, 1 - priors)[:, None] + 1e-15)
    assert np.all(np.diff(table, axis=1) >= -1e-15)
    minimax = np.array([det.minimax_error(x) for x in overlaps])
    assert np.all(minimax[None, :] >= table - 1e-15)


def test_minimax():
    assert det.minimax_error(0.0) == 0.0
    assert det.minimax_error(0.25) == pytest.approx(MINIMAX_QUARTER, abs=1e-15)
    grid = np.linspace(0, 1, 1001)
    values = [det.helstrom_error(p, 0.4) for p in grid]
    assert grid[int(np.argmax(values))] == pytest.approx(0.5)


def test_build_probe_pair():
    pair = det.build_force_probe_pair(1.0, 1.0)
    np.testing.assert_array_equal(pair.before.amplitudes[:, 1], [1, 0])
    np.testing.assert_array_equal(pair.after.amplitudes[:, 1], [0, 0])
    np.testing.assert_allclose(pair.after.coefficients, [H1_ALPHA1, -H1_ALPHA1], rtol=1e-14)
    assert ca.self_overlap(pair.after) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(det.DegenerateProbeError):
        det.build_force_probe_pair(0.0, 1.0)
    same = det.build_force_probe_pair(0.7, 0.0)
    np.testing.assert_array_equal(same.before.amplitudes, same.after.amplitudes)
    np.testing.assert_array_equal(same.before.coefficients, same.after.coefficients)


def test_force_overlap_value_and_oracle():
    pair = det.build_force_probe_pair(1.0, 1.0)
    ov = det.force_overlap(pair)
    assert abs(ov) == pytest.approx(FORCE_OVERLAP_ALPHA1_BETA1, abs=1e-14)
    k_after = fock.to_fock_ket(pair.after, 40)
    k_before = fock.to_fock_ket(pair.before, 40)
    assert fock.inner_product(k_after, k_before) == pytest.approx(ov, abs=1e-9)
    assert det.force_overlap(det.build_force_probe_pair(1.0, 0.0)) == pytest.approx(1.0)


@pytest.mark.parametrize("alpha, eps", [(0.3, 0.2), (1.5, 4.0), (3.0, 9.0), (2.0 + 1j, 1.0), (0.8, 0.0)])
def test_force_overlap_duality(alpha, eps):
    pair = det.build_force_probe_pair(alpha, eps)
    cut = fock.choose_truncation(max(abs(alpha), math.sqrt(eps)), 1e-14)
    oracle = fock.inner_product(fock.to_fock_ket(pair.after, cut), fock.to_fock_ket(pair.before, cut))
    assert det.force_overlap(pair) == pytest.approx(oracle, abs=1e-9)
    if eps > 0:
        assert abs(det.force_overlap(pair)) == pytest.approx(
            det.force_overlap_closed_form(alpha, math.sqrt(eps)), abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 3), st.floats(0, 9), st.floats(-math.pi, math.pi))
def test_force_overlap_symmetries(alpha, eps, phase):
    base = abs(det.force_overlap(det.build_force_probe_pair(alpha, eps)))
    flipped = abs(det.force_overlap(det.build_force_probe_pair(-alpha, eps)))
    assert flipped == pytest.approx(base, abs=1e-12)
    pair = det.build_force_probe_pair(alpha, eps)
    g = np.exp(1j * phase)
    assert abs(ca.overlap(g * pair.after, g * pair.before)) == pytest.approx(base, abs=1e-12)


def test_force_displaces_vacuum_variant():
    pair = det.build_force_probe_pair(1.0, 1.0, displaces_vacuum=True)
    np.testing.assert_allclose(pair.after.amplitudes[:, 1], [0, -1])
    assert pair.force_displaces_vacuum
    cut = 30
    oracle = fock.inner_product(fock.to_fock_ket(pair.after, cut), fock.to_fock_ket(pair.before, cut))
    assert det.force_overlap(pair) == pytest.approx(oracle, abs=1e-9)


def test_coherent_baseline():
    problem, ov = det.coherent_baseline(1.0, 1.0)
    assert ov == pytest.approx(math.exp(-0.5), abs=1e-15)
    cut = 30
    assert fock.inner_product(fock.coherent_ket(1.0, cut), fock.coherent_ket(0.0, cut)) == pytest.approx(ov, abs=1e-12)
    assert det.coherent_baseline(1.3, 0.0)[1] == pytest.approx(1.0)
    assert det.coherent_baseline(2.0, 4.0)[1] == pytest.approx(math.exp(-2), abs=1e-15)
    assert problem.prior0 == 0.5


def test_error_comparison():
    cmp = det.error_comparison(1.0, 1.0)
    assert cmp.pe_coherent == pytest.approx(HELSTROM_E_MINUS_1, abs=1e-15)
    assert cmp.paper_claim_pe_ecs == 0.0
    assert cmp.pe_ecs == pytest.approx(det.helstrom_error(0.5, abs(cmp.force_overlap) ** 2))
    assert cmp.pe_ecs > 0
    coh = {det.error_comparison(a, 1.0).pe_coherent for a in (0.5, 1.0, 2.0)}
    assert len(coh) == 1
    assert det.helstrom_error(0.5, 0.0) == 0.0


def test_coherent_closed_form_identity():
    for beta in (0.5, 1.0, 2.0):
        assert det.coherent_error_closed_form(beta) == det.helstrom_error(0.5, math.exp(-beta ** 2))


def test_parallel_bank():
    assert det.design_parallel_bank([4.0]).betas == [2.0]
    assert det.design_parallel_bank([1, 2, 4]).betas == pytest.approx([1, math.sqrt(2), 2])
    bank = det.design_parallel_bank(np.geomspace(0.01, 100, 8))
    assert len(bank) == 8
    for beta, eps in bank.entries:
        assert abs(beta ** 2 - eps) <= 1e-12 * max(1, eps)
    for bad in ([], [0.0], [-1.0], [1.0, 1.0]):
        with pytest.raises(ValueError):
            det.design_parallel_bank(bad)


def test_bank_decision():
    assert det.bank_decision([False, False]) is False
    assert det.bank_decision([False, True, False]) is True
    assert det.bank_decision([True] * 5) is True
    with pytest.raises(ValueError):
        det.bank_decision([])


def test_detection_problem_validation():
    with pytest.raises(ValueError):
        det.DetectionProblem(ca.coherent(0), ca.coherent(1), 0.3, 0.3)
    with pytest.raises(ca.NotNormalizedError):
        det.DetectionProblem(2 * ca.coherent(0), ca.coherent(1))
    with pytest.raises(ca.DimensionError):
        det.DetectionProblem(ca.coherent(0), ca.coherent(1, 1))


@pytest.mark.parametrize("prior0", [0.5, 0.2, 0.9])
@pytest.mark.parametrize("beta", [0.4, 1.0, 1.7])
def test_optimal_measurement_reaches_helstrom(prior0, beta):
    problem, _ = det.coherent_baseline(beta, beta ** 2, prior0)
    p1_0, p1_1 = det.optimal_measurement(problem)
    pe = prior0 * p1_0 + (1 - prior0) * (1 - p1_1)
    assert pe == pytest.approx(problem.error_probability(), abs=1e-12)


def test_monte_carlo_orthogonal():
    # even and odd cats are orthogonal
    plus = ca.normalize(ca.coherent(1.0) + ca.coherent(-1.0))
    minus = ca.normalize(ca.coherent(1.0) - ca.coherent(-1.0))
    problem = det.DetectionProblem(plus, minus)
    assert det.monte_carlo_discrimination(problem, 100_000, seed=3) == 0.0


def test_monte_carlo_identical_states():
    s = ca.coherent(0.3)
    rate = det.monte_carlo_discrimination(det.DetectionProblem(s, s, 0.3, 0.7), 100_000, 0)
    sigma = math.sqrt(0.3 * 0.7 / 100_000)
    assert abs(rate - 0.3) <= 3 * sigma


def test_monte_carlo_binomial_band():
    problem, _ = det.coherent_baseline(1.0, 1.0)
    n = 100_000
    rate = det.monte_carlo_discrimination(problem, n, seed=0)
    p = HELSTROM_E_MINUS_1
    assert abs(rate - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_monte_carlo_deterministic_and_partitionable():
    problem, _ = det.coherent_baseline(0.8, 0.64, 0.4)
    a = det.monte_carlo_discrimination(problem, 200_000, seed=11)
    b = det.monte_carlo_discrimination(problem, 200_000, seed=11)
    c = det.monte_carlo_discrimination(problem, 200_000, seed=11, jobs=4)
    assert a == b == c
    assert det.monte_carlo_discrimination(problem, 200_000, seed=12) != a
    with pytest.raises(ValueError):
        det.monte_carlo_discrimination(problem, 0, 0)


def test_click_truth_table():
    for pattern in itertools.product([False, True], repeat=3):
        assert det.bank_decision(pattern) == any(pattern)
