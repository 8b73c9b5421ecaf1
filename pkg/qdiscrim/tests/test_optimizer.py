import time

import numpy as np
import pytest

from app.exceptions import DimensionMismatchError
from app.quantum.channels import KrausChannel, amplitude_damping, depolarizing, identity_channel, two_pauli
from app.quantum.discrimination import optimal_entangled, product_baseline_pe, two_use_helstrom
from app.quantum.optimizer import (
    N_ANGLES,
    PairParameterization,
    decode_pair,
    dominance_check,
    fit_ansatz_alpha,
    pair_error,
    random_angles,
    search_optimal_inputs,
    search_product_inputs,
    seesaw,
)
from app.quantum.rng import make_rng
from app.quantum.states import DOWN, UP, maximally_mixed


def test_decoded_pairs_are_orthonormal(rng):
    for _ in range(50):
        pair = decode_pair(random_angles(rng))
        assert np.linalg.norm(pair.state0) == pytest.approx(1.0)
        assert np.linalg.norm(pair.state1) == pytest.approx(1.0)
        assert pair.overlap() < 1e-12


def test_zero_angles_decode_to_computational_pair():
    pair = decode_pair(np.zeros(N_ANGLES))
    assert np.allclose(pair.state0, [1, 0, 0, 0])
    assert np.allclose(pair.state1, [0, 1, 0, 0])


def test_parameterization_rejects_wrong_length():
    with pytest.raises(DimensionMismatchError):
        PairParameterization(np.zeros(N_ANGLES - 1))


def test_search_rejects_non_qubit_channels():
    with pytest.raises(DimensionMismatchError):
        search_optimal_inputs(identity_channel(3), restarts=1)


def test_restarts_must_be_positive():
    with pytest.raises(ValueError):
        seesaw(two_pauli(0.5), restarts=0)


def test_identity_channel_is_perfect():
    report = seesaw(identity_channel(), seed=3, restarts=2)
    assert report.best_pe == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("x", [0.5, 0.9])
def test_seesaw_reaches_closed_form(x):
    report = seesaw(two_pauli(x), seed=7, restarts=8)
    assert report.best_pe == pytest.approx(optimal_entangled(x).pe, abs=1e-6)
    assert report.method == "seesaw"
    assert len(report.trajectories) == 8


def test_seesaw_objective_never_decreases():
    report = seesaw(amplitude_damping(0.6), seed=11, restarts=6)
    for trajectory in report.trajectories:
        assert np.all(np.diff(trajectory) >= -1e-12)


def test_seesaw_pair_reproduces_reported_error():
    channel = two_pauli(0.7)
    report = seesaw(channel, seed=5, restarts=4)
    assert two_use_helstrom(channel, report.best_pair).pe == pytest.approx(report.best_pe, abs=1e-10)


def test_seesaw_does_not_depend_on_workers():
    channel = two_pauli(0.6)
    serial = seesaw(channel, seed=2, restarts=4, n_jobs=1)
    parallel = seesaw(channel, seed=2, restarts=4, n_jobs=2)
    assert serial.history == parallel.history


@pytest.mark.slow
@pytest.mark.parametrize("x", [0.4, 0.5, 0.7, 0.9])
def test_search_and_seesaw_reach_closed_form(x):
    channel = two_pauli(x)
    searched = search_optimal_inputs(channel, restarts=32, seed=42)
    alternating = seesaw(channel, seed=42, restarts=32)
    assert searched.best_pe == pytest.approx(optimal_entangled(x).pe, abs=1e-6)
    assert alternating.best_pe == pytest.approx(searched.best_pe, abs=1e-6)
    assert searched.restarts_used == 32
    assert len(searched.history) == 32


@pytest.mark.slow
def test_search_at_one_half_finishes_in_a_minute():
    start = time.perf_counter()
    search_optimal_inputs(two_pauli(0.5), restarts=32, seed=42, n_jobs=1)
    assert time.perf_counter() - start < 60.0


@pytest.mark.slow
def test_search_below_one_third_finds_product_value():
    report = search_optimal_inputs(two_pauli(0.2), restarts=8, seed=42)
    assert report.best_pe == pytest.approx(0.2, abs=1e-6)


def test_search_is_seeded():
    channel = two_pauli(0.6)
    first = search_optimal_inputs(channel, restarts=2, seed=5, max_iters=300)
    second = search_optimal_inputs(channel, restarts=2, seed=5, max_iters=300)
    assert first.best_pe == second.best_pe
    assert first.history == second.history


@pytest.mark.slow
@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_depolarizing_gains_nothing(p):
    report = search_optimal_inputs(depolarizing(p), restarts=8, seed=42)
    assert report.best_pe == pytest.approx(p / 2, abs=1e-6)


@pytest.mark.slow
def test_product_search_on_two_pauli():
    report = search_product_inputs(two_pauli(0.8), restarts=8, seed=42)
    assert report.best_pe == pytest.approx(product_baseline_pe(0.8), abs=1e-6)
    assert report.method == "product"


def test_dominance_on_two_pauli():
    report = dominance_check(two_pauli(0.5), 200, seed=1, reference_pe=optimal_entangled(0.5).pe)
    assert report.passed
    assert report.samples == 200
    assert report.best_sampled_pe >= report.reference_pe - 1e-9


def test_dominance_flags_a_wrong_reference():
    report = dominance_check(two_pauli(0.5), 30, seed=1, reference_pe=0.6)
    assert not report.passed
    assert report.violations == 30


def test_dominance_needs_samples():
    with pytest.raises(ValueError):
        dominance_check(two_pauli(0.5), 0, reference_pe=0.3)


def test_dominance_on_a_non_unital_qutrit_channel():
    # Amplitude damping from level 1 and level 2 down to level 0
    g = 0.4
    a0 = np.diag([1.0, np.sqrt(1 - g), np.sqrt(1 - g)])
    a1 = np.zeros((3, 3))
    a1[0, 1] = np.sqrt(g)
    a2 = np.zeros((3, 3))
    a2[0, 2] = np.sqrt(g)
    channel = KrausChannel.from_operators("qutrit_damping", [a0, a1, a2])
    assert channel.validate().passed
    report = dominance_check(channel, 60, seed=4, restarts=4)
    assert report.passed


def test_pair_error_of_orthogonal_products():
    up, down = np.kron(UP, UP), np.kron(DOWN, DOWN)
    assert pair_error(identity_channel(), (up, down)) == pytest.approx(0.0, abs=1e-12)
    assert pair_error(two_pauli(0.2), (up, down)) == pytest.approx(0.2, abs=1e-12)


def test_fit_ansatz_alpha_stays_in_range():
    for x in np.linspace(0.0, 1.0, 11):
        alpha, pe = fit_ansatz_alpha(float(x))
        assert 0.0 <= alpha <= np.pi / 4
        assert 0.0 <= pe <= 0.5


def test_random_angles_are_reproducible():
    assert np.array_equal(random_angles(make_rng(9)), random_angles(make_rng(9)))


@pytest.mark.parametrize("x", [0.4, 0.5, 0.6, 0.8, 0.95])
def test_fit_ansatz_alpha_matches_closed_form_above_one_third(x):
    _, pe = fit_ansatz_alpha(x)
    assert pe == pytest.approx(optimal_entangled(x).pe, abs=1e-9)


@pytest.mark.slow
def test_dominance_on_amplitude_damping():
    report = dominance_check(amplitude_damping(0.6), 150, seed=1, restarts=4)
    assert report.passed
    assert report.best_sampled_pe >= report.reference_pe - 1e-9


def test_maximally_mixed_pair_is_dominated():
    mixed = maximally_mixed(4)
    pe = pair_error(two_pauli(0.5), (mixed, mixed))
    assert pe == pytest.approx(0.5, abs=1e-12)
    assert pe >= optimal_entangled(0.5).pe
