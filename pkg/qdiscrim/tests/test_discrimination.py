import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from app.exceptions import InconsistentClosedFormError, InvalidStateError, ParameterOutOfRangeError
from app.quantum import discrimination
from app.quantum.channels import two_pauli
from app.quantum.discrimination import (
    BELL_BASIS,
    BellCoefficients,
    Povm,
    SignalPair,
    ansatz_optimum,
    ansatz_pe,
    ansatz_pe_compact,
    ansatz_pe_expanded,
    ansatz_states,
    ansatz_threshold,
    bell_basis,
    bell_rotation_pair,
    bell_state,
    bell_to_computational,
    best_encoding,
    best_known_pair,
    commutation_probe,
    computational_to_bell,
    from_bell_frame,
    helstrom_error,
    helstrom_measurement,
    optimal_entangled,
    optimal_z_squared,
    published_counterexample_pair,
    povm_error,
    product_baseline_pe,
    single_use_helstrom,
    threshold_boundary_residual,
    trace_distance,
    to_bell_frame,
    two_pauli_output_bell,
    two_plane_pair,
    two_use_helstrom,
)
from app.quantum.linalg import projector
from app.quantum.optimizer import fit_ansatz_alpha
from app.quantum.states import DOWN, UP, BlochVector, bloch_density, pure_density, random_mixed_state, random_pure_state


def random_povm(rng, dim, outcomes):
    gs = [rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)) for _ in range(outcomes)]
    s = sum(g.conj().T @ g for g in gs)
    w, v = np.linalg.eigh(s)
    inv_root = (v / np.sqrt(w)) @ v.conj().T
    return Povm.of([inv_root @ g.conj().T @ g @ inv_root for g in gs])


def random_projective(rng, dim):
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    return Povm.of([projector(q[:, k]) for k in range(dim)])


# ---------------------------------------------------------------------------
# Helstrom and POVM errors
# ---------------------------------------------------------------------------

def test_identical_states_are_indistinguishable(rng):
    rho = random_mixed_state(2, rng)
    assert helstrom_error(rho, rho).pe == pytest.approx(0.5)
    assert povm_error(random_povm(rng, 2, 3), rho, rho) == pytest.approx(0.5)


def test_orthogonal_states_are_perfectly_distinguishable():
    r0, r1 = pure_density(UP), pure_density(DOWN)
    assert helstrom_error(r0, r1).pe == pytest.approx(0.0, abs=1e-15)
    assert povm_error(Povm.of([r0, r1]), r0, r1) == pytest.approx(0.0, abs=1e-15)


def test_unequal_priors_on_identical_states(rng):
    rho = random_mixed_state(3, rng)
    assert helstrom_error(rho, rho, (0.3, 0.7)).pe == pytest.approx(0.3)


def test_priors_must_sum_to_one():
    with pytest.raises(ParameterOutOfRangeError):
        helstrom_error(pure_density(UP), pure_density(DOWN), (0.5, 0.6))


def test_helstrom_measurement_attains_the_bound(rng):
    for _ in range(100):
        r0, r1 = random_mixed_state(2, rng), random_mixed_state(2, rng)
        result = helstrom_error(r0, r1)
        assert povm_error(result.measurement, r0, r1) == pytest.approx(result.pe, abs=1e-12)


@pytest.mark.parametrize("priors", [(0.5, 0.5), (0.2, 0.8), (0.9, 0.1)])
def test_helstrom_beats_every_povm(rng, priors):
    for _ in range(40):
        r0, r1 = random_mixed_state(4, rng), random_mixed_state(4, rng)
        best = helstrom_error(r0, r1, priors).pe
        assert best <= povm_error(random_povm(rng, 4, 3), r0, r1, priors) + 1e-12
        assert best <= povm_error(random_projective(rng, 4), r0, r1, priors) + 1e-12


def test_helstrom_measurement_projectors():
    guess0, guess1 = helstrom_measurement(pure_density(UP), pure_density(DOWN))
    assert np.allclose(guess0, pure_density(UP))
    assert np.allclose(guess1, pure_density(DOWN))


def test_povm_validation():
    with pytest.raises(InvalidStateError):
        Povm.of([np.eye(2), np.eye(2)])


def test_signal_pair_rejects_unnormalized_vectors():
    with pytest.raises(InvalidStateError):
        SignalPair.of(np.array([1.0, 1.0]), DOWN)


# ---------------------------------------------------------------------------
# Bell basis
# ---------------------------------------------------------------------------

def test_bell_vectors():
    s = 1 / np.sqrt(2)
    assert np.allclose(bell_to_computational(BellCoefficients(1, 0, 0, 0)), [s, 0, 0, s])
    assert np.allclose(bell_to_computational(BellCoefficients(0, 0, 0, 1)), [0, s, -s, 0])


def test_bell_basis_is_unitary():
    b = bell_basis()
    assert np.allclose(b.conj().T @ b, np.eye(4))
    assert np.allclose(b, BELL_BASIS)


def test_bell_round_trip(rng):
    for _ in range(20):
        v = random_pure_state(4, rng)
        assert np.allclose(bell_to_computational(computational_to_bell(v)), v)


def test_bell_output_at_identity():
    out = two_pauli_output_bell(BellCoefficients(1, 0, 0, 0), 1.0)
    assert np.allclose(out, np.diag([1, 0, 0, 0]))


def test_bell_output_at_zero():
    out = two_pauli_output_bell(BellCoefficients(1, 0, 0, 0), 0.0)
    assert np.allclose(out, np.diag([0.5, 0.5, 0, 0]))


def test_bell_output_matches_kraus_sum(rng):
    for _ in range(200):
        v = rng.standard_normal(4)
        coeffs = BellCoefficients.from_array(v / np.linalg.norm(v))
        x = float(rng.uniform(0, 1))
        direct = to_bell_frame(two_pauli(x).apply_two(projector(bell_to_computational(coeffs))))
        assert np.max(np.abs(two_pauli_output_bell(coeffs, x) - direct)) < 1e-10


def test_bell_output_complex_amplitudes(rng):
    coeffs = BellCoefficients.from_array(random_pure_state(4, rng))
    direct = to_bell_frame(two_pauli(0.7).apply_two(projector(bell_to_computational(coeffs))))
    assert np.allclose(two_pauli_output_bell(coeffs, 0.7), direct)


def test_bell_output_back_in_computational_basis(rng):
    coeffs = BellCoefficients.from_array(random_pure_state(4, rng))
    direct = two_pauli(0.4).apply_two(projector(bell_to_computational(coeffs)))
    assert np.allclose(from_bell_frame(two_pauli_output_bell(coeffs, 0.4)), direct, atol=1e-12)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("x, expected", [(0.8, 0.1), (1 / 3, 1 / 3), (0.5, 0.25), (0.2, 0.2)])
def test_product_baseline(x, expected):
    assert product_baseline_pe(x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.0, np.pi / 4, 0.3, 1.2])
def test_ansatz_states_are_orthonormal(alpha):
    pair = ansatz_states(alpha)
    assert pair.overlap() < 1e-15
    assert np.linalg.norm(pair.state0) == pytest.approx(1.0)


def test_ansatz_at_zero_angle_is_bell_pair():
    pair = ansatz_states(0.0)
    assert np.allclose(pair.state0, bell_state(0))
    assert np.allclose(pair.state1, bell_state(2))


def test_ansatz_examples():
    assert ansatz_pe(0.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert ansatz_pe(np.pi / 4, 0.5) == pytest.approx(0.25, abs=1e-12)
    assert ansatz_pe(optimal_entangled(0.5).alpha, 0.5) == pytest.approx(0.241801, abs=1e-6)


def test_ansatz_forms_agree_on_grid():
    for x in np.linspace(0, 1, 100):
        for alpha in np.linspace(0, np.pi / 2, 100):
            expanded = ansatz_pe_expanded(alpha, x)
            compact = ansatz_pe_compact(np.cos(2 * alpha), x)
            assert abs(expanded - compact) < 1e-12


def test_ansatz_pe_raises_when_forms_disagree(monkeypatch):
    original = discrimination.ansatz_pe_expanded
    monkeypatch.setattr(discrimination, "ansatz_pe_expanded", lambda alpha, x: original(alpha, x) + 1e-6)
    with pytest.raises(InconsistentClosedFormError) as excinfo:
        ansatz_pe(0.3, 0.6)
    assert excinfo.value.gap == pytest.approx(1e-6, rel=1e-3)


def test_swapped_ansatz_pair_has_the_same_error():
    channel = two_pauli(0.6)
    pair = ansatz_states(0.3)
    swapped = pair.swapped()
    assert np.allclose(swapped.state0, pair.state1)
    assert two_use_helstrom(channel, swapped).pe == pytest.approx(two_use_helstrom(channel, pair).pe, abs=1e-12)
    assert ansatz_pe(0.3 + np.pi / 2, 0.6) == pytest.approx(ansatz_pe(0.3, 0.6), abs=1e-12)


@pytest.mark.parametrize("x", [0.0, 0.2, 0.5, 0.77, 1.0])
def test_ansatz_matches_brute_force(x):
    channel = two_pauli(x)
    for alpha in np.linspace(0, np.pi / 2, 25):
        brute = two_use_helstrom(channel, ansatz_states(alpha)).pe
        assert ansatz_pe(alpha, x) == pytest.approx(brute, abs=1e-10)


@hyp_settings(max_examples=50, deadline=None)
@given(st.floats(0, np.pi), st.floats(0, 1))
def test_ansatz_quarter_turn_symmetry(alpha, x):
    assert ansatz_pe(alpha + np.pi / 2, x) == pytest.approx(ansatz_pe(alpha, x), abs=1e-12)


@pytest.mark.parametrize("x, pe", [(0.5, 0.241801), (0.6, 0.188231), (0.7, 0.137817), (0.8, 0.090072), (0.9, 0.044319), (0.95, 0.022009)])
def test_published_entangled_values(x, pe):
    assert optimal_entangled(x).pe == pytest.approx(pe, abs=5e-6)


def test_optimal_angle_at_one_half():
    optimum = optimal_entangled(0.5)
    assert optimum.z_squared == pytest.approx(0.25 / 3.75)
    assert np.cos(2 * optimum.alpha) ** 2 == pytest.approx(optimum.z_squared)


def test_continuity_at_one_third():
    assert optimal_entangled(1 / 3).pe == pytest.approx(1 / 3, abs=1e-12)
    assert best_encoding(1 / 3)[0] == "product"


def test_threshold():
    t = ansatz_threshold()
    assert t == pytest.approx(0.227539, abs=1e-6)
    assert abs(threshold_boundary_residual(t)) < 1e-9
    assert optimal_z_squared(t) <= 1 + 1e-9


def test_interior_optimum_below_threshold_rejected():
    with pytest.raises(ParameterOutOfRangeError):
        optimal_entangled(0.1)


def test_entangled_advantage_regime():
    for x in np.round(np.linspace(0.01, 0.99, 99), 12):
        product, entangled = product_baseline_pe(x), ansatz_optimum(x).pe
        if x > 1 / 3:
            assert entangled < product
            assert best_encoding(x)[0] == "entangled"
        else:
            assert entangled >= product - 1e-9


def test_numeric_ansatz_never_beats_product_below_one_third():
    for x in np.linspace(0.01, 1 / 3, 34):
        _, pe = fit_ansatz_alpha(x)
        assert pe >= product_baseline_pe(x) - 1e-9


@pytest.mark.parametrize("x", [0.3, 0.5, 0.8])
def test_numeric_ansatz_fit_matches_closed_form(x):
    alpha, pe = fit_ansatz_alpha(x)
    assert pe == pytest.approx(ansatz_optimum(x).pe, abs=1e-8)


@pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
def test_best_known_pair_reaches_best_encoding(x):
    pe = two_use_helstrom(two_pauli(x), best_known_pair(x)).pe
    assert pe == pytest.approx(best_encoding(x)[1], abs=1e-10)


# ---------------------------------------------------------------------------
# Commutation
# ---------------------------------------------------------------------------

def test_counterexample_outputs_do_not_commute():
    assert commutation_probe(published_counterexample_pair(), 0.5) > 1e-6


def test_bell_rotation_outputs_commute(rng):
    for _ in range(50):
        b1, b2 = rng.choice(4, size=2, replace=False)
        pair = bell_rotation_pair(rng.uniform(0, 2 * np.pi), int(b1), int(b2))
        assert commutation_probe(pair, rng.uniform(0, 1)) < 1e-10


def test_bell_rotation_needs_two_states():
    with pytest.raises(ValueError):
        bell_rotation_pair(0.1, 2, 2)


def test_two_plane_family():
    pair = two_plane_pair(0.3, 0.7)
    assert commutation_probe(pair, 1 / 3) < 1e-10
    assert commutation_probe(pair, 0.0) < 1e-10
    assert commutation_probe(pair, 1.0) < 1e-10
    assert commutation_probe(pair, 0.5) > 1e-8


def test_trace_distance_of_basis_states():
    assert trace_distance(pure_density(UP), pure_density(DOWN)) == pytest.approx(1.0)
    assert trace_distance(pure_density(UP), pure_density(UP)) == pytest.approx(0.0, abs=1e-15)


def test_helstrom_error_from_trace_distance(rng):
    r0, r1 = random_mixed_state(3, rng), random_mixed_state(3, rng)
    assert helstrom_error(r0, r1).pe == pytest.approx(0.5 - 0.5 * trace_distance(r0, r1), abs=1e-12)


@pytest.mark.parametrize("x", [0.0, 0.3, 0.8, 1.0])
def test_single_use_error_along_sigma_1(x):
    a = BlochVector(1.0, 0.0, 0.0)
    pair = SignalPair(bloch_density(a), bloch_density(a.negated()))
    assert single_use_helstrom(two_pauli(x), pair).pe == pytest.approx((1 - x) / 2, abs=1e-12)
