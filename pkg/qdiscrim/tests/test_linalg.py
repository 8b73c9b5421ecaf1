import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from app.exceptions import DimensionMismatchError, NotHermitianError
from app.quantum.channels import two_pauli
from app.quantum.discrimination import ansatz_states, best_known_pair, two_use_helstrom
from app.quantum.linalg import (
    commutator_norm,
    hermitian_eig,
    spectral_sign,
    tensor,
    trace_norm,
)
from app.quantum.states import DOWN, IDENTITY_2, SIGMA_1, SIGMA_2, SIGMA_3, UP, pure_density


def test_tensor_of_identities():
    assert np.allclose(tensor(IDENTITY_2, IDENTITY_2), np.eye(4))


def test_tensor_of_sigma_3():
    assert np.allclose(tensor(SIGMA_3, SIGMA_3), np.diag([1, -1, -1, 1]))


def test_tensor_block_structure():
    out = tensor(SIGMA_1, IDENTITY_2)
    assert np.allclose(out[:2, :2], 0)
    assert np.allclose(out[:2, 2:], np.eye(2))
    assert np.allclose(out[2:, :2], np.eye(2))
    assert np.allclose(out[2:, 2:], 0)


def test_tensor_rejects_vectors():
    with pytest.raises(DimensionMismatchError):
        tensor(np.ones(2), IDENTITY_2)


@pytest.mark.parametrize("method", ["jacobi", "lapack"])
def test_pauli_spectra(method):
    assert np.allclose(hermitian_eig(SIGMA_3, method).eigenvalues, [1, -1])

    spectrum = hermitian_eig(SIGMA_1, method)
    assert np.allclose(spectrum.eigenvalues, [1, -1])
    top = spectrum.eigenvectors[:, 0]
    # Eigenvectors are fixed up to a phase
    assert abs(abs(np.vdot(top, np.array([1, 1]) / np.sqrt(2))) - 1.0) < 1e-12


@pytest.mark.parametrize("dim", [2, 3, 4, 8])
def test_jacobi_reconstructs_random_hermitian(hermitian_factory, dim):
    h = hermitian_factory(dim)
    spectrum = hermitian_eig(h, "jacobi")
    assert np.max(np.abs(spectrum.reconstruct() - h)) < 1e-9
    assert np.all(np.diff(spectrum.eigenvalues) <= 0)
    v = spectrum.eigenvectors
    assert np.allclose(v.conj().T @ v, np.eye(dim), atol=1e-10)


def test_jacobi_agrees_with_lapack(hermitian_factory):
    h = hermitian_factory(4)
    assert np.allclose(hermitian_eig(h, "jacobi").eigenvalues, hermitian_eig(h, "lapack").eigenvalues, atol=1e-10)


def test_spectrum_is_read_only():
    spectrum = hermitian_eig(SIGMA_3)
    with pytest.raises(ValueError):
        spectrum.eigenvalues[0] = 5.0


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        hermitian_eig(SIGMA_3, "qr")


def test_trace_norms():
    assert trace_norm(SIGMA_3) == pytest.approx(2.0)
    assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0)
    assert trace_norm(pure_density(DOWN) - pure_density(UP)) == pytest.approx(2.0)


def test_commutator_norms():
    assert commutator_norm(SIGMA_3, SIGMA_3) == 0.0
    assert commutator_norm(SIGMA_1, SIGMA_2) == pytest.approx(2.0 * np.sqrt(2.0))


def test_commutator_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        commutator_norm(SIGMA_1, np.eye(4))


def test_spectral_sign_is_hermitian_unitary(hermitian_factory):
    h = hermitian_factory(4)
    u = spectral_sign(h)
    assert np.allclose(u, u.conj().T, atol=1e-10)
    assert np.allclose(u @ u, np.eye(4), atol=1e-10)
    # tr(U H) attains the trace norm
    assert np.trace(u @ h).real == pytest.approx(trace_norm(h), abs=1e-9)


@hyp_settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.floats(0, 2 * np.pi))
def test_trace_norm_is_unitarily_invariant(diagonal, angle):
    c, s = np.cos(angle), np.sin(angle)
    u = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=np.complex128)
    d = np.diag(diagonal).astype(np.complex128)
    assert trace_norm(u @ d @ u.conj().T) == pytest.approx(sum(abs(v) for v in diagonal), abs=1e-9)


@pytest.mark.parametrize("x", [0.0, 0.1, 1.0 / 3.0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0])
def test_jacobi_on_two_use_outputs(x):
    channel = two_pauli(x)
    states = list(best_known_pair(x).densities()) + list(ansatz_states(0.3).densities())
    for rho in states:
        out = channel.apply_two(rho)
        spectrum = hermitian_eig(out, "jacobi")
        assert np.allclose(spectrum.eigenvalues, hermitian_eig(out, "lapack").eigenvalues, atol=1e-10)
        assert np.max(np.abs(spectrum.reconstruct() - out)) < 1e-10


def test_jacobi_on_output_difference():
    channel = two_pauli(0.8)
    r0, r1 = ansatz_states(0.4).densities()
    delta = channel.apply_two(r1) - channel.apply_two(r0)
    assert np.allclose(hermitian_eig(delta, "jacobi").eigenvalues, hermitian_eig(delta, "lapack").eigenvalues, atol=1e-10)


def test_two_use_helstrom_with_jacobi_at_x_08():
    result = two_use_helstrom(two_pauli(0.8), best_known_pair(0.8), method="jacobi")
    assert result.pe == pytest.approx(0.090072, abs=1e-6)


def seeded_matrix(seed, rows, cols=None):
    rng = np.random.default_rng(seed)
    shape = (rows, cols or rows)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def seeded_hermitian(seed, dim):
    g = seeded_matrix(seed, dim)
    return (g + g.conj().T) / 2


def seeded_unitary(seed, dim):
    q, r = np.linalg.qr(seeded_matrix(seed, dim))
    return q * (np.diag(r) / np.abs(np.diag(r)))


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@hyp_settings(max_examples=30, deadline=None)
@given(seeds)
def test_tensor_is_associative(seed):
    a, b, c = seeded_matrix(seed, 2), seeded_matrix(seed + 1, 3), seeded_matrix(seed + 2, 2)
    assert np.allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), atol=1e-12)


@hyp_settings(max_examples=50, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=5))
def test_trace_norm_bounds_trace(seed, dim):
    h = seeded_hermitian(seed, dim)
    assert trace_norm(h) >= abs(np.trace(h).real) - 1e-12


@hyp_settings(max_examples=50, deadline=None)
@given(seeds)
def test_qubit_spectrum_matches_characteristic_roots(seed):
    h = seeded_hermitian(seed, 2)
    half_trace = np.trace(h).real / 2
    det = (h[0, 0] * h[1, 1] - abs(h[0, 1]) ** 2).real
    root = np.sqrt(max(half_trace**2 - det, 0.0))
    expected = [half_trace + root, half_trace - root]
    for method in ("jacobi", "lapack"):
        assert np.allclose(hermitian_eig(h, method).eigenvalues, expected, atol=1e-10)


@hyp_settings(max_examples=30, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=4))
def test_trace_norm_invariant_under_complex_unitaries(seed, dim):
    h = seeded_hermitian(seed, dim)
    u = seeded_unitary(seed + 1, dim)
    assert trace_norm(u @ h @ u.conj().T) == pytest.approx(trace_norm(h), abs=1e-9)
