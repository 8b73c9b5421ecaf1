"""
Dense complex-matrix kernel: tensor products, adjoints, Hermitian
eigendecomposition, trace norm and commutators.

Everything here is a pure function of its inputs. Matrices are numpy
complex128 arrays; returned spectra are read-only.
"""
from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.config import settings
from app.exceptions import DimensionMismatchError, NoConvergenceError, NotHermitianError

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]

HERMITIAN_TOL = 1e-9
JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_DIAGONAL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in nonincreasing order, i-th column of eigenvectors paired with the i-th eigenvalue"""
    eigenvalues: NDArray[np.float64]
    eigenvectors: ComplexMatrix

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def projector(self, mask: NDArray[np.bool_]) -> ComplexMatrix:
        """Orthogonal projector onto the span of the selected eigenvectors"""
        v = self.eigenvectors[:, mask]
        return v @ v.conj().T

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def as_matrix(a: ArrayLike) -> ComplexMatrix:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatchError(f"Expected a 2-D matrix, got shape {m.shape}")
    return m


def require_square(a: ComplexMatrix) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"Square matrix required, got {a.shape[0]}x{a.shape[1]}")


def dagger(a: ArrayLike) -> ComplexMatrix:
    return as_matrix(a).conj().T


def tensor(a: ArrayLike, b: ArrayLike) -> ComplexMatrix:
    """Kronecker product; block (i, j) of the result is a[i, j] * b"""
    return np.kron(as_matrix(a), as_matrix(b))


def hermitian_deviation(a: ArrayLike) -> float:
    m = as_matrix(a)
    require_square(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(a: ArrayLike, tol: float = HERMITIAN_TOL) -> bool:
    return hermitian_deviation(a) <= tol


def frobenius_norm(a: ArrayLike) -> float:
    return float(np.linalg.norm(as_matrix(a), "fro"))


def projector(vec: ArrayLike) -> ComplexMatrix:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def _symmetrized(a: ArrayLike) -> ComplexMatrix:
    m = as_matrix(a)
    require_square(m)
    deviation = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if deviation > HERMITIAN_TOL:
        raise NotHermitianError(deviation)
    return (m + m.conj().T) / 2


def _off_diagonal_norm(a: ComplexMatrix) -> float:
    return float(np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2)))


def _jacobi(h: ComplexMatrix):
    """Cyclic Jacobi on a Hermitian matrix; returns (eigenvalues, eigenvectors) unsorted"""
    a = h.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    tol = JACOBI_OFF_DIAGONAL_TOL * max(1.0, frobenius_norm(a))

    for sweep in range(JACOBI_MAX_SWEEPS):
        off = _off_diagonal_norm(a)
        if off < tol:
            return np.real(np.diag(a)).copy(), v

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                magnitude = abs(apq)
                if magnitude < 1e-300:
                    continue

                # Phase-rotate the (p, q) block to real symmetric, then a real Givens rotation
                phase = apq / magnitude
                diff = a[q, q].real - a[p, p].real
                if magnitude < abs(diff) * 1.0e-36:
                    t = magnitude / diff
                else:
                    phi = diff / (2.0 * magnitude)
                    t = 1.0 / (abs(phi) + np.sqrt(phi * phi + 1.0))
                    if phi < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                w = np.array(
                    [[c, s], [-s * phase.conjugate(), c * phase.conjugate()]],
                    dtype=np.complex128,
                )
                idx = [p, q]
                a[:, idx] = a[:, idx] @ w
                a[idx, :] = w.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ w

    off = _off_diagonal_norm(a)
    if off < tol:
        return np.real(np.diag(a)).copy(), v
    logger.error(f"Jacobi solver exhausted {JACOBI_MAX_SWEEPS} sweeps on a {n}x{n} matrix")
    raise NoConvergenceError(JACOBI_MAX_SWEEPS, off)


def hermitian_eig(a: ArrayLike, method: Optional[str] = None) -> Spectrum:
    """
    Full spectrum of a Hermitian matrix, eigenvalues nonincreasing.

    The input is symmetrized to (a + a^dagger)/2 once it passes the 1e-9
    Hermiticity check. ``method`` selects the cyclic Jacobi solver
    ("jacobi") or LAPACK through numpy ("lapack"); the default comes from
    settings.EIG_METHOD.
    """
    h = _symmetrized(a)
    method = method or settings.EIG_METHOD

    if method == "jacobi":
        w, v = _jacobi(h)
    elif method == "lapack":
        w, v = np.linalg.eigh(h)
    else:
        raise ValueError(f"Unknown eigensolver '{method}'")

    order = np.argsort(-w, kind="stable")
    eigenvalues = np.ascontiguousarray(w[order], dtype=np.float64)
    eigenvectors = np.ascontiguousarray(v[:, order])
    eigenvalues.flags.writeable = False
    eigenvectors.flags.writeable = False
    return Spectrum(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def eigvalsh(a: ArrayLike, method: Optional[str] = None) -> NDArray[np.float64]:
    return np.array(hermitian_eig(a, method).eigenvalues)


def trace_norm(a: ArrayLike, method: Optional[str] = None) -> float:
    """Sum of the absolute eigenvalues of a Hermitian matrix"""
    return float(np.sum(np.abs(hermitian_eig(a, method).eigenvalues)))


def spectral_sign(a: ArrayLike, method: Optional[str] = None) -> ComplexMatrix:
    """Hermitian unitary V sign(L) V^dagger, nonnegative eigenvalues mapped to +1"""
    spectrum = hermitian_eig(a, method)
    signs = np.where(spectrum.eigenvalues >= 0.0, 1.0, -1.0)
    v = spectrum.eigenvectors
    return (v * signs) @ v.conj().T


def commutator(a: ArrayLike, b: ArrayLike) -> ComplexMatrix:
    ma, mb = as_matrix(a), as_matrix(b)
    require_square(ma)
    if ma.shape != mb.shape:
        raise DimensionMismatchError(f"Commutator of {ma.shape} and {mb.shape} matrices")
    return ma @ mb - mb @ ma


def commutator_norm(a: ArrayLike, b: ArrayLike) -> float:
    """Frobenius norm of ab - ba"""
    return frobenius_norm(commutator(a, b))
