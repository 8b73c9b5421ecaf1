"""
Density-matrix helpers: validation, Bloch vectors and seeded random states
"""
from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.config import settings
from app.exceptions import InvalidStateError, ParameterOutOfRangeError
from app.quantum.linalg import ComplexMatrix, as_matrix, eigvalsh, hermitian_deviation, projector

logger = logging.getLogger(__name__)

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)
PAULIS = (SIGMA_1, SIGMA_2, SIGMA_3)

# |up> = (1, 0) and |down> = (0, 1), the sigma_3 eigenvectors
UP = np.array([1, 0], dtype=np.complex128)
DOWN = np.array([0, 1], dtype=np.complex128)

for _m in (SIGMA_1, SIGMA_2, SIGMA_3, IDENTITY_2, UP, DOWN):
    _m.flags.writeable = False

DensityMatrix = ComplexMatrix


@dataclass(frozen=True)
class BlochVector:
    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        if self.length_squared > 1.0 + 1e-12:
            raise ParameterOutOfRangeError(
                f"Bloch vector ({self.a1}, {self.a2}, {self.a3}) is longer than 1"
            )

    @property
    def length_squared(self) -> float:
        return self.a1 ** 2 + self.a2 ** 2 + self.a3 ** 2

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.a1, self.a2, self.a3])

    def negated(self) -> "BlochVector":
        return BlochVector(-self.a1, -self.a2, -self.a3)


def validate_density_matrix(rho: ArrayLike, tol: Optional[float] = None) -> DensityMatrix:
    """Return rho as a complex matrix or raise InvalidStateError"""
    tol = settings.STATE_TOL if tol is None else tol
    try:
        m = as_matrix(rho)
    except ValueError as e:
        raise InvalidStateError(str(e)) from e
    if m.shape[0] != m.shape[1]:
        raise InvalidStateError(f"Density matrix must be square, got {m.shape}")

    deviation = hermitian_deviation(m)
    if deviation > tol:
        raise InvalidStateError(f"Density matrix is not Hermitian (deviation {deviation:.3e})")
    trace = np.trace(m).real
    if abs(trace - 1.0) > tol:
        raise InvalidStateError(f"Density matrix trace is {trace:.12f}, expected 1")
    smallest = eigvalsh(m)[-1]
    if smallest < -tol:
        raise InvalidStateError(f"Density matrix has negative eigenvalue {smallest:.3e}")
    return m


def normalize(vec: ArrayLike) -> NDArray[np.complex128]:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise InvalidStateError("Cannot normalize the zero vector")
    return v / norm


def pure_density(vec: ArrayLike) -> DensityMatrix:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise InvalidStateError(f"State vector norm is {np.linalg.norm(v):.12f}, expected 1")
    return projector(v)


def bloch_density(a: BlochVector) -> DensityMatrix:
    """rho = (I + a.sigma) / 2"""
    return 0.5 * (IDENTITY_2 + a.a1 * SIGMA_1 + a.a2 * SIGMA_2 + a.a3 * SIGMA_3)


def bloch_of(rho: ArrayLike) -> BlochVector:
    m = as_matrix(rho)
    if m.shape != (2, 2):
        raise InvalidStateError(f"Bloch vectors describe qubits only, got {m.shape}")
    comps = [float(np.trace(m @ s).real) for s in PAULIS]
    # Clip rounding that would push a pure state past the sphere
    length = np.sqrt(sum(c * c for c in comps))
    if length > 1.0:
        comps = [c / length for c in comps]
    return BlochVector(*comps)


def bloch_direction(theta: float, phi: float) -> BlochVector:
    return BlochVector(
        float(np.sin(theta) * np.cos(phi)),
        float(np.sin(theta) * np.sin(phi)),
        float(np.cos(theta)),
    )


def qubit_ket(theta: float, phi: float) -> NDArray[np.complex128]:
    """Pure qubit state with Bloch angles (theta, phi)"""
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=np.complex128)


def random_pure_state(dim: int, rng: np.random.Generator) -> NDArray[np.complex128]:
    """Normalized vector of independent standard complex Gaussians"""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_mixed_state(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Wishart-style G G^dagger normalized to unit trace"""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    w = g @ g.conj().T
    w = (w + w.conj().T) / 2
    return w / np.trace(w).real


def maximally_mixed(dim: int) -> DensityMatrix:
    return np.eye(dim, dtype=np.complex128) / dim
