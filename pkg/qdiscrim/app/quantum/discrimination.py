"""
Binary minimum-error discrimination.

POVM error, the Helstrom bound, Bell-basis machinery and the closed-form
results for two uses of the two-Pauli channel: product baseline, the
entangled ansatz, its optimum and validity threshold, and the
commutation families.
"""
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple
import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.exceptions import (
    DimensionMismatchError,
    InconsistentClosedFormError,
    InvalidStateError,
    ParameterOutOfRangeError,
)
from app.quantum.channels import KrausChannel, two_pauli
from app.quantum.linalg import (
    ComplexMatrix,
    Spectrum,
    as_matrix,
    commutator_norm,
    eigvalsh,
    hermitian_eig,
    projector,
)
from app.quantum.states import (
    BlochVector,
    DensityMatrix,
    bloch_density,
    normalize,
    validate_density_matrix,
)

logger = logging.getLogger(__name__)

Priors = Tuple[float, float]
EQUAL_PRIORS: Priors = (0.5, 0.5)
# Largest tolerated gap between the expanded and compact ansatz error forms
ANSATZ_FORMS_TOL = 1e-9

# Published values: x -> (product states, entangled states)
PUBLISHED_TABLE = {
    0.50: (0.250000, 0.241801),
    0.60: (0.200000, 0.188231),
    0.70: (0.150000, 0.137817),
    0.80: (0.010000, 0.090072),
    0.90: (0.050000, 0.044319),
    0.95: (0.025000, 0.022009),
}
# The printed product value at x = .80 disagrees with the piecewise formula (0.1)
PUBLISHED_TYPO_X = 0.80

# Orthogonal state vectors printed as evidence that orthogonal inputs can give
# non-commuting outputs; read as Bell-basis coefficients
COUNTEREXAMPLE_0 = (-0.459506, -0.870791, 0.127295, 0.119889)
COUNTEREXAMPLE_1 = (-0.578111, 0.163069, -0.770549, -0.213192)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

def _check_priors(priors: Sequence[float]) -> Priors:
    p0, p1 = (float(p) for p in priors)
    if p0 < 0.0 or p1 < 0.0 or abs(p0 + p1 - 1.0) > 1e-12:
        raise ParameterOutOfRangeError(f"Priors must be nonnegative and sum to 1, got ({p0}, {p1})")
    return p0, p1


def _as_density(state: ArrayLike) -> DensityMatrix:
    s = np.asarray(state, dtype=np.complex128)
    if s.ndim == 1:
        norm = np.linalg.norm(s)
        if abs(norm - 1.0) > 1e-10:
            raise InvalidStateError(f"Pure state has norm {norm:.12f}, expected 1")
        return projector(s)
    return validate_density_matrix(s)


@dataclass(frozen=True, eq=False)
class SignalPair:
    """Encoding of bit 0 and bit 1: pure vectors or density matrices, with priors"""
    state0: NDArray[np.complex128]
    state1: NDArray[np.complex128]
    prior0: float = 0.5
    prior1: float = 0.5
    rho0: DensityMatrix = field(init=False, repr=False, compare=False)
    rho1: DensityMatrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_priors((self.prior0, self.prior1))
        rho0, rho1 = _as_density(self.state0), _as_density(self.state1)
        if rho0.shape != rho1.shape:
            raise DimensionMismatchError(f"Signal states differ in dimension: {rho0.shape} vs {rho1.shape}")
        object.__setattr__(self, "rho0", rho0)
        object.__setattr__(self, "rho1", rho1)

    @classmethod
    def of(cls, state0: ArrayLike, state1: ArrayLike, priors: Sequence[float] = EQUAL_PRIORS) -> "SignalPair":
        p0, p1 = _check_priors(priors)
        return cls(
            np.asarray(state0, dtype=np.complex128),
            np.asarray(state1, dtype=np.complex128),
            p0,
            p1,
        )

    @property
    def priors(self) -> Priors:
        return self.prior0, self.prior1

    @property
    def dim(self) -> int:
        return self.rho0.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.state0.ndim == 1 and self.state1.ndim == 1

    def densities(self) -> Tuple[DensityMatrix, DensityMatrix]:
        return self.rho0, self.rho1

    def overlap(self) -> float:
        """|<0|1>| for pure pairs, tr(rho0 rho1) otherwise"""
        if self.is_pure:
            return float(abs(np.vdot(self.state0, self.state1)))
        return float(np.trace(self.rho0 @ self.rho1).real)

    def swapped(self) -> "SignalPair":
        return SignalPair(self.state1, self.state0, self.prior1, self.prior0)


@dataclass(frozen=True)
class BellCoefficients:
    """Amplitudes over (Phi+, Phi-, Psi+, Psi-)"""
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        norm2 = sum(abs(z) ** 2 for z in (self.a, self.b, self.c, self.d))
        if abs(norm2 - 1.0) > 1e-10:
            raise InvalidStateError(f"Bell coefficients have squared norm {norm2:.12f}, expected 1")

    @classmethod
    def from_array(cls, values: ArrayLike) -> "BellCoefficients":
        v = np.asarray(values, dtype=np.complex128).reshape(-1)
        if v.shape != (4,):
            raise DimensionMismatchError(f"Bell coefficients need 4 amplitudes, got {v.shape}")
        return cls(*(complex(z) for z in v))

    def as_array(self) -> NDArray[np.complex128]:
        return np.array([self.a, self.b, self.c, self.d], dtype=np.complex128)

    @property
    def is_real(self) -> bool:
        return bool(np.max(np.abs(self.as_array().imag)) <= 1e-12)


@dataclass(frozen=True, eq=False)
class Povm:
    elements: Tuple[ComplexMatrix, ...]

    def __post_init__(self):
        if not self.elements:
            raise DimensionMismatchError("A POVM needs at least one element")
        dim = self.elements[0].shape[0]
        for k, e in enumerate(self.elements):
            if e.shape != (dim, dim):
                raise DimensionMismatchError(f"POVM element {k} has shape {e.shape}, expected {dim}x{dim}")
            smallest = eigvalsh(e)[-1]
            if smallest < -1e-9:
                raise InvalidStateError(f"POVM element {k} has negative eigenvalue {smallest:.3e}")
        residual = float(np.max(np.abs(sum(self.elements) - np.eye(dim))))
        if residual > 1e-9:
            raise InvalidStateError(f"POVM elements sum to identity only within {residual:.3e}")

    @classmethod
    def of(cls, elements: Sequence[ArrayLike]) -> "Povm":
        return cls(tuple(as_matrix(e) for e in elements))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True, eq=False)
class DiscriminationResult:
    pe: float
    gamma_spectrum: Spectrum
    measurement: Povm

    @property
    def success(self) -> float:
        return 1.0 - self.pe


class OptimalEncoding(NamedTuple):
    pe: float
    z_squared: float
    alpha: float


# ---------------------------------------------------------------------------
# Error probabilities
# ---------------------------------------------------------------------------

def _check_pair_dims(r0: ComplexMatrix, r1: ComplexMatrix) -> None:
    if r0.shape != r1.shape or r0.shape[0] != r0.shape[1]:
        raise DimensionMismatchError(f"States must be square and equal in size, got {r0.shape} and {r1.shape}")


def povm_error(povm: Povm, r0: ArrayLike, r1: ArrayLike, priors: Sequence[float] = EQUAL_PRIORS) -> float:
    """sum_b min{pi_0 tr(R0 E_b), pi_1 tr(R1 E_b)}"""
    m0, m1 = as_matrix(r0), as_matrix(r1)
    _check_pair_dims(m0, m1)
    if povm.dim != m0.shape[0]:
        raise DimensionMismatchError(f"POVM acts on dimension {povm.dim}, states on {m0.shape[0]}")
    p0, p1 = _check_priors(priors)
    total = 0.0
    for e in povm.elements:
        total += min(p0 * np.trace(m0 @ e).real, p1 * np.trace(m1 @ e).real)
    return float(max(total, 0.0))


def helstrom_error(
    r0: ArrayLike,
    r1: ArrayLike,
    priors: Sequence[float] = EQUAL_PRIORS,
    method: Optional[str] = None,
) -> DiscriminationResult:
    """
    Minimum error for telling R0 from R1 and the measurement achieving it.

    Gamma = pi_1 R1 - pi_0 R0; pe = (1 - tr|Gamma|) / 2, which for equal
    priors is 1/2 - tr|R1 - R0| / 4. The measurement projects onto the
    negative (guess 0) and nonnegative (guess 1) eigenspaces of Gamma.
    """
    m0, m1 = as_matrix(r0), as_matrix(r1)
    _check_pair_dims(m0, m1)
    p0, p1 = _check_priors(priors)

    gamma = p1 * m1 - p0 * m0
    spectrum = hermitian_eig(gamma, method)
    pe = 0.5 * (1.0 - float(np.sum(np.abs(spectrum.eigenvalues))))
    pe = min(max(pe, 0.0), min(p0, p1))

    positive = spectrum.eigenvalues >= 0.0
    guess1 = spectrum.projector(positive)
    guess0 = spectrum.projector(~positive)
    measurement = Povm((guess0, guess1))
    return DiscriminationResult(pe=pe, gamma_spectrum=spectrum, measurement=measurement)


def helstrom_measurement(
    r0: ArrayLike, r1: ArrayLike, priors: Sequence[float] = EQUAL_PRIORS
) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """(guess 0, guess 1) projectors of the optimal measurement"""
    guess0, guess1 = helstrom_error(r0, r1, priors).measurement.elements
    return guess0, guess1


def helstrom_pe(r0: ComplexMatrix, r1: ComplexMatrix, priors: Priors = EQUAL_PRIORS) -> float:
    """Scalar Helstrom error without the measurement; LAPACK backend for inner loops"""
    gamma = priors[1] * r1 - priors[0] * r0
    gamma = (gamma + gamma.conj().T) / 2
    return 0.5 * (1.0 - float(np.sum(np.abs(np.linalg.eigvalsh(gamma)))))


def trace_distance(r0: ArrayLike, r1: ArrayLike) -> float:
    m0, m1 = as_matrix(r0), as_matrix(r1)
    _check_pair_dims(m0, m1)
    return 0.5 * float(np.sum(np.abs(eigvalsh(m0 - m1))))


def two_use_helstrom(channel: KrausChannel, pair: SignalPair, method: Optional[str] = None) -> DiscriminationResult:
    r0, r1 = pair.densities()
    return helstrom_error(channel.apply_two(r0), channel.apply_two(r1), pair.priors, method)


def single_use_helstrom(channel: KrausChannel, pair: SignalPair, method: Optional[str] = None) -> DiscriminationResult:
    r0, r1 = pair.densities()
    return helstrom_error(channel.apply(r0), channel.apply(r1), pair.priors, method)


# ---------------------------------------------------------------------------
# Bell basis
# ---------------------------------------------------------------------------

_S = 1.0 / np.sqrt(2.0)
# Columns: Phi+, Phi-, Psi+, Psi- over |up up>, |up down>, |down up>, |down down>
BELL_BASIS = np.array(
    [
        [_S, _S, 0.0, 0.0],
        [0.0, 0.0, _S, _S],
        [0.0, 0.0, _S, -_S],
        [_S, -_S, 0.0, 0.0],
    ],
    dtype=np.complex128,
)
BELL_BASIS.flags.writeable = False
BELL_LABELS = ("Phi+", "Phi-", "Psi+", "Psi-")


def bell_basis() -> ComplexMatrix:
    return BELL_BASIS.copy()


def bell_state(index: int) -> NDArray[np.complex128]:
    return BELL_BASIS[:, index].copy()


def bell_to_computational(coeffs: BellCoefficients) -> NDArray[np.complex128]:
    return BELL_BASIS @ coeffs.as_array()


def computational_to_bell(vec: ArrayLike) -> BellCoefficients:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    if v.shape != (4,):
        raise DimensionMismatchError(f"Two-qubit vectors have 4 components, got {v.shape}")
    return BellCoefficients.from_array(BELL_BASIS.conj().T @ v)


def to_bell_frame(m: ArrayLike) -> ComplexMatrix:
    return BELL_BASIS.conj().T @ as_matrix(m) @ BELL_BASIS


def from_bell_frame(m: ArrayLike) -> ComplexMatrix:
    return BELL_BASIS @ as_matrix(m) @ BELL_BASIS.conj().T


def _require_x(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ParameterOutOfRangeError(f"Channel parameter x must lie in [0, 1], got {x}")
    return float(x)


def two_pauli_output_bell(coeffs: BellCoefficients, x: float) -> DensityMatrix:
    """
    Two uses of the two-Pauli channel on a pure input, written in the
    (Phi+, Phi-, Psi+, Psi-) frame.

    Real amplitudes use the closed form with e = (1 - 2x + 3x^2)/2,
    f = (1 - x)^2/2, g = x(1 - x), h = 2x - 1, k = x(2x - 1). Complex
    amplitudes go through the Kraus sum and a change of basis.
    """
    x = _require_x(x)
    if not coeffs.is_real:
        rho = projector(bell_to_computational(coeffs))
        return to_bell_frame(two_pauli(x).apply_two_unchecked(rho))

    a, b, c, d = (z.real for z in (coeffs.a, coeffs.b, coeffs.c, coeffs.d))
    e = 0.5 * (1.0 - 2.0 * x + 3.0 * x * x)
    f = 0.5 * (1.0 - x) ** 2
    g = x * (1.0 - x)
    h = 2.0 * x - 1.0
    k = x * (2.0 * x - 1.0)

    out = np.array(
        [
            [e * a * a + f * b * b + g * c * c + g * d * d, h * a * b, x * a * c, k * a * d],
            [h * a * b, f * a * a + e * b * b + g * c * c + g * d * d, k * b * c, x * b * d],
            [x * a * c, k * b * c, g * a * a + g * b * b + e * c * c + f * d * d, h * c * d],
            [k * a * d, x * b * d, h * c * d, g * a * a + g * b * b + f * c * c + e * d * d],
        ],
        dtype=np.complex128,
    )
    return out


# ---------------------------------------------------------------------------
# Two-Pauli closed forms
# ---------------------------------------------------------------------------

def product_baseline_pe(x: float) -> float:
    """Best error with product inputs rho_s (x) rho_s: x below 1/3, (1 - x)/2 above"""
    x = _require_x(x)
    if x <= 1.0 / 3.0:
        return x
    return 0.5 - 0.5 * x


def product_pair(a: BlochVector) -> SignalPair:
    """rho_+ (x) rho_+ for bit 0 and rho_- (x) rho_- for bit 1"""
    plus, minus = bloch_density(a), bloch_density(a.negated())
    return SignalPair(np.kron(plus, plus), np.kron(minus, minus))


def ansatz_states(alpha: float) -> SignalPair:
    """|0> = cos(a) Phi+ + sin(a) Psi+, |1> = -sin(a) Phi+ + cos(a) Psi+"""
    c, s = np.cos(alpha), np.sin(alpha)
    phi_plus, psi_plus = BELL_BASIS[:, 0], BELL_BASIS[:, 2]
    return SignalPair(c * phi_plus + s * psi_plus, -s * phi_plus + c * psi_plus)


def ansatz_coefficients(x: float) -> Tuple[float, float]:
    """(F, G) of the compact error form"""
    f = 0.25 * (1.0 - x) * (1.0 - 5.0 * x) * (1.0 - 2.0 * x + 5.0 * x * x)
    g = 0.5 * (1.0 - x) * (1.0 - 3.0 * x)
    return f, g


def ansatz_pe_expanded(alpha: float, x: float) -> float:
    x = _require_x(x)
    c2, s2 = np.cos(2.0 * alpha), np.sin(2.0 * alpha)
    root = np.sqrt(0.25 * (1.0 - 4.0 * x + 5.0 * x * x) ** 2 * c2 * c2 + x * x * s2 * s2)
    return float(0.5 - 0.5 * (root + 0.5 * (1.0 - x) * abs((1.0 - 3.0 * x) * c2)))


def ansatz_pe_compact(z: float, x: float) -> float:
    """1/2 - (sqrt(F Z^2 + x^2) + |G Z|)/2"""
    x = _require_x(x)
    f, g = ansatz_coefficients(x)
    return float(0.5 - 0.5 * (np.sqrt(max(f * z * z + x * x, 0.0)) + abs(g * z)))


def ansatz_pe(alpha: float, x: float) -> float:
    """Helstrom error of the ansatz pair at angle alpha through two uses of two_pauli(x)"""
    expanded = ansatz_pe_expanded(alpha, x)
    compact = ansatz_pe_compact(np.cos(2.0 * alpha), x)
    if abs(expanded - compact) > ANSATZ_FORMS_TOL:
        logger.error(f"Ansatz error forms disagree at alpha={alpha}, x={x}")
        raise InconsistentClosedFormError(expanded, compact)
    return compact


def ansatz_threshold() -> float:
    """Smallest x for which the interior optimum satisfies Z^2 <= 1"""
    r = 15.0 * np.sqrt(330.0) - 73.0
    return float(4.0 / 15.0 - (41.0 / 30.0) * r ** (-1.0 / 3.0) + (1.0 / 30.0) * r ** (1.0 / 3.0))


def optimal_z_squared(x: float) -> float:
    return (1.0 - 3.0 * x) ** 2 / (4.0 * x * (5.0 * x - 1.0) * (1.0 - 2.0 * x + 5.0 * x * x))


def threshold_boundary_residual(x: float) -> float:
    """G^2 x^2 / (F (F - G^2)) - 1, zero at the validity threshold"""
    f, g = ansatz_coefficients(x)
    return float(g * g * x * x / (f * (f - g * g)) - 1.0)


def _alpha_from_z(z: float) -> float:
    return 0.5 * float(np.arccos(min(max(z, -1.0), 1.0)))


def optimal_entangled(x: float) -> OptimalEncoding:
    """Interior optimum of the ansatz: pe = 1/2 - 2 sqrt(x^5 / ((5x - 1)(1 - 2x + 5x^2)))"""
    x = _require_x(x)
    threshold = ansatz_threshold()
    if x < threshold - 1e-12:
        raise ParameterOutOfRangeError(
            f"Interior ansatz optimum requires x >= {threshold:.6f}, got {x}"
        )
    z2 = min(optimal_z_squared(x), 1.0)
    pe = 0.5 - 2.0 * np.sqrt(x ** 5 / ((5.0 * x - 1.0) * (1.0 - 2.0 * x + 5.0 * x * x)))
    return OptimalEncoding(pe=float(pe), z_squared=float(z2), alpha=_alpha_from_z(np.sqrt(z2)))


def ansatz_optimum(x: float) -> OptimalEncoding:
    """Global minimum of the ansatz over Z in [0, 1] for any x in [0, 1]"""
    x = _require_x(x)
    candidates = [0.0, 1.0]
    f, _ = ansatz_coefficients(x)
    if x > 0.2 and f < 0.0:
        z2 = optimal_z_squared(x)
        if 0.0 <= z2 <= 1.0:
            candidates.append(float(np.sqrt(z2)))
    best_z = min(candidates, key=lambda z: ansatz_pe_compact(z, x))
    return OptimalEncoding(
        pe=ansatz_pe_compact(best_z, x),
        z_squared=best_z * best_z,
        alpha=_alpha_from_z(best_z),
    )


def best_encoding(x: float) -> Tuple[str, float]:
    """Which encoding wins at x; equal values go to the product encoding"""
    product = product_baseline_pe(x)
    entangled = ansatz_optimum(x).pe
    if entangled < product - 1e-12:
        return "entangled", entangled
    return "product", product


# ---------------------------------------------------------------------------
# Commutation families
# ---------------------------------------------------------------------------

def commutation_probe(pair: SignalPair, x: float) -> float:
    """Frobenius norm of [Phi(R1), Phi(R0)] for two uses of two_pauli(x)"""
    channel = two_pauli(x)
    r0, r1 = pair.densities()
    return commutator_norm(channel.apply_two_unchecked(r1), channel.apply_two_unchecked(r0))


def bell_rotation_pair(alpha: float, b1: int, b2: int) -> SignalPair:
    """cos(a) B1 + sin(a) B2 and -sin(a) B1 + cos(a) B2 for Bell states B1 != B2"""
    if b1 == b2:
        raise ValueError("Bell rotation needs two different Bell states")
    v1, v2 = BELL_BASIS[:, b1], BELL_BASIS[:, b2]
    c, s = np.cos(alpha), np.sin(alpha)
    return SignalPair(c * v1 + s * v2, -s * v1 + c * v2)


def two_plane_pair(theta0: float, theta1: float) -> SignalPair:
    """|0> in span(Phi+, Psi+), |1> in span(Phi-, Psi-)"""
    v0 = np.cos(theta0) * BELL_BASIS[:, 0] + np.sin(theta0) * BELL_BASIS[:, 2]
    v1 = np.cos(theta1) * BELL_BASIS[:, 1] + np.sin(theta1) * BELL_BASIS[:, 3]
    return SignalPair(v0, v1)


def published_counterexample_pair() -> SignalPair:
    """The printed six-digit vectors, renormalized and mapped out of the Bell frame"""
    v0 = BELL_BASIS @ normalize(COUNTEREXAMPLE_0)
    v1 = BELL_BASIS @ normalize(COUNTEREXAMPLE_1)
    return SignalPair(v0, v1)



def best_known_pair(x: float) -> SignalPair:
    """
    Lowest-error pair known in closed form for two uses of two_pauli(x):
    the ansatz at its optimum when it wins, otherwise the product encoding
    along sigma_3 (x <= 1/3) or sigma_1.
    """
    winner, _ = best_encoding(x)
    if winner == "entangled":
        return ansatz_states(ansatz_optimum(x).alpha)
    if x <= 1.0 / 3.0:
        return product_pair(BlochVector(0.0, 0.0, 1.0))
    return product_pair(BlochVector(1.0, 0.0, 0.0))
