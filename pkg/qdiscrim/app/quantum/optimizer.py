"""
Numerical search for the best pair of inputs to two uses of a qubit channel.

Three independent routes to the same number:

* ``search_optimal_inputs``: Nelder-Mead over the angles of an orthonormal
  pair of two-qubit vectors, with seeded random restarts.
* ``seesaw``: alternating exact maximization of
  1/2 tr((rho1 - rho0) Phi*(U + U^dagger)) over the unitary U and the inputs.
* ``dominance_check``: random mixed and nonorthogonal pairs, none of which
  may beat the orthogonal-pure optimum.

Restart k always draws from stream(seed, k), so reports do not depend on
the number of joblib workers.
"""
from dataclasses import dataclass, field
from functools import partial
from typing import List, NamedTuple, Optional, Sequence, Tuple
import logging

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize, minimize_scalar

from app.config import settings
from app.exceptions import DimensionMismatchError
from app.quantum.channels import KrausChannel
from app.quantum.discrimination import SignalPair, ansatz_pe, helstrom_pe
from app.quantum.linalg import hermitian_eig, projector, spectral_sign
from app.quantum.rng import make_rng, stream
from app.quantum.states import qubit_ket, random_mixed_state, random_pure_state

logger = logging.getLogger(__name__)

# Planes of the six Givens rotations of a 4x4 unitary, applied left to right
GIVENS_PLANES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
# 6 rotation angles, 6 rotation phases, 4 diagonal phases
N_ANGLES = 16
N_PRODUCT_ANGLES = 8

# Restarts only pick a basin; the polish and the seesaw ascent supply the precision
RESTART_XATOL = 1e-6
RESTART_FATOL = 1e-9
POLISH_ROUNDS = 2
POLISH_STEP = 0.1
DOMINANCE_MARGIN = 1e-9


# ---------------------------------------------------------------------------
# Parameterization
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PairParameterization:
    """
    Angles of U = D(phases) G_01 G_02 G_03 G_12 G_13 G_23; the encoded pair is
    the first two columns of U. Each Givens rotation carries its own phase.
    """
    angles: NDArray[np.float64]

    def __post_init__(self):
        if self.angles.shape != (N_ANGLES,):
            raise DimensionMismatchError(f"Pair parameterization needs {N_ANGLES} angles, got {self.angles.shape}")

    def columns(self) -> NDArray[np.complex128]:
        return _pair_columns(self.angles)

    def decode(self) -> SignalPair:
        cols = self.columns()
        return SignalPair(cols[:, 0].copy(), cols[:, 1].copy())


def _pair_columns(angles: NDArray[np.float64]) -> NDArray[np.complex128]:
    cols = np.zeros((4, 2), dtype=np.complex128)
    cols[0, 0] = cols[1, 1] = 1.0
    thetas, phis, phases = angles[:6], angles[6:12], angles[12:]

    for (p, q), theta, phi in reversed(list(zip(GIVENS_PLANES, thetas, phis))):
        c, s = np.cos(theta), np.sin(theta)
        w = np.exp(1j * phi)
        row_p, row_q = cols[p].copy(), cols[q].copy()
        cols[p] = c * row_p - w * s * row_q
        cols[q] = s * row_p / w + c * row_q

    return cols * np.exp(1j * phases)[:, None]


def decode_pair(angles: ArrayLike) -> SignalPair:
    return PairParameterization(np.asarray(angles, dtype=np.float64)).decode()


def random_angles(rng: np.random.Generator, count: int = N_ANGLES) -> NDArray[np.float64]:
    return rng.uniform(0.0, 2.0 * np.pi, count)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SearchReport:
    best_pe: float
    best_pair: SignalPair
    restarts_used: int
    converged: bool
    history: Tuple[float, ...]
    method: str = "search"
    # Seesaw only: half-step objective values of each restart
    trajectories: Tuple[Tuple[float, ...], ...] = field(default=(), repr=False)
    iterations: Tuple[int, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class DominanceReport:
    samples: int
    violations: int
    worst_margin: float
    reference_pe: float
    best_sampled_pe: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


class _RestartOutcome(NamedTuple):
    pe: float
    x: NDArray[np.float64]
    converged: bool


class _SeesawOutcome(NamedTuple):
    pe: float
    v0: NDArray[np.complex128]
    v1: NDArray[np.complex128]
    objectives: Tuple[float, ...]
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------

def _vector_pair_error(channel: KrausChannel, v0: NDArray[np.complex128], v1: NDArray[np.complex128]) -> float:
    r0 = channel.apply_two_unchecked(np.outer(v0, v0.conj()))
    r1 = channel.apply_two_unchecked(np.outer(v1, v1.conj()))
    return helstrom_pe(r0, r1)


def _entangled_error(channel: KrausChannel, angles: NDArray[np.float64]) -> float:
    cols = _pair_columns(angles)
    return _vector_pair_error(channel, cols[:, 0], cols[:, 1])


def _product_vectors(angles: NDArray[np.float64]) -> Tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    kets = [qubit_ket(angles[2 * k], angles[2 * k + 1]) for k in range(4)]
    return np.kron(kets[0], kets[1]), np.kron(kets[2], kets[3])


def _product_error(channel: KrausChannel, angles: NDArray[np.float64]) -> float:
    v0, v1 = _product_vectors(angles)
    return _vector_pair_error(channel, v0, v1)


def _require_qubit(channel: KrausChannel) -> None:
    if channel.dim != 2:
        raise DimensionMismatchError(
            f"Angle search covers qubit channels only; '{channel.name}' acts on dimension {channel.dim}"
        )


# ---------------------------------------------------------------------------
# Nelder-Mead with restarts
# ---------------------------------------------------------------------------

def _nelder_mead(
    objective,
    x0: NDArray[np.float64],
    max_iters: int,
    initial_simplex=None,
    xatol: float = 1e-10,
    fatol: Optional[float] = None,
):
    options = {
        "maxiter": max_iters,
        "xatol": xatol,
        "fatol": settings.CONVERGENCE_TOL if fatol is None else fatol,
        "adaptive": True,
    }
    if initial_simplex is not None:
        options["initial_simplex"] = initial_simplex
    return minimize(objective, x0, method="Nelder-Mead", options=options)


def _simplex_around(x: NDArray[np.float64], step: float) -> NDArray[np.float64]:
    simplex = np.tile(x, (len(x) + 1, 1))
    simplex[1:] += step * np.eye(len(x))
    return simplex


def _polish(objective, x: NDArray[np.float64], value: float, max_iters: int) -> Tuple[NDArray[np.float64], float]:
    """Restart the simplex around the incumbent with shrinking size until it stops paying"""
    step = POLISH_STEP
    for _ in range(POLISH_ROUNDS):
        result = _nelder_mead(objective, x, max_iters, _simplex_around(x, step))
        gain = value - float(result.fun)
        if gain > 0.0:
            x, value = result.x, float(result.fun)
        if gain <= settings.CONVERGENCE_TOL:
            break
        step *= 0.5
    return x, value


def _restart(objective, n_angles: int, seed: int, index: int, max_iters: int) -> _RestartOutcome:
    rng = stream(seed, index)
    result = _nelder_mead(objective, random_angles(rng, n_angles), max_iters, xatol=RESTART_XATOL, fatol=RESTART_FATOL)
    if not result.success:
        logger.debug(f"Restart {index} stopped without converging: {result.message}")
    return _RestartOutcome(pe=float(result.fun), x=result.x, converged=bool(result.success))


def _multistart(objective, n_angles: int, restarts: int, seed: int, max_iters: int, n_jobs: int):
    if restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {restarts}")
    outcomes: List[_RestartOutcome] = Parallel(n_jobs=n_jobs)(
        delayed(_restart)(objective, n_angles, seed, k, max_iters) for k in range(restarts)
    )
    best = min(range(restarts), key=lambda k: outcomes[k].pe)
    x, value = _polish(objective, outcomes[best].x, outcomes[best].pe, max_iters)
    history = tuple(o.pe for o in outcomes)
    return x, value, outcomes[best].converged, history


def search_optimal_inputs(
    channel: KrausChannel,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    max_iters: Optional[int] = None,
    n_jobs: int = 1,
    polish: bool = True,
) -> SearchReport:
    """
    Smallest two-use Helstrom error over orthonormal pure input pairs.

    Every restart runs a coarse Nelder-Mead from uniform random angles; the
    best one is re-polished with fresh simplices, then (``polish``) handed to
    the seesaw ascent, which can only lower the error.
    """
    _require_qubit(channel)
    restarts = settings.RESTARTS if restarts is None else restarts
    seed = settings.SEED if seed is None else seed
    max_iters = settings.MAX_ITERS if max_iters is None else max_iters

    objective = partial(_entangled_error, channel)
    x, value, converged, history = _multistart(objective, N_ANGLES, restarts, seed, max_iters, n_jobs)
    cols = _pair_columns(x)
    v0, v1 = cols[:, 0].copy(), cols[:, 1].copy()

    if polish:
        ascent = _seesaw_from(channel, v0, v1, max_iters)
        if ascent.pe < value:
            value, v0, v1 = ascent.pe, ascent.v0, ascent.v1

    logger.info(f"Search on '{channel.name}': best pe {value:.9f} over {restarts} restarts")
    return SearchReport(
        best_pe=value,
        best_pair=SignalPair(v0, v1),
        restarts_used=restarts,
        converged=converged,
        history=history,
        method="search",
    )


def search_product_inputs(
    channel: KrausChannel,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    max_iters: Optional[int] = None,
    n_jobs: int = 1,
) -> SearchReport:
    """Best |psi0>|chi0> versus |psi1>|chi1> encoding, four free Bloch directions"""
    _require_qubit(channel)
    restarts = settings.RESTARTS if restarts is None else restarts
    seed = settings.SEED if seed is None else seed
    max_iters = settings.MAX_ITERS if max_iters is None else max_iters

    objective = partial(_product_error, channel)
    x, value, converged, history = _multistart(objective, N_PRODUCT_ANGLES, restarts, seed, max_iters, n_jobs)
    v0, v1 = _product_vectors(x)

    logger.info(f"Product search on '{channel.name}': best pe {value:.9f}")
    return SearchReport(
        best_pe=value,
        best_pair=SignalPair(v0, v1),
        restarts_used=restarts,
        converged=converged,
        history=history,
        method="product",
    )


# ---------------------------------------------------------------------------
# Seesaw
# ---------------------------------------------------------------------------

def _random_orthonormal_pair(dim: int, rng: np.random.Generator) -> Tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    z = rng.standard_normal((dim, 2)) + 1j * rng.standard_normal((dim, 2))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q[:, 0].copy(), q[:, 1].copy()


def _seesaw_from(
    channel: KrausChannel,
    v0: NDArray[np.complex128],
    v1: NDArray[np.complex128],
    max_iters: int,
) -> _SeesawOutcome:
    objectives: List[float] = []
    previous = -np.inf
    converged = False
    iterations = 0

    for iterations in range(1, max_iters + 1):
        delta = channel.apply_two_unchecked(projector(v1)) - channel.apply_two_unchecked(projector(v0))
        u = spectral_sign(delta, method="lapack")
        objectives.append(float(np.trace(u @ delta).real))

        # U is Hermitian, so U + U^dagger = 2U
        spectrum = hermitian_eig(channel.conjugate_apply_two(2.0 * u), method="lapack")
        v1 = spectrum.eigenvectors[:, 0].copy()
        v0 = spectrum.eigenvectors[:, -1].copy()
        objective = 0.5 * float(spectrum.eigenvalues[0] - spectrum.eigenvalues[-1])
        objectives.append(objective)

        if objective - previous < settings.CONVERGENCE_TOL:
            converged = True
            break
        previous = objective

    delta = channel.apply_two_unchecked(projector(v1)) - channel.apply_two_unchecked(projector(v0))
    delta = (delta + delta.conj().T) / 2
    pe = 0.5 - 0.25 * float(np.sum(np.abs(np.linalg.eigvalsh(delta))))
    return _SeesawOutcome(pe, v0, v1, tuple(objectives), iterations, converged)


def _seesaw_restart(channel: KrausChannel, seed: int, index: int, max_iters: int) -> _SeesawOutcome:
    v0, v1 = _random_orthonormal_pair(channel.dim ** 2, stream(seed, index))
    outcome = _seesaw_from(channel, v0, v1, max_iters)
    logger.debug(f"Seesaw restart {index}: pe {outcome.pe:.9f} after {outcome.iterations} iterations")
    return outcome


def seesaw(
    channel: KrausChannel,
    seed: Optional[int] = None,
    max_iters: Optional[int] = None,
    restarts: Optional[int] = None,
    n_jobs: int = 1,
) -> SearchReport:
    """
    Alternating ascent on 1/2 tr((rho1 - rho0) Phi*(U + U^dagger)).

    U-step: U = sign of Phi(rho1 - rho0), which attains its trace norm.
    Input step: rho1, rho0 = top and bottom eigenprojectors of Phi*(U + U^dagger).
    Each half-step is an exact maximization, so the recorded objective never
    decreases. A run stops once an iteration gains less than
    settings.CONVERGENCE_TOL. Works for any input dimension.
    """
    seed = settings.SEED if seed is None else seed
    max_iters = settings.MAX_ITERS if max_iters is None else max_iters
    restarts = settings.RESTARTS if restarts is None else restarts
    if restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {restarts}")

    outcomes: List[_SeesawOutcome] = Parallel(n_jobs=n_jobs)(
        delayed(_seesaw_restart)(channel, seed, k, max_iters) for k in range(restarts)
    )
    best = min(outcomes, key=lambda o: o.pe)
    if not best.converged:
        logger.warning(f"Best seesaw run on '{channel.name}' used all {max_iters} iterations")

    logger.info(f"Seesaw on '{channel.name}': best pe {best.pe:.9f} over {restarts} restarts")
    return SearchReport(
        best_pe=best.pe,
        best_pair=SignalPair(best.v0, best.v1),
        restarts_used=restarts,
        converged=best.converged,
        history=tuple(o.pe for o in outcomes),
        method="seesaw",
        trajectories=tuple(o.objectives for o in outcomes),
        iterations=tuple(o.iterations for o in outcomes),
    )


def optimal_orthogonal_pe(
    channel: KrausChannel,
    seed: Optional[int] = None,
    restarts: Optional[int] = None,
    n_jobs: int = 1,
) -> float:
    """Best of seesaw and, for qubit channels, the angle search"""
    best = seesaw(channel, seed=seed, restarts=restarts, n_jobs=n_jobs).best_pe
    if channel.dim == 2:
        best = min(best, search_optimal_inputs(channel, restarts=restarts, seed=seed, n_jobs=n_jobs).best_pe)
    return best


# ---------------------------------------------------------------------------
# Dominance of orthogonal pure inputs
# ---------------------------------------------------------------------------

def _sample_pair(dim: int, kind: int, rng: np.random.Generator):
    if kind == 0:
        return (
            random_mixed_state(dim, rng, rank=int(rng.integers(1, dim + 1))),
            random_mixed_state(dim, rng, rank=int(rng.integers(1, dim + 1))),
        )
    if kind == 1:
        return projector(random_pure_state(dim, rng)), projector(random_pure_state(dim, rng))
    return projector(random_pure_state(dim, rng)), random_mixed_state(dim, rng)


def dominance_check(
    channel: KrausChannel,
    samples: int,
    seed: Optional[int] = None,
    reference_pe: Optional[float] = None,
    restarts: Optional[int] = None,
) -> DominanceReport:
    """
    Draw mixed, nonorthogonal pure and pure-versus-mixed pairs in rotation and
    compare their two-use Helstrom error with the orthogonal-pure optimum.
    A violation is a sample beating the optimum by more than 1e-9.
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    seed = settings.SEED if seed is None else seed
    if reference_pe is None:
        reference_pe = optimal_orthogonal_pe(channel, seed=seed, restarts=restarts)

    rng = make_rng(seed)
    dim = channel.dim ** 2
    margins = np.empty(samples)
    for k in range(samples):
        r0, r1 = _sample_pair(dim, k % 3, rng)
        pe = helstrom_pe(channel.apply_two_unchecked(r0), channel.apply_two_unchecked(r1))
        margins[k] = pe - reference_pe

    violations = int(np.sum(margins < -DOMINANCE_MARGIN))
    if violations:
        logger.warning(f"{violations} sampled pairs beat the orthogonal-pure optimum on '{channel.name}'")
    return DominanceReport(
        samples=samples,
        violations=violations,
        worst_margin=float(np.min(margins)),
        reference_pe=float(reference_pe),
        best_sampled_pe=float(reference_pe + np.min(margins)),
    )


def pair_error(channel: KrausChannel, states: Sequence[ArrayLike]) -> float:
    """Two-use Helstrom error of an arbitrary (rho0, rho1) pair, equal priors"""
    r0, r1 = SignalPair.of(*states).densities()
    return helstrom_pe(channel.apply_two(r0), channel.apply_two(r1))


# ---------------------------------------------------------------------------
# Ansatz fit
# ---------------------------------------------------------------------------

def fit_ansatz_alpha(x: float) -> Tuple[float, float]:
    """Numerically best angle of the Bell-plane ansatz at x and its error"""
    result = minimize_scalar(
        lambda alpha: ansatz_pe(alpha, x),
        bounds=(0.0, np.pi / 4),
        method="bounded",
        options={"xatol": 1e-10},
    )
    alpha = float(result.x)
    # Brent never probes the endpoints, where the optimum sits below the threshold
    best = min((alpha, 0.0, np.pi / 4), key=lambda a: ansatz_pe(a, x))
    return float(best), ansatz_pe(best, x)
