"""
Classical information carried by a set of channel outputs.

Mutual information between the sent label and a measurement outcome, and
lower bounds on the capacity of a fixed output set obtained by optimizing
projective measurements and the input priors. Entropies are in bits.
"""
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import expm
from scipy.optimize import minimize, minimize_scalar

from app.config import settings
from app.exceptions import DimensionMismatchError, ParameterOutOfRangeError
from app.quantum.channels import KrausChannel
from app.quantum.discrimination import DiscriminationResult, Povm
from app.quantum.linalg import ComplexMatrix, as_matrix, projector
from app.quantum.optimizer import seesaw
from app.quantum.rng import make_rng, stream
from app.quantum.states import DensityMatrix, bloch_density, bloch_direction, validate_density_matrix

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-15
PRIOR_XATOL = 1e-10
INNER_MAX_ITERS = 400


@dataclass(frozen=True, eq=False)
class Ensemble:
    states: Tuple[DensityMatrix, ...]
    priors: Tuple[float, ...]

    def __post_init__(self):
        if not self.states:
            raise DimensionMismatchError("An ensemble needs at least one state")
        if len(self.states) != len(self.priors):
            raise DimensionMismatchError(f"{len(self.states)} states but {len(self.priors)} priors")
        dim = self.states[0].shape
        for k, s in enumerate(self.states):
            if s.shape != dim:
                raise DimensionMismatchError(f"State {k} has shape {s.shape}, expected {dim}")
        if min(self.priors) < 0.0 or abs(sum(self.priors) - 1.0) > 1e-12:
            raise ParameterOutOfRangeError(f"Priors must be nonnegative and sum to 1, got {self.priors}")

    @classmethod
    def from_states(cls, states: Sequence[ArrayLike], priors: Optional[Sequence[float]] = None) -> "Ensemble":
        densities = []
        for s in states:
            arr = np.asarray(s, dtype=np.complex128)
            densities.append(projector(arr) if arr.ndim == 1 else validate_density_matrix(arr))
        if priors is None:
            priors = [1.0 / len(densities)] * len(densities)
        return cls(tuple(densities), tuple(float(p) for p in priors))

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __len__(self) -> int:
        return len(self.states)

    def average_state(self) -> DensityMatrix:
        return sum(p * s for p, s in zip(self.priors, self.states))


@dataclass(frozen=True, eq=False)
class CapacityResult:
    capacity: float
    priors: Tuple[float, ...]
    povm: Povm
    # Projective search only, so the true supremum may be larger
    lower_bound: bool = True


@dataclass(frozen=True)
class ComparisonReport:
    single_use: float
    two_use: float
    ratio: float
    two_use_states: int
    lower_bound: bool = True


# ---------------------------------------------------------------------------
# Entropies
# ---------------------------------------------------------------------------

def shannon_entropy(p: ArrayLike) -> float:
    q = np.asarray(p, dtype=np.float64).reshape(-1)
    q = q[q > PROBABILITY_FLOOR]
    return float(-np.sum(q * np.log2(q)))


def binary_entropy(p: float) -> float:
    return shannon_entropy([p, 1.0 - p])


def outcome_distribution(states: Sequence[ArrayLike], povm: Povm) -> NDArray[np.float64]:
    """Row i holds tr(rho_i E_b) over outcomes b"""
    table = np.empty((len(states), len(povm)))
    for i, s in enumerate(states):
        rho = as_matrix(s)
        if rho.shape[0] != povm.dim:
            raise DimensionMismatchError(f"POVM acts on dimension {povm.dim}, state {i} on {rho.shape[0]}")
        for b, e in enumerate(povm.elements):
            table[i, b] = np.trace(rho @ e).real
    return np.clip(table, 0.0, None)


def _information(priors: NDArray[np.float64], table: NDArray[np.float64]) -> float:
    outcome = priors @ table
    conditional = sum(p * shannon_entropy(row) for p, row in zip(priors, table) if p > 0.0)
    return max(shannon_entropy(outcome) - conditional, 0.0)


def mutual_information(ensemble: Ensemble, povm: Povm) -> float:
    """I = H(sum_i pi_i p(.|i)) - sum_i pi_i H(p(.|i)), in bits"""
    table = outcome_distribution(ensemble.states, povm)
    return _information(np.asarray(ensemble.priors), table)


# ---------------------------------------------------------------------------
# Measurements
# ---------------------------------------------------------------------------

def projective_povm(unitary: ArrayLike) -> Povm:
    """Rank-one projectors onto the columns of a unitary"""
    u = as_matrix(unitary)
    return Povm(tuple(projector(u[:, k]) for k in range(u.shape[1])))


def helstrom_povm(result: DiscriminationResult) -> Povm:
    return result.measurement


def _hermitian_generator(params: NDArray[np.float64], dim: int) -> ComplexMatrix:
    h = np.zeros((dim, dim), dtype=np.complex128)
    h[np.diag_indices(dim)] = params[:dim]
    upper = np.triu_indices(dim, k=1)
    n_off = len(upper[0])
    h[upper] = params[dim:dim + n_off] + 1j * params[dim + n_off:]
    return h + np.triu(h, k=1).conj().T


def _rotated_basis(base: ComplexMatrix, params: NDArray[np.float64]) -> ComplexMatrix:
    return base @ expm(1j * _hermitian_generator(params, base.shape[0]))


def _basis_information(
    states: Tuple[DensityMatrix, ...],
    priors: NDArray[np.float64],
    basis: ComplexMatrix,
) -> float:
    # tr(rho_i |u_b><u_b|) = <u_b| rho_i |u_b>
    table = np.stack([np.einsum("ib,ij,jb->b", basis.conj(), s, basis).real for s in states])
    return _information(priors, np.clip(table, 0.0, None))


def _seed_basis(states: Tuple[DensityMatrix, ...], priors: NDArray[np.float64]) -> ComplexMatrix:
    """Eigenbasis of sum_i w_i pi_i rho_i, w evenly spaced on [-1, 1]"""
    weights = np.linspace(-1.0, 1.0, len(states))
    combined = sum(w * p * s for w, p, s in zip(weights, priors, states))
    _, v = np.linalg.eigh((combined + combined.conj().T) / 2)
    return v


def _best_projective(
    states: Tuple[DensityMatrix, ...],
    priors: NDArray[np.float64],
    restarts: int,
    seed: int,
    max_iters: int,
    warm: Optional[ComplexMatrix] = None,
) -> Tuple[float, ComplexMatrix]:
    dim = states[0].shape[0]
    n_params = dim * dim
    starts: List[ComplexMatrix] = [_seed_basis(states, priors)]
    if warm is not None:
        starts.append(warm)
    for k in range(restarts):
        starts.append(_rotated_basis(np.eye(dim, dtype=np.complex128), stream(seed, k).uniform(-np.pi, np.pi, n_params)))

    best_value, best_basis = -np.inf, starts[0]
    for base in starts:
        objective = lambda params, base=base: -_basis_information(states, priors, _rotated_basis(base, params))
        result = minimize(
            objective,
            np.zeros(n_params),
            method="Nelder-Mead",
            options={"maxiter": max_iters, "xatol": 1e-9, "fatol": 1e-13},
        )
        value = -float(result.fun)
        if value > best_value:
            best_value, best_basis = value, _rotated_basis(base, result.x)
    return best_value, best_basis


# ---------------------------------------------------------------------------
# Capacity of a fixed output set
# ---------------------------------------------------------------------------

def _simplex_grid(n: int, resolution: int) -> List[NDArray[np.float64]]:
    """All priors with entries k / resolution"""
    points = []
    for bars in combinations(range(resolution + n - 1), n - 1):
        edges = (-1,) + bars + (resolution + n - 1,)
        counts = [edges[i + 1] - edges[i] - 1 for i in range(n)]
        points.append(np.array(counts, dtype=np.float64) / resolution)
    return points


def capacity_fixed_outputs(
    states: Sequence[ArrayLike],
    povm_restarts: Optional[int] = None,
    prior_grid: Optional[int] = None,
    seed: Optional[int] = None,
    max_iters: int = INNER_MAX_ITERS,
) -> CapacityResult:
    """
    Lower bound on max over priors and measurements of the mutual information.

    Inner search: rank-one projective measurements V exp(iH), started from the
    eigenbasis of a signed prior-weighted sum of the states, the previous best
    basis and ``povm_restarts`` seeded random bases. Outer search: bounded
    scalar minimization over the prior for two states (prior 1/2 is always
    tried), a simplex grid of resolution ``prior_grid`` otherwise.
    """
    if len(states) < 2:
        raise DimensionMismatchError(f"Capacity needs at least two states, got {len(states)}")
    ensemble = Ensemble.from_states(states)
    povm_restarts = settings.POVM_RESTARTS if povm_restarts is None else povm_restarts
    prior_grid = settings.PRIOR_GRID if prior_grid is None else prior_grid
    seed = settings.SEED if seed is None else seed

    outputs = ensemble.states
    warm: List[Optional[ComplexMatrix]] = [None]
    evaluated: List[Tuple[float, NDArray[np.float64], ComplexMatrix]] = []

    def evaluate(priors: NDArray[np.float64]) -> float:
        value, basis = _best_projective(outputs, priors, povm_restarts, seed, max_iters, warm[0])
        warm[0] = basis
        evaluated.append((value, priors, basis))
        return value

    if len(outputs) == 2:
        evaluate(np.array([0.5, 0.5]))
        minimize_scalar(
            lambda p0: -evaluate(np.array([p0, 1.0 - p0])),
            bounds=(0.0, 1.0),
            method="bounded",
            options={"xatol": PRIOR_XATOL},
        )
    else:
        for priors in _simplex_grid(len(outputs), prior_grid):
            evaluate(priors)

    value, priors, basis = max(evaluated, key=lambda item: item[0])
    logger.debug(f"Capacity lower bound {value:.9f} bits from {len(evaluated)} prior evaluations")
    return CapacityResult(
        capacity=value,
        priors=tuple(float(p) for p in priors),
        povm=projective_povm(basis),
    )


def _antipodal_outputs(channel: KrausChannel, theta: float, phi: float) -> Tuple[DensityMatrix, DensityMatrix]:
    a = bloch_direction(theta, phi)
    return channel.apply(bloch_density(a)), channel.apply(bloch_density(a.negated()))


def two_use_vs_single_use(
    channel: KrausChannel,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
) -> ComparisonReport:
    """
    Heuristic comparison of one and two transmissions, both lower bounds.

    Single use: antipodal Bloch pairs along the three axes and ``budget``
    random directions. Two uses: the best of the seesaw-optimal entangled pair
    and the four products of the best single-use inputs.
    """
    if channel.dim != 2:
        raise DimensionMismatchError(f"Capacity comparison covers qubit channels, got dimension {channel.dim}")
    budget = settings.POVM_RESTARTS if budget is None else budget
    seed = settings.SEED if seed is None else seed
    rng = make_rng(seed)

    directions = [(0.0, 0.0), (np.pi / 2, 0.0), (np.pi / 2, np.pi / 2)]
    directions += [(float(np.arccos(rng.uniform(-1.0, 1.0))), float(rng.uniform(0.0, 2.0 * np.pi))) for _ in range(budget)]

    single_best, single_inputs = -np.inf, None
    for theta, phi in directions:
        result = capacity_fixed_outputs(_antipodal_outputs(channel, theta, phi), povm_restarts=0, seed=seed)
        if result.capacity > single_best:
            a = bloch_direction(theta, phi)
            single_best, single_inputs = result.capacity, (bloch_density(a), bloch_density(a.negated()))

    products = [np.kron(s, t) for s in single_inputs for t in single_inputs]
    product_outputs = [channel.apply_two(r) for r in products]
    two_best = capacity_fixed_outputs(product_outputs, povm_restarts=0, seed=seed).capacity

    entangled = seesaw(channel, seed=seed, restarts=max(budget, 1)).best_pair
    entangled_outputs = [channel.apply_two(r) for r in entangled.densities()]
    two_best = max(two_best, capacity_fixed_outputs(entangled_outputs, povm_restarts=0, seed=seed).capacity)

    ratio = two_best / single_best if single_best > PROBABILITY_FLOOR else float("nan")
    logger.info(f"Capacity comparison on '{channel.name}': one use {single_best:.6f}, two uses {two_best:.6f}")
    return ComparisonReport(
        single_use=single_best,
        two_use=two_best,
        ratio=ratio,
        two_use_states=len(products),
    )
