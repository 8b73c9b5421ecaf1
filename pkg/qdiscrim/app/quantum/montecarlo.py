"""
Monte Carlo simulation of sending one bit through two channel uses.

Each trial picks the bit from the priors, a pure component of the encoding
state, one Kraus event per transmission with probability ||A_i psi||^2, and
finally the outcome of the Helstrom measurement. The Kraus decomposition is
used as given.
"""
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple
import logging

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import ArrayLike, NDArray

from app.config import settings
from app.exceptions import DimensionMismatchError, InvalidStateError, ZeroNormBranchError
from app.quantum.channels import KrausChannel
from app.quantum.discrimination import SignalPair, helstrom_error
from app.quantum.rng import make_rng, stream

logger = logging.getLogger(__name__)

BRANCH_NORM_FLOOR = 1e-14
PROBABILITY_FLOOR = 1e-15


@dataclass(frozen=True)
class TrialRecord:
    bit_sent: int
    kraus_indices: Tuple[int, int]
    outcome: int
    correct: bool


class EmpiricalState(NamedTuple):
    mean: NDArray[np.complex128]
    standard_error_real: NDArray[np.float64]
    standard_error_imag: NDArray[np.float64]
    samples: int


class _BranchTable(NamedTuple):
    """Flattened (component, i, j) outcomes for one sent bit"""
    cumulative: NDArray[np.float64]
    error: NDArray[np.float64]


def _unit_vector(state: ArrayLike) -> NDArray[np.complex128]:
    v = np.asarray(state, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-10:
        raise InvalidStateError(f"State vector norm is {norm:.12f}, expected 1")
    return v


def _cumulative(probabilities: NDArray[np.float64]) -> NDArray[np.float64]:
    cumulative = np.cumsum(probabilities)
    return cumulative / cumulative[-1]


def _draw(cumulative: NDArray[np.float64], u):
    return np.minimum(np.searchsorted(cumulative, u, side="right"), len(cumulative) - 1)


def branch_probabilities(operators: NDArray[np.complex128], state: ArrayLike) -> NDArray[np.float64]:
    """||A_i psi||^2 for every Kraus operator"""
    psi = _unit_vector(state)
    ops = np.asarray(operators)
    if ops.shape[-1] != psi.shape[0]:
        raise DimensionMismatchError(f"Operators act on dimension {ops.shape[-1]}, state has {psi.shape[0]}")
    branches = ops @ psi
    return np.sum(np.abs(branches) ** 2, axis=1)


def _renormalized(branch: NDArray[np.complex128], index) -> NDArray[np.complex128]:
    norm = np.linalg.norm(branch)
    if norm < BRANCH_NORM_FLOOR:
        raise ZeroNormBranchError(f"Sampled Kraus branch {index} has norm {norm:.3e}")
    return branch / norm


def sample_channel(channel: KrausChannel, state: ArrayLike, rng: np.random.Generator) -> Tuple[int, NDArray[np.complex128]]:
    """One Kraus event on a pure state: (index, renormalized A_i psi)"""
    psi = _unit_vector(state)
    if psi.shape[0] != channel.dim:
        raise DimensionMismatchError(f"Channel '{channel.name}' acts on dimension {channel.dim}, state has {psi.shape[0]}")
    probabilities = branch_probabilities(channel.stacked, psi)
    index = int(_draw(_cumulative(probabilities), rng.random()))
    return index, _renormalized(channel.stacked[index] @ psi, index)


def sample_two_uses(
    channel: KrausChannel, state: ArrayLike, rng: np.random.Generator
) -> Tuple[Tuple[int, int], NDArray[np.complex128]]:
    """Independent Kraus events on the first then the second transmission"""
    psi = _unit_vector(state)
    d = channel.dim
    if psi.shape[0] != d * d:
        raise DimensionMismatchError(f"Two uses of '{channel.name}' act on dimension {d * d}, state has {psi.shape[0]}")
    ops = channel.stacked

    # Row index of m is the first transmission
    m = psi.reshape(d, d)
    first = ops @ m
    p_first = np.sum(np.abs(first) ** 2, axis=(1, 2))
    i = int(_draw(_cumulative(p_first), rng.random()))
    m = _renormalized(first[i], (i,))

    second = m @ ops.transpose(0, 2, 1)
    p_second = np.sum(np.abs(second) ** 2, axis=(1, 2))
    j = int(_draw(_cumulative(p_second), rng.random()))
    m = _renormalized(second[j], (i, j))
    return (i, j), m.reshape(-1)


def _pure_components(rho: NDArray[np.complex128]) -> Tuple[NDArray[np.float64], NDArray[np.complex128]]:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    keep = w > BRANCH_NORM_FLOOR
    weights = w[keep] / np.sum(w[keep])
    return weights, v[:, keep]


def _helstrom_projectors(pair: SignalPair, channel: KrausChannel):
    r0, r1 = pair.densities()
    result = helstrom_error(channel.apply_two(r0), channel.apply_two(r1), pair.priors)
    return result.measurement.elements, result.pe


def _branch_table(
    rho: NDArray[np.complex128],
    channel: KrausChannel,
    wrong_guess: NDArray[np.complex128],
) -> _BranchTable:
    weights, vectors = _pure_components(rho)
    ops = channel.two_use_stacked
    probabilities, errors = [], []
    for w, psi in zip(weights, vectors.T):
        branches = ops @ psi
        q = np.sum(np.abs(branches) ** 2, axis=1)
        wrong = np.sum(np.abs(branches @ wrong_guess.T) ** 2, axis=1)
        e = np.divide(wrong, q, out=np.zeros_like(q), where=q > BRANCH_NORM_FLOOR)
        probabilities.append(w * q)
        errors.append(e)
    error = np.clip(np.concatenate(errors), 0.0, 1.0)
    error[error < PROBABILITY_FLOOR] = 0.0
    error[error > 1.0 - PROBABILITY_FLOOR] = 1.0
    return _BranchTable(cumulative=_cumulative(np.concatenate(probabilities)), error=error)


def _partition_errors(tables: Tuple[_BranchTable, _BranchTable], prior1: float, seed: int, index: int, size: int) -> int:
    rng = stream(seed, index)
    sent_one = rng.random(size) < prior1
    errors = 0
    for bit, table in enumerate(tables):
        n = int(np.count_nonzero(sent_one)) if bit else size - int(np.count_nonzero(sent_one))
        if n == 0:
            continue
        branch = _draw(table.cumulative, rng.random(n))
        errors += int(np.count_nonzero(rng.random(n) < table.error[branch]))
    return errors


def _partition_sizes(trials: int, partition_size: int) -> List[int]:
    full, rest = divmod(trials, partition_size)
    return [partition_size] * full + ([rest] if rest else [])


def simulate_error_rate(
    pair: SignalPair,
    channel: KrausChannel,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    n_jobs: int = 1,
) -> Tuple[float, float]:
    """
    Empirical error rate of the Helstrom measurement and its binomial
    standard error sqrt(p(1 - p) / trials).

    Trials are split into partitions of settings.MC_PARTITION_SIZE; partition
    k draws from stream(seed, k) and the error counts are summed, so the
    estimate does not depend on n_jobs.
    """
    trials = settings.TRIALS if trials is None else trials
    seed = settings.SEED if seed is None else seed
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    if pair.dim != channel.dim ** 2:
        raise DimensionMismatchError(f"Pair lives in dimension {pair.dim}, two uses of '{channel.name}' need {channel.dim ** 2}")

    (guess0, guess1), analytic = _helstrom_projectors(pair, channel)
    r0, r1 = pair.densities()
    # Bit 0 is wrong when the outcome is guess 1, and the reverse
    tables = (_branch_table(r0, channel, guess1), _branch_table(r1, channel, guess0))

    sizes = _partition_sizes(trials, settings.MC_PARTITION_SIZE)
    counts = Parallel(n_jobs=n_jobs)(
        delayed(_partition_errors)(tables, pair.prior1, seed, k, size) for k, size in enumerate(sizes)
    )
    p_hat = sum(counts) / trials
    standard_error = float(np.sqrt(p_hat * (1.0 - p_hat) / trials))
    logger.info(
        f"Simulated {trials} trials on '{channel.name}': {p_hat:.6f} +/- {standard_error:.6f} (analytic {analytic:.6f})"
    )
    return p_hat, standard_error


def run_trials(
    pair: SignalPair,
    channel: KrausChannel,
    trials: int,
    seed: Optional[int] = None,
) -> List[TrialRecord]:
    """Trial-by-trial version of simulate_error_rate, one record per trial"""
    seed = settings.SEED if seed is None else seed
    rng = make_rng(seed)
    (_, guess1), _ = _helstrom_projectors(pair, channel)
    components = [_pure_components(rho) for rho in pair.densities()]

    records = []
    for _ in range(trials):
        bit = int(rng.random() < pair.prior1)
        weights, vectors = components[bit]
        c = int(_draw(_cumulative(weights), rng.random()))
        indices, out = sample_two_uses(channel, vectors[:, c], rng)
        p_guess1 = float(np.real(np.vdot(out, guess1 @ out)))
        outcome = int(rng.random() < p_guess1)
        records.append(TrialRecord(bit_sent=bit, kraus_indices=indices, outcome=outcome, correct=outcome == bit))
    return records


def empirical_output_state(
    channel: KrausChannel,
    state: ArrayLike,
    samples: int,
    seed: Optional[int] = None,
) -> EmpiricalState:
    """
    Average of |post><post| over sampled Kraus events, one use for a
    d-vector and two independent uses for a d^2-vector, with entrywise
    standard errors of the real and imaginary parts.
    """
    seed = settings.SEED if seed is None else seed
    psi = _unit_vector(state)
    if psi.shape[0] == channel.dim:
        ops = channel.stacked
    elif psi.shape[0] == channel.dim ** 2:
        ops = channel.two_use_stacked
    else:
        raise DimensionMismatchError(f"State of dimension {psi.shape[0]} does not fit channel '{channel.name}'")

    branches = ops @ psi
    q = np.sum(np.abs(branches) ** 2, axis=1)
    index = _draw(_cumulative(q), make_rng(seed).random(samples))
    counts = np.bincount(index, minlength=len(q))

    outers = np.zeros((len(q),) + (psi.shape[0],) * 2, dtype=np.complex128)
    for k in np.flatnonzero(counts):
        post = _renormalized(branches[k], k)
        outers[k] = np.outer(post, post.conj())

    freq = counts / samples
    mean = np.tensordot(freq, outers, axes=1)
    var_re = np.tensordot(freq, outers.real ** 2, axes=1) - mean.real ** 2
    var_im = np.tensordot(freq, outers.imag ** 2, axes=1) - mean.imag ** 2
    return EmpiricalState(
        mean=mean,
        standard_error_real=np.sqrt(np.clip(var_re, 0.0, None) / samples),
        standard_error_imag=np.sqrt(np.clip(var_im, 0.0, None) / samples),
        samples=samples,
    )
