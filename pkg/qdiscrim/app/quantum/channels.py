"""
Kraus-operator channels: validation, single and two-use application,
the conjugate map and the built-in qubit families.
"""
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, NamedTuple, Sequence, Tuple, Union
import json
import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import ValidationError

from app.exceptions import (
    ChannelFileError,
    ChannelValidationError,
    DimensionMismatchError,
    ParameterOutOfRangeError,
)
from app.quantum.linalg import ComplexMatrix, as_matrix
from app.quantum.states import (
    IDENTITY_2,
    SIGMA_1,
    SIGMA_2,
    SIGMA_3,
    BlochVector,
    DensityMatrix,
    validate_density_matrix,
)
from app.schemas.channel import ChannelFile

logger = logging.getLogger(__name__)

COMPLETENESS_TOL = 1e-9


class ValidationReport(NamedTuple):
    passed: bool
    residual: float


def _stack(operators: Sequence[ArrayLike]) -> NDArray[np.complex128]:
    ops = np.stack([as_matrix(op) for op in operators])
    ops.flags.writeable = False
    return ops


def _kraus_map(ops: NDArray[np.complex128], rho: ComplexMatrix) -> ComplexMatrix:
    return np.sum(ops @ rho @ ops.conj().transpose(0, 2, 1), axis=0)


def _kraus_conjugate_map(ops: NDArray[np.complex128], x: ComplexMatrix) -> ComplexMatrix:
    return np.sum(ops.conj().transpose(0, 2, 1) @ x @ ops, axis=0)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    name: str
    operators: Tuple[ComplexMatrix, ...]
    dim: int

    def __post_init__(self):
        if not self.operators:
            raise DimensionMismatchError(f"Channel '{self.name}' has no Kraus operators")
        for k, op in enumerate(self.operators):
            if op.shape != (self.dim, self.dim):
                raise DimensionMismatchError(
                    f"Channel '{self.name}': operator {k} has shape {op.shape}, expected {self.dim}x{self.dim}"
                )

    @classmethod
    def from_operators(cls, name: str, operators: Sequence[ArrayLike]) -> "KrausChannel":
        ops = tuple(as_matrix(op).copy() for op in operators)
        for op in ops:
            op.flags.writeable = False
        dim = ops[0].shape[0] if ops else 0
        return cls(name=name, operators=ops, dim=dim)

    @cached_property
    def stacked(self) -> NDArray[np.complex128]:
        return _stack(self.operators)

    @cached_property
    def two_use_stacked(self) -> NDArray[np.complex128]:
        ops = self.stacked
        pairs = np.einsum("aij,bkl->abikjl", ops, ops)
        m, d = ops.shape[0], self.dim
        two = pairs.reshape(m * m, d * d, d * d)
        two.flags.writeable = False
        return two

    def two_use_operators(self) -> Tuple[ComplexMatrix, ...]:
        """The d^2 x d^2 Kraus set {A_i (x) A_j}, i major"""
        return tuple(self.two_use_stacked)

    def completeness_residual(self) -> float:
        ops = self.stacked
        total = np.sum(ops.conj().transpose(0, 2, 1) @ ops, axis=0)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def validate(self) -> ValidationReport:
        residual = self.completeness_residual()
        return ValidationReport(passed=residual <= COMPLETENESS_TOL, residual=residual)

    def apply_unchecked(self, rho: ComplexMatrix) -> ComplexMatrix:
        return _kraus_map(self.stacked, rho)

    def apply_two_unchecked(self, r: ComplexMatrix) -> ComplexMatrix:
        return _kraus_map(self.two_use_stacked, r)

    def apply(self, rho: ArrayLike) -> DensityMatrix:
        m = as_matrix(rho)
        if m.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"Channel '{self.name}' acts on {self.dim}x{self.dim} states, got {m.shape}"
            )
        return self.apply_unchecked(validate_density_matrix(m))

    def apply_two(self, r: ArrayLike) -> DensityMatrix:
        m = as_matrix(r)
        d2 = self.dim * self.dim
        if m.shape != (d2, d2):
            raise DimensionMismatchError(
                f"Two uses of '{self.name}' act on {d2}x{d2} states, got {m.shape}"
            )
        return self.apply_two_unchecked(validate_density_matrix(m))

    def conjugate_apply(self, x: ArrayLike) -> ComplexMatrix:
        """X -> sum_i A_i^dagger X A_i"""
        return _kraus_conjugate_map(self.stacked, as_matrix(x))

    def conjugate_apply_two(self, x: ArrayLike) -> ComplexMatrix:
        return _kraus_conjugate_map(self.two_use_stacked, as_matrix(x))


def validate(channel: KrausChannel) -> ValidationReport:
    return channel.validate()


def apply(channel: KrausChannel, rho: ArrayLike) -> DensityMatrix:
    return channel.apply(rho)


def apply_two(channel: KrausChannel, r: ArrayLike) -> DensityMatrix:
    return channel.apply_two(r)


def _require_unit_interval(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise ParameterOutOfRangeError(f"{name} must lie in [0, 1], got {value}")
    return float(value)


def _builtin(name: str, operators: Sequence[ArrayLike]) -> KrausChannel:
    channel = KrausChannel.from_operators(name, operators)
    report = channel.validate()
    if not report.passed:
        # Built-in families are complete by construction
        raise ChannelValidationError(name, report.residual)
    return channel


def two_pauli(x: float) -> KrausChannel:
    """Identity with probability x, otherwise sigma_1 or sigma_2 with equal probability"""
    x = _require_unit_interval("x", x)
    q = np.sqrt(0.5 * (1.0 - x))
    return _builtin(
        f"two_pauli({x:g})",
        [np.sqrt(x) * IDENTITY_2, q * SIGMA_1, -1j * q * SIGMA_2],
    )


def amplitude_damping(x: float) -> KrausChannel:
    """
    Photon-loss channel. |up> (one photon) decays to |down> (vacuum) with
    probability 1 - x; |down> is the fixed point.
    """
    x = _require_unit_interval("x", x)
    a1 = np.array([[np.sqrt(x), 0.0], [0.0, 1.0]])
    a2 = np.array([[0.0, 0.0], [np.sqrt(1.0 - x), 0.0]])
    return _builtin(f"amplitude_damping({x:g})", [a1, a2])


def depolarizing(p: float) -> KrausChannel:
    p = _require_unit_interval("p", p)
    return _builtin(
        f"depolarizing({p:g})",
        [
            np.sqrt(1.0 - 0.75 * p) * IDENTITY_2,
            np.sqrt(p / 4) * SIGMA_1,
            np.sqrt(p / 4) * SIGMA_2,
            np.sqrt(p / 4) * SIGMA_3,
        ],
    )


def dephasing(x: float) -> KrausChannel:
    """Identity with probability x, sigma_3 otherwise; sigma_3 eigenstates pass unharmed"""
    x = _require_unit_interval("x", x)
    return _builtin(f"dephasing({x:g})", [np.sqrt(x) * IDENTITY_2, np.sqrt(1.0 - x) * SIGMA_3])


def identity_channel(dim: int = 2) -> KrausChannel:
    return _builtin("identity", [np.eye(dim)])


BUILTIN_CHANNELS: Dict[str, Callable[[float], KrausChannel]] = {
    "two_pauli": two_pauli,
    "amplitude_damping": amplitude_damping,
    "depolarizing": depolarizing,
    "dephasing": dephasing,
}


def build_channel(name: str, parameter: float) -> KrausChannel:
    if name == "identity":
        return identity_channel()
    try:
        factory = BUILTIN_CHANNELS[name]
    except KeyError:
        raise ValueError(
            f"Unknown channel '{name}'; choose from {sorted(BUILTIN_CHANNELS) + ['identity']}"
        ) from None
    return factory(parameter)


def bloch_action_two_pauli(a: BlochVector, x: float) -> BlochVector:
    """Closed form of phi(rho_pm): b = (a1 x, a2 x, a3 (2x - 1))"""
    x = _require_unit_interval("x", x)
    return BlochVector(a.a1 * x, a.a2 * x, a.a3 * (2.0 * x - 1.0))


def single_use_eigenvalues_two_pauli(a: BlochVector, x: float) -> Tuple[float, float]:
    b = bloch_action_two_pauli(a, x)
    r = np.sqrt(b.length_squared)
    return 0.5 + 0.5 * r, 0.5 - 0.5 * r


def single_use_pe_two_pauli(a: BlochVector, x: float) -> float:
    """Helstrom error for one use with inputs rho_pm; tr|phi(rho_+) - phi(rho_-)| = 2|b|"""
    b = bloch_action_two_pauli(a, x)
    return 0.5 - 0.5 * float(np.sqrt(b.length_squared))


def channel_from_file(spec: ChannelFile) -> KrausChannel:
    operators = [
        np.array([[complex(re, im) for re, im in row] for row in op], dtype=np.complex128)
        for op in spec.operators
    ]
    return KrausChannel.from_operators(spec.name, operators)


def load_channel(path: Union[str, Path]) -> KrausChannel:
    """Read a channel JSON file; reject it when completeness fails by more than 1e-9"""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
        spec = ChannelFile(**raw)
    except (OSError, json.JSONDecodeError, TypeError) as e:
        logger.error(f"Cannot read channel file {path}: {e}")
        raise ChannelFileError(f"Cannot read channel file {path}: {e}") from e
    except ValidationError as e:
        logger.error(f"Malformed channel file {path}: {e}")
        raise ChannelFileError(f"Malformed channel file {path}: {e}") from e

    channel = channel_from_file(spec)
    report = channel.validate()
    if not report.passed:
        logger.error(f"Channel file {path} failed completeness with residual {report.residual:.3e}")
        raise ChannelValidationError(channel.name, report.residual)
    logger.info(f"Loaded channel '{channel.name}' ({len(channel.operators)} operators, dim {channel.dim})")
    return channel


def channel_to_json(channel: KrausChannel) -> dict:
    return {
        "name": channel.name,
        "dim": channel.dim,
        "operators": [
            [[[float(z.real), float(z.imag)] for z in row] for row in op]
            for op in channel.operators
        ],
    }
