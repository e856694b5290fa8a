"""Dense complex states and operators for the photon path and meter spaces.

Operators are plain ``complex128`` numpy arrays; states carry basis labels so
that joint photon-meter amplitudes can be read back by name.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-12

PATH_LABELS = ("100", "010", "001")
METER_LABELS = ("b", "c")


class DimensionError(ValueError):
    """Operand dimensions do not match."""


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable ket over an ordered, labelled basis.

    Sub-normalized vectors are allowed (projections produce them), and so are
    the slightly super-normalized vectors produced by linearized evolution.
    Use :func:`is_normalized` to test a physical state.
    """

    amps: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise DimensionError("state must have positive dimension")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        labels = tuple(self.labels) or tuple(str(k) for k in range(amps.size))
        if len(labels) != amps.size:
            raise DimensionError(f"{len(labels)} labels for a {amps.size}-dim state")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.amps.size

    def __getitem__(self, label: str) -> complex:
        return complex(self.amps[self.labels.index(label)])

    def __repr__(self) -> str:
        terms = " ".join(f"{a:+.6g}|{lab}>" for a, lab in zip(self.amps, self.labels) if a != 0)
        return f"StateVector({terms or '0'})"


def basis_state(index: int, labels: Sequence[str]) -> StateVector:
    amps = np.zeros(len(labels), dtype=complex)
    amps[index] = 1.0
    return StateVector(amps, tuple(labels))


def path_state(label: str) -> StateVector:
    """Single-photon path ket such as ``path_state("100")``."""
    return basis_state(PATH_LABELS.index(label), PATH_LABELS)


def joint_labels(first: Sequence[str], second: Sequence[str]) -> tuple[str, ...]:
    return tuple(f"{a},{b}" for a in first for b in second)


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor's index varies slowest."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def tensor_state(u: StateVector, v: StateVector) -> StateVector:
    return StateVector(np.kron(u.amps, v.amps), joint_labels(u.labels, v.labels))


def apply_operator(op: np.ndarray, s: StateVector) -> StateVector:
    op = np.asarray(op, dtype=complex)
    if op.shape != (s.dim, s.dim):
        raise DimensionError(f"operator of shape {op.shape} cannot act on a {s.dim}-dim state")
    return StateVector(op @ s.amps, s.labels)


def inner_product(bra: StateVector, ket: StateVector) -> complex:
    """<bra|ket>, conjugate-linear in ``bra``."""
    if bra.dim != ket.dim:
        raise DimensionError(f"inner product of {bra.dim}-dim and {ket.dim}-dim states")
    return complex(np.vdot(bra.amps, ket.amps))


def norm_squared(s: StateVector) -> float:
    return float(np.vdot(s.amps, s.amps).real)


def is_normalized(s: StateVector, tol: float = DEFAULT_TOL) -> bool:
    return abs(norm_squared(s) - 1.0) <= tol


def project_component(s: StateVector, basis_index: int) -> StateVector:
    """Keep one basis component and zero the rest. No renormalization."""
    if not 0 <= basis_index < s.dim:
        raise IndexError(f"basis index {basis_index} out of range for {s.dim}-dim state")
    amps = np.zeros(s.dim, dtype=complex)
    amps[basis_index] = s.amps[basis_index]
    return StateVector(amps, s.labels)


def projector(index: int, dim: int) -> np.ndarray:
    """Rank-1 projector |index><index|."""
    p = np.zeros((dim, dim), dtype=complex)
    p[index, index] = 1.0
    return p


def check_unitary(op: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError(f"operator of shape {op.shape} is not square")
    if not np.all(np.isfinite(op)):
        return False
    residual = op.conj().T @ op - np.eye(op.shape[0])
    return float(np.max(np.abs(residual))) <= tol
