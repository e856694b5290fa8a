"""Weak values of path projectors for a D1 post-selection, and their inference
from meter statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .interferometer import (
    N_STAGES,
    Position,
    PositionLike,
    StagePipeline,
    build_nested_mzi,
    get_position,
    position_projector,
)
from .measurement import MeterProbabilities
from .state import StateVector, inner_product

DEGENERATE_OVERLAP = 1e-12


class DegeneratePostselectionError(ValueError):
    """The pre/post-selection overlap vanishes, so the weak value is undefined."""


@dataclass(frozen=True)
class WeakValueResult:
    value: complex
    positions: tuple[Position, ...]
    overlap: complex

    @property
    def real(self) -> float:
        return self.value.real


def _amplitude(ops: list[np.ndarray]) -> complex:
    """<100| ops[-1] ... ops[0] |100>."""
    vec = np.array([1, 0, 0], dtype=complex)
    for op in ops:
        vec = op @ vec
    return complex(vec[0])


def _guard(overlap: complex) -> None:
    if abs(overlap) < DEGENERATE_OVERLAP:
        raise DegeneratePostselectionError(
            f"post-selection overlap {abs(overlap):.3e} is below {DEGENERATE_OVERLAP:g}"
        )


def weak_value(
    r: float,
    t: float,
    pos: PositionLike,
    *,
    pipeline: Optional[StagePipeline] = None,
) -> WeakValueResult:
    """Weak value of the photon-number projector at ``pos`` for a D1 click."""
    return joint_weak_value(r, t, pos, pipeline=pipeline)


def joint_weak_value(
    r: float,
    t: float,
    *positions: PositionLike,
    pipeline: Optional[StagePipeline] = None,
) -> WeakValueResult:
    """Weak value of a product of projectors inserted at successive stages.

    With one position this is the ordinary weak value. Positions must be given
    in strictly increasing stage order.
    """
    p = build_nested_mzi(r, t) if pipeline is None else pipeline
    pos = tuple(get_position(x) for x in positions)
    if not pos:
        raise ValueError("at least one position is required")
    stages = [x.stage_after for x in pos]
    if any(a >= b for a, b in zip(stages, stages[1:])):
        names = ", ".join(x.name for x in pos)
        raise ValueError(f"positions ({names}) are not at strictly increasing stages")

    overlap = _amplitude(list(p.stages))
    _guard(overlap)
    ops: list[np.ndarray] = []
    inserts = {x.stage_after: position_projector(x) for x in pos}
    for k in range(N_STAGES + 1):
        if k in inserts:
            ops.append(inserts[k])
        if k < N_STAGES:
            ops.append(p.stages[k])
    return WeakValueResult(_amplitude(ops) / overlap, pos, overlap)


def weak_value_of(op: np.ndarray, pre: StateVector, post: StateVector) -> complex:
    """<post|op|pre> / <post|pre> for an arbitrary operator."""
    overlap = inner_product(post, pre)
    _guard(overlap)
    return complex(np.vdot(post.amps, np.asarray(op, dtype=complex) @ pre.amps)) / overlap


def infer_weak_value(m: MeterProbabilities, theta: float) -> float:
    """Invert the first-order meter response: arcsin((P_c - P_b)/(P_b + P_c)) / theta."""
    if theta == 0:
        raise ValueError("cannot infer a weak value at zero coupling")
    total = m.p_b + m.p_c
    if total <= 0:
        raise ValueError("meter probabilities sum to zero")
    ratio = (m.p_c - m.p_b) / total
    if abs(ratio) > 1:
        raise ValueError(f"asymmetry {ratio} outside [-1, 1]")
    return float(np.arcsin(ratio) / theta)
