"""Four-stage nested Mach-Zehnder network over three single-photon path modes.

Mode 0 is the outer arm (|100>), mode 1 the path through F, B and E (|010>),
mode 2 the path through C and on to D3 (|001>).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import analytic
from .state import (
    DEFAULT_TOL,
    PATH_LABELS,
    StateVector,
    apply_operator,
    check_unitary,
    path_state,
    projector,
)

N_MODES = 3
N_STAGES = 4
DETECTORS = {"D1": 0, "D2": 1, "D3": 2}

_HALF = 1 / np.sqrt(2.0)


class NormalizationError(ValueError):
    """r**2 + t**2 differs from 1."""


class PipelineConsistencyError(RuntimeError):
    """The assembled pipeline does not reproduce the expected boundary states."""


@dataclass(frozen=True)
class BeamSplitter:
    r: float
    t: float
    modes: tuple[int, int] = (0, 1)

    def __post_init__(self) -> None:
        if not (0.0 <= self.r <= 1.0 and 0.0 <= self.t <= 1.0):
            raise NormalizationError(f"r={self.r}, t={self.t} must lie in [0, 1]")
        if abs(self.r**2 + self.t**2 - 1.0) > DEFAULT_TOL:
            raise NormalizationError(f"r^2 + t^2 = {self.r**2 + self.t**2!r}, expected 1")
        a, b = self.modes
        if a == b or not (0 <= a < N_MODES and 0 <= b < N_MODES):
            raise ValueError(f"invalid mode pair {self.modes}")


@dataclass(frozen=True)
class Position:
    """A point in the network: reached after ``stage_after`` stages, on ``mode``."""

    name: str
    stage_after: int
    mode: int


POSITIONS = {
    "A": Position("A", 1, 0),
    "F": Position("F", 1, 1),
    "B": Position("B", 2, 1),
    "C": Position("C", 2, 2),
    "E": Position("E", 3, 1),
}

PositionLike = Union[Position, str]


def get_position(pos: PositionLike) -> Position:
    if isinstance(pos, Position):
        return pos
    try:
        return POSITIONS[pos.upper()]
    except KeyError:
        raise ValueError(f"unknown position {pos!r}; expected one of {', '.join(POSITIONS)}") from None


@dataclass(frozen=True, eq=False)
class StagePipeline:
    stages: tuple[np.ndarray, ...]
    r: float
    t: float

    def composite(self, start: int = 0, stop: int = N_STAGES) -> np.ndarray:
        """Product U_stop ... U_(start+1) of the stages in ``[start, stop)``."""
        out = np.eye(N_MODES, dtype=complex)
        for u in self.stages[start:stop]:
            out = u @ out
        return out


def beam_splitter_unitary(bs: BeamSplitter) -> np.ndarray:
    """|a> -> r|a> + t|b>, |b> -> r|b> - t|a> on ``bs.modes = (a, b)``."""
    a, b = bs.modes
    u = np.eye(N_MODES, dtype=complex)
    u[a, a] = bs.r
    u[b, a] = bs.t
    u[b, b] = bs.r
    u[a, b] = -bs.t
    return u


def build_nested_mzi(
    r: float,
    t: float,
    *,
    corrupt_bs2: bool = False,
    check: bool = True,
) -> StagePipeline:
    """Assemble U_L1..U_L4 for outer splitters (r, t) and 50-50 inner splitters.

    ``corrupt_bs2`` reverses the orientation of the second inner splitter. It is
    a negative control only and requires ``check=False``, since the corrupted
    network fails the boundary-state self-check.
    """
    outer = beam_splitter_unitary(BeamSplitter(r, t, (0, 1)))
    inner_in = beam_splitter_unitary(BeamSplitter(_HALF, _HALF, (1, 2)))
    inner_out = beam_splitter_unitary(BeamSplitter(_HALF, _HALF, (2, 1) if corrupt_bs2 else (1, 2)))
    stages = (outer, inner_in, inner_out, outer.copy())
    for u in stages:
        u.flags.writeable = False
    pipeline = StagePipeline(stages, float(r), float(t))
    if check:
        _self_check(pipeline)
    return pipeline


def _self_check(p: StagePipeline, tol: float = DEFAULT_TOL) -> None:
    anchors = {
        "pre-selected state": (preselected_state(p).amps, analytic.preselected_amplitudes(p.r, p.t)),
        "post-selected state": (postselected_state(p).amps, analytic.postselected_amplitudes(p.r, p.t)),
        "inner interferometer routes |010> to |001>": (
            p.composite(1, 3)[:, 1],
            np.array([0, 0, 1], dtype=complex),
        ),
    }
    for name, (got, want) in anchors.items():
        err = float(np.max(np.abs(got - want)))
        if err > tol:
            raise PipelineConsistencyError(f"{name} off by {err:.3e}")
    if not all(check_unitary(u, tol) for u in p.stages) or not check_unitary(p.composite(), tol):
        raise PipelineConsistencyError("stage operators are not unitary")


def evolve_to_stage(p: StagePipeline, state: StateVector, n_stages: int, start: int = 0) -> StateVector:
    """Apply stages ``start+1 .. n_stages`` to ``state``."""
    if not 0 <= start <= n_stages <= N_STAGES:
        raise ValueError(f"stage range ({start}, {n_stages}] outside 0..{N_STAGES}")
    for u in p.stages[start:n_stages]:
        state = apply_operator(u, state)
    return state


def detector_probabilities(final: StateVector) -> tuple[float, float, float]:
    """(P_D1, P_D2, P_D3) from a post-L4 path state or photon-major joint state."""
    amps = final.amps.reshape(N_MODES, -1)
    probs = np.sum(np.abs(amps) ** 2, axis=1)
    return float(probs[0]), float(probs[1]), float(probs[2])


def position_projector(pos: PositionLike) -> np.ndarray:
    return projector(get_position(pos).mode, N_MODES)


def preselected_state(p: StagePipeline) -> StateVector:
    return evolve_to_stage(p, path_state("100"), 2)


def postselected_state(p: StagePipeline, stage: int = 2) -> StateVector:
    """Ket whose bra is <100| U_L4 ... U_(stage+1); defaults to stage L2."""
    back = p.composite(stage, N_STAGES).conj().T
    return StateVector(back[:, 0], PATH_LABELS)
