"""QND coupling of the photon path to a two-level meter, exact or linearized.

The joint space is photon-major: component ``2 * mode + level`` with
level 0 = |b> and level 1 = |c>.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .interferometer import (
    DETECTORS,
    N_MODES,
    N_STAGES,
    POSITIONS,
    Position,
    PositionLike,
    StagePipeline,
    build_nested_mzi,
    get_position,
    position_projector,
    postselected_state,
)
from .state import (
    METER_LABELS,
    PATH_LABELS,
    StateVector,
    path_state,
    tensor_product,
    joint_labels,
    tensor_state,
)

N_LEVELS = 2
JOINT_LABELS = joint_labels(PATH_LABELS, METER_LABELS)


class EvolutionOrder(enum.Enum):
    EXACT = "exact"
    FIRST = "first"


@dataclass(frozen=True)
class WeakCoupling:
    """Coupling phase ``theta = eta * tau`` (hbar = 1) at one position."""

    theta: float
    position: Position = POSITIONS["C"]
    meter_level: int = 0
    max_theta: float = np.pi

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", get_position(self.position))
        if not np.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if abs(self.theta) > self.max_theta:
            raise ValueError(f"|theta| = {abs(self.theta)} exceeds {self.max_theta}")
        if self.meter_level not in (0, 1):
            raise ValueError(f"meter level must be 0 (b) or 1 (c), got {self.meter_level}")

    @classmethod
    def from_eta_tau(cls, eta: float, tau: float, position: PositionLike = "C", **kw) -> "WeakCoupling":
        return cls(eta * tau, get_position(position), **kw)


@dataclass(frozen=True)
class MeterProbabilities:
    p_b: float
    p_c: float
    detector: str = "D1"

    @property
    def total(self) -> float:
        return self.p_b + self.p_c


def initial_meter_state() -> StateVector:
    return StateVector(np.array([1.0, 1.0]) / np.sqrt(2.0), METER_LABELS)


def initial_joint_state() -> StateVector:
    return _INITIAL_JOINT


_INITIAL_JOINT = tensor_state(path_state("100"), initial_meter_state())


def _coupled_index(c: WeakCoupling) -> int:
    return N_LEVELS * c.position.mode + c.meter_level


def coupling_unitary_exact(c: WeakCoupling) -> np.ndarray:
    """exp(-i theta P (x) |level><level|); P is a rank-1 projector, so diagonal."""
    u = np.eye(N_MODES * N_LEVELS, dtype=complex)
    u[_coupled_index(c), _coupled_index(c)] = np.exp(-1j * c.theta)
    return u


def coupling_first_order(c: WeakCoupling) -> np.ndarray:
    """1 - i theta P (x) |level><level|. Not unitary."""
    u = np.eye(N_MODES * N_LEVELS, dtype=complex)
    u[_coupled_index(c), _coupled_index(c)] = 1 - 1j * c.theta
    return u


def coupling_operator(c: WeakCoupling, order: EvolutionOrder) -> np.ndarray:
    if EvolutionOrder(order) is EvolutionOrder.EXACT:
        return coupling_unitary_exact(c)
    return coupling_first_order(c)


def meter_rotation() -> np.ndarray:
    """|b> -> (|b> + i|c>)/sqrt2, |c> -> (i|b> + |c>)/sqrt2."""
    return np.array([[1, 1j], [1j, 1]], dtype=complex) / np.sqrt(2.0)


_ROTATION_JOINT = tensor_product(np.eye(N_MODES), meter_rotation())


def _resolve(r: float, t: float, pipeline: Optional[StagePipeline]) -> StagePipeline:
    return build_nested_mzi(r, t) if pipeline is None else pipeline


def evolve_joint(
    p: StagePipeline,
    c: WeakCoupling,
    order: EvolutionOrder,
    n_stages: int = N_STAGES,
) -> StateVector:
    """Evolve |100>(x)|psi_A> through ``n_stages`` stages with the meter coupled.

    The coupling is inserted once ``c.position.stage_after`` stages have been
    applied and is followed at once by the meter rotation.
    """
    if not 0 <= n_stages <= N_STAGES:
        raise ValueError(f"n_stages must be in 0..{N_STAGES}, got {n_stages}")
    kick = _ROTATION_JOINT @ coupling_operator(c, order)
    # Rows are path modes, columns meter levels; a path stage U acts as U @ amps.
    amps = initial_joint_state().amps.reshape(N_MODES, N_LEVELS)
    for k in range(n_stages + 1):
        if k == c.position.stage_after:
            amps = (kick @ amps.reshape(-1)).reshape(N_MODES, N_LEVELS)
        if k < n_stages:
            amps = p.stages[k] @ amps
    return StateVector(amps.reshape(-1), JOINT_LABELS)


def run_weak_measurement(
    r: float,
    t: float,
    c: WeakCoupling,
    order: EvolutionOrder = EvolutionOrder.EXACT,
    *,
    pipeline: Optional[StagePipeline] = None,
) -> StateVector:
    """Final six-component joint state after all four stages."""
    return evolve_joint(_resolve(r, t, pipeline), c, EvolutionOrder(order))


def postselected_meter_probabilities(joint_final: StateVector, detector: str = "D1") -> MeterProbabilities:
    """Joint probabilities of a click at ``detector`` with the meter in b or c."""
    if detector not in DETECTORS:
        raise ValueError(f"unknown detector {detector!r}; expected one of {', '.join(DETECTORS)}")
    if joint_final.dim != N_MODES * N_LEVELS:
        raise ValueError(f"expected a {N_MODES * N_LEVELS}-dim joint state, got {joint_final.dim}")
    amps = joint_final.amps.reshape(N_MODES, N_LEVELS)[DETECTORS[detector]]
    p_b, p_c = np.abs(amps) ** 2
    return MeterProbabilities(float(p_b), float(p_c), detector)


def postselect_at_coupling(
    r: float,
    t: float,
    c: WeakCoupling,
    order: EvolutionOrder = EvolutionOrder.EXACT,
    *,
    pipeline: Optional[StagePipeline] = None,
) -> MeterProbabilities:
    """Meter statistics from projecting the just-coupled state on the D1 post-selection.

    Skips the remaining stages: the joint state right after coupling and meter
    rotation is contracted with the backward-evolved <100| at that stage.
    """
    p = _resolve(r, t, pipeline)
    stage = c.position.stage_after
    coupled = evolve_joint(p, c, EvolutionOrder(order), stage).amps.reshape(N_MODES, N_LEVELS)
    post = postselected_state(p, stage).amps
    amps = post.conj() @ coupled
    return MeterProbabilities(float(abs(amps[0]) ** 2), float(abs(amps[1]) ** 2), "D1")


def position_amplitudes(
    r: float,
    t: float,
    c: WeakCoupling,
    at: PositionLike,
    order: EvolutionOrder = EvolutionOrder.EXACT,
    *,
    pipeline: Optional[StagePipeline] = None,
) -> np.ndarray:
    """Joint amplitudes (meter b, meter c) of the photon at ``at``."""
    at = get_position(at)
    if at.stage_after < c.position.stage_after:
        raise ValueError(
            f"position {at.name} precedes the coupling at {c.position.name}; "
            "only downstream positions are evaluated"
        )
    state = evolve_joint(_resolve(r, t, pipeline), c, EvolutionOrder(order), at.stage_after)
    return state.amps.reshape(N_MODES, N_LEVELS)[at.mode].copy()


def position_probability(
    r: float,
    t: float,
    c: WeakCoupling,
    at: PositionLike,
    order: EvolutionOrder = EvolutionOrder.EXACT,
    *,
    meter_level: Optional[int] = None,
    pipeline: Optional[StagePipeline] = None,
) -> float:
    """Probability of finding the photon at ``at``.

    Summed over both meter levels unless ``meter_level`` is given, in which case
    it is the joint (not renormalized) probability with that meter outcome.
    """
    amps = position_amplitudes(r, t, c, at, order, pipeline=pipeline)
    if meter_level is not None:
        return float(abs(amps[meter_level]) ** 2)
    return float(np.sum(np.abs(amps) ** 2))
