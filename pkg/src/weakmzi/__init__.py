"""Weak measurement of a single photon in a nested Mach-Zehnder interferometer."""

from .interferometer import (
    DETECTORS,
    POSITIONS,
    BeamSplitter,
    NormalizationError,
    PipelineConsistencyError,
    Position,
    StagePipeline,
    beam_splitter_unitary,
    build_nested_mzi,
    detector_probabilities,
    evolve_to_stage,
    get_position,
    position_projector,
    postselected_state,
    preselected_state,
)
from .measurement import (
    EvolutionOrder,
    MeterProbabilities,
    WeakCoupling,
    coupling_first_order,
    coupling_unitary_exact,
    meter_rotation,
    position_amplitudes,
    position_probability,
    postselect_at_coupling,
    postselected_meter_probabilities,
    run_weak_measurement,
)
from .state import (
    StateVector,
    apply_operator,
    check_unitary,
    inner_product,
    project_component,
    tensor_product,
)
from .weak_values import (
    DegeneratePostselectionError,
    WeakValueResult,
    infer_weak_value,
    joint_weak_value,
    weak_value,
)

__version__ = "0.1.0"
