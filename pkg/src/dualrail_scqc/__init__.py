"""Space-curve design of robust erasure checks for dual-rail cavity qubits."""

__version__ = "0.1.0"

from .linalg import (  # noqa: E402
    TimeGrid, HamiltonianSampler, propagate, propagate_checkpointed, average_gate_fidelity,
    gate_infidelity, equal_up_to_global_phase,
)
from .geometry import (  # noqa: E402
    ControlPulse, SpaceCurve, FrenetFrame, error_curve, frenet_frame, curvature_torsion,
    pulse_from_curve, implemented_gate, first_order_error, signed_area, closure_gap, is_closed,
    arc_length_reparametrize, point_reflection,
)
from .crosstalk import PulsePair, crosstalk_sweep, square_pulse_pair, tangent_overlap_matrix  # noqa: E402
from .dualrail import (  # noqa: E402
    BASIS_CONVENTION, DualRailParams, BeamSplitterDrive, NoiseSample, native_hamiltonian,
    project_single_photon, project_q4, schwinger_operators, classify_state,
)
from .protocols import (  # noqa: E402
    ErasureCheckStats, ProtocolStep, erasure_check_stats, gaussian_swap_drive, logical_zz,
    single_shot_joint_parity, swap_step, three_step_joint_parity, zz_half_step,
)
from .optimizer import (  # noqa: E402
    CostWeights, PulseAnsatz, optimize, synthesize_swap_ancilla_pulse, synthesize_zz_half_pulse,
)
from .sweep import SweepTable, fit_loglog_slope  # noqa: E402

__all__ = [
    "__version__",
    "TimeGrid", "HamiltonianSampler", "propagate", "propagate_checkpointed",
    "average_gate_fidelity", "gate_infidelity", "equal_up_to_global_phase",
    "ControlPulse", "SpaceCurve", "FrenetFrame", "error_curve", "frenet_frame",
    "curvature_torsion", "pulse_from_curve", "implemented_gate", "first_order_error",
    "signed_area", "closure_gap", "is_closed", "arc_length_reparametrize", "point_reflection",
    "PulsePair", "crosstalk_sweep", "square_pulse_pair", "tangent_overlap_matrix",
    "BASIS_CONVENTION", "DualRailParams", "BeamSplitterDrive", "NoiseSample",
    "native_hamiltonian", "project_single_photon", "project_q4", "schwinger_operators",
    "classify_state",
    "ErasureCheckStats", "ProtocolStep", "erasure_check_stats", "gaussian_swap_drive",
    "logical_zz", "single_shot_joint_parity", "swap_step", "three_step_joint_parity",
    "zz_half_step",
    "CostWeights", "PulseAnsatz", "optimize", "synthesize_swap_ancilla_pulse",
    "synthesize_zz_half_pulse",
    "SweepTable", "fit_loglog_slope",
]
