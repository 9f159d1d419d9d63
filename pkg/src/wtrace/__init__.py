"""Faint-trace markers, weak values and path posteriors in multi-path interferometers."""

from .engine import (
    AccountingNotJustified,
    ConditioningOnNull,
    MarkerModel,
    OrthogonalSelection,
    backward_state,
    conditional_decomposition,
    detection_probability,
    forward_state,
    incoherence_test,
    path_posterior,
    run_with_markers,
    weak_value,
    weak_values,
)
from .network import (
    BeamSplitter,
    Checkpoint,
    DomainError,
    Network,
    PhaseConfig,
    PhaseShift,
    StateVector,
    StructuralError,
    apply_element,
    build_three_path,
    total_unitary,
)

__version__ = "0.1.0"
