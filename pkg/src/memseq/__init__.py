"""Spiking temporal-memory sequence prediction with ReRAM synapse models."""

__version__ = "0.1.0"

from .device import (
    DeviceMode,
    DeviceParams,
    DeviceState,
    NoFixedPointError,
    ParameterError,
    PulseKind,
    apply_pulse,
    fixed_point,
    read_conductance,
    run_pulse_protocol,
    sample_initial_state,
)
from .engine import SimConfig, checkpoint, make_state, restore, run_steps
from .experiments import (
    ExperimentConfig,
    SequenceProgram,
    SweepAxis,
    SweepSpec,
    assess_transition,
    episodes_to_solution,
    run_ensemble,
    run_realization,
    run_sweep,
)
from .network import (
    OFF_STUCK,
    ON_STUCK,
    NetworkParams,
    build_network,
    compute_dap_threshold,
    inject_failure,
)
from .neurons import ExcNeuronParams, InhNeuronParams, build_exc_propagator, build_inh_propagator
