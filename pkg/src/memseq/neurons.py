"""LIF neuron models and their exact discrete-time propagators.

Excitatory neurons integrate three current channels: a dendritic channel with
an alpha-shaped kernel (peak V_read * G at t = tau_dendritic after a delivery)
that can latch into a plateau, and exponential channels for external and
inhibitory input.  Inhibitory neurons have a single exponential excitatory
channel.  All channels plus the membrane form a linear system between spike
events; one grid step is advanced by the closed-form matrix exponential, so
the trajectory is exact at grid points for inputs that arrive on the grid.

Plateau (dendritic action potential, dAP): when the dendritic current crosses
theta_dap and no plateau is running, the channel is clamped to i_dap for
tau_dap, its auxiliary state is cleared, and deliveries arriving during the
plateau are discarded.  Each onset increments the neuron's plateau-rate trace,
which decays with trace_tau and drives the homeostatic part of plasticity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .device import ParameterError

V_READ = 1.0  # read voltage; 1 in the {ms, mV, uA, uS, uF} unit system


@dataclass(frozen=True)
class ExcNeuronParams:
    tau_m: float = 10.0        # ms
    c_m: float = 250.0         # uF
    v_threshold: float = 30.0  # mV
    v_reset: float = 0.0       # mV
    tau_ref: float = 20.0      # ms
    tau_dendritic: float = 2.0  # ms, alpha kernel of the plastic inputs
    tau_external: float = 2.0   # ms
    tau_inhibitory: float = 1.0  # ms
    i_dap: float = 200.0       # uA, plateau amplitude
    tau_dap: float = 60.0      # ms, plateau duration

    def __post_init__(self):
        _check_positive_taus(self)

    @property
    def r_m(self) -> float:
        return self.tau_m / self.c_m  # mV per uA


@dataclass(frozen=True)
class InhNeuronParams:
    tau_m: float = 5.0
    c_m: float = 250.0
    v_threshold: float = 15.0
    v_reset: float = 0.0
    tau_ref: float = 2.0
    tau_excitatory: float = 0.5  # ms, time constant of input from E neurons

    def __post_init__(self):
        _check_positive_taus(self)

    @property
    def r_m(self) -> float:
        return self.tau_m / self.c_m


def _check_positive_taus(p) -> None:
    for name, value in vars(p).items():
        if name.startswith("tau_") and name != "tau_ref" and value <= 0.0:
            raise ParameterError(f"{name} must be > 0, got {value}")
    if p.tau_ref < 0.0:
        raise ParameterError(f"tau_ref must be >= 0, got {p.tau_ref}")
    if p.v_threshold <= p.v_reset:
        raise ParameterError("v_threshold must exceed v_reset")


def _exp_coupling(h: float, tau_m: float, tau_s: float, r_over_tau: float) -> float:
    """Weight of an exponential current channel's state in the membrane
    update over one step of length h (limit form when tau_s == tau_m)."""
    m = math.exp(-h / tau_m)
    k = 1.0 / tau_m - 1.0 / tau_s
    if abs(k) < 1e-12:
        return r_over_tau * h * m
    s = math.exp(-h / tau_s)
    return r_over_tau * (s - m) / k


def _alpha_couplings(h: float, tau_m: float, tau_a: float, r_over_tau: float) -> tuple[float, float]:
    """Weights of the alpha channel's (auxiliary, current) states in the
    membrane update over one step of length h."""
    m = math.exp(-h / tau_m)
    a = math.exp(-h / tau_a)
    k = 1.0 / tau_m - 1.0 / tau_a
    if abs(k) < 1e-12:
        return r_over_tau * m * h * h / 2.0, r_over_tau * h * m
    c_cur = r_over_tau * (a - m) / k
    c_aux = r_over_tau * (h * a / k - (a - m) / (k * k))
    return c_aux, c_cur


@dataclass(frozen=True)
class ExcPropagator:
    """Exact one-step update coefficients for an excitatory neuron.

    State order (y_aux, y_den, i_ext, i_inh, v):
        y_aux' = dec_den * y_aux
        y_den' = dec_den * (y_den + dt * y_aux)
        i_ext' = dec_ext * i_ext
        i_inh' = dec_inh * i_inh
        v'     = dec_m * v + c_aux*y_aux + c_den*y_den + c_ext*i_ext
                 + c_inh*i_inh   (+ r_m*(1-dec_m)*I for a constant current I)
    """

    dt: float
    dec_m: float
    dec_den: float
    dec_ext: float
    dec_inh: float
    c_aux: float
    c_den: float
    c_ext: float
    c_inh: float
    const_gain: float  # multiplies a constant current (plateau) in the v update
    ref_steps: int
    dap_steps: int
    v_threshold: float
    v_reset: float
    i_dap: float


@dataclass(frozen=True)
class InhPropagator:
    dt: float
    dec_m: float
    dec_exc: float
    c_exc: float
    ref_steps: int
    v_threshold: float
    v_reset: float


def build_exc_propagator(params: ExcNeuronParams, dt: float) -> ExcPropagator:
    if dt <= 0.0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    r_over_tau = params.r_m / params.tau_m
    c_aux, c_den = _alpha_couplings(dt, params.tau_m, params.tau_dendritic, r_over_tau)
    dec_m = math.exp(-dt / params.tau_m)
    return ExcPropagator(
        dt=dt,
        dec_m=dec_m,
        dec_den=math.exp(-dt / params.tau_dendritic),
        dec_ext=math.exp(-dt / params.tau_external),
        dec_inh=math.exp(-dt / params.tau_inhibitory),
        c_aux=c_aux,
        c_den=c_den,
        c_ext=_exp_coupling(dt, params.tau_m, params.tau_external, r_over_tau),
        c_inh=_exp_coupling(dt, params.tau_m, params.tau_inhibitory, r_over_tau),
        const_gain=params.r_m * (1.0 - dec_m),
        ref_steps=_steps_on_grid(params.tau_ref, dt, "tau_ref"),
        dap_steps=_steps_on_grid(params.tau_dap, dt, "tau_dap"),
        v_threshold=params.v_threshold,
        v_reset=params.v_reset,
        i_dap=params.i_dap,
    )


def build_inh_propagator(params: InhNeuronParams, dt: float) -> InhPropagator:
    if dt <= 0.0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    r_over_tau = params.r_m / params.tau_m
    return InhPropagator(
        dt=dt,
        dec_m=math.exp(-dt / params.tau_m),
        dec_exc=math.exp(-dt / params.tau_excitatory),
        c_exc=_exp_coupling(dt, params.tau_m, params.tau_excitatory, r_over_tau),
        ref_steps=_steps_on_grid(params.tau_ref, dt, "tau_ref"),
        v_threshold=params.v_threshold,
        v_reset=params.v_reset,
    )


def _steps_on_grid(duration: float, dt: float, name: str) -> int:
    steps = round(duration / dt)
    if abs(steps * dt - duration) > 1e-9 * max(1.0, duration):
        raise ParameterError(f"{name}={duration} ms is not a multiple of dt={dt} ms")
    return steps


def alpha_kernel_jump(conductance: float, tau_dendritic: float) -> float:
    """Auxiliary-state jump for one delivery on the dendritic channel, sized
    so the resulting current peaks at V_read * conductance at t = tau."""
    return V_READ * conductance * math.e / tau_dendritic


def dap_trace_decay(z: float, elapsed_ms: float, trace_tau: float) -> float:
    """Plateau-rate trace after elapsed_ms without an onset."""
    if trace_tau <= 0.0:
        raise ParameterError(f"trace_tau must be > 0, got {trace_tau}")
    return z * math.exp(-elapsed_ms / trace_tau)
