"""Phenomenological ReRAM synapse models: analog and binary switching.

Analog devices move their conductance g between per-device bounds
[g_min, g_max] with weight-dependent increments

    dg = +g_max * set_rate   * (1 - g/g_max)**set_exponent   + X   (SET)
    dg = -g_max * reset_rate * (g/g_max)**reset_exponent     + X   (RESET)

where X is Gaussian write noise.  Binary devices keep the same update rule on
a hidden permanence p in [p_min, p_max]; the conductance is two-valued,
g_max once p crosses the maturity threshold, g_min below it.

Reads return g plus non-accumulating Gaussian read noise.  Noise amplitudes
are dimensionless fractions of the device scale: std = write_noise * g_max
for conductance (write_noise * p_max for permanence), read_noise * g_max for
reads.

The scalar update functions are numba-compiled; the network kernel calls them
per plasticity event, and the standalone pulse-protocol runner reuses the
same code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from numba import njit, uint64

from .streams import (
    TAG_DEVICE_INIT,
    TAG_READ_NOISE,
    TAG_WRITE_NOISE,
    RandomStream,
    keyed_normal,
)


class ParameterError(ValueError):
    """Raised when device or network parameters violate an invariant."""


class NoFixedPointError(ValueError):
    """Raised when the pulse-pair balance equation has no root in range."""


class DeviceMode(str, Enum):
    ANALOG = "analog"
    BINARY = "binary"


class PulseKind(int, Enum):
    POTENTIATION = 0
    DEPRESSION = 1


@dataclass(frozen=True)
class DeviceParams:
    """Device model parameters.  Defaults are the module's reference set:
    conductance scale 300 uS over initial states near 10 uS (on-off ~30),
    square-root weight dependence, depression a third of potentiation."""

    set_rate: float = 0.10          # potentiation rate, in (0, 1]
    reset_rate: float = 0.10 / 3.0  # depression rate, >= 0
    set_exponent: float = 0.5       # weight dependence of SET, >= 0
    reset_exponent: float = 0.5     # weight dependence of RESET, >= 0
    g_max: float = 300.0            # uS
    g0_min: float = 7.5             # uS, lower bound for initial conductance
    g0_max: float = 12.5            # uS, upper bound for initial conductance
    write_noise: float = 0.05       # fraction of scale per update
    read_noise: float = 0.01        # fraction of g_max per read
    p_max: float = 20.0             # permanence ceiling (binary)
    p0_min: float = 0.0
    p0_max: float = 8.0
    maturity_threshold: float = 10.0  # permanence level that switches to HCS
    mode: DeviceMode = DeviceMode.ANALOG

    def __post_init__(self):
        if not (0.0 <= self.g0_min <= self.g0_max < self.g_max):
            raise ParameterError(
                f"need 0 <= g0_min <= g0_max < g_max, got "
                f"({self.g0_min}, {self.g0_max}, {self.g_max})"
            )
        if self.set_rate <= 0.0:
            raise ParameterError(f"set_rate must be > 0, got {self.set_rate}")
        if self.reset_rate < 0.0:
            raise ParameterError(f"reset_rate must be >= 0, got {self.reset_rate}")
        if self.set_exponent < 0.0 or self.reset_exponent < 0.0:
            raise ParameterError("weight-dependence exponents must be >= 0")
        if self.write_noise < 0.0 or self.read_noise < 0.0:
            raise ParameterError("noise amplitudes must be >= 0")
        if self.mode == DeviceMode.BINARY:
            if not (self.p0_max < self.maturity_threshold < self.p_max):
                raise ParameterError(
                    f"binary mode needs p0_max < maturity_threshold < p_max, got "
                    f"({self.p0_max}, {self.maturity_threshold}, {self.p_max})"
                )
            if not (0.0 <= self.p0_min <= self.p0_max):
                raise ParameterError("need 0 <= p0_min <= p0_max")

    @property
    def binary(self) -> bool:
        return self.mode == DeviceMode.BINARY


@dataclass
class DeviceState:
    """Per-device state: conductance g bounded in [g_min, g_max]; binary
    devices additionally carry the permanence p bounded in [p_min, p_max]."""

    g: float
    g_min: float
    p: float = 0.0
    p_min: float = 0.0


# --- scalar update rules (shared by the network kernel) ---------------------


@njit(cache=True, inline="always")
def pulse_delta(x, scale, rate_set, rate_reset, exp_set, exp_reset, is_set):
    """Noise-free increment of the bounded state variable x (conductance or
    permanence) on one SET/RESET pulse.  0**0 evaluates to 1, so exponent 0
    gives constant-step updates."""
    if is_set:
        return scale * rate_set * (1.0 - x / scale) ** exp_set
    return -scale * rate_reset * (x / scale) ** exp_reset


@njit(cache=True, inline="always")
def apply_pulse_analog(g, g_min, kind, g_max, rate_set, rate_reset, exp_set,
                       exp_reset, noise_std, seed, edge, counter):
    d = pulse_delta(g, g_max, rate_set, rate_reset, exp_set, exp_reset, kind == 0)
    if noise_std > 0.0:
        d += noise_std * keyed_normal(seed, uint64(TAG_WRITE_NOISE), edge, counter)
    return min(max(g + d, g_min), g_max)


@njit(cache=True, inline="always")
def apply_pulse_binary(p, p_min, kind, p_max, rate_set, rate_reset, exp_set,
                       exp_reset, noise_std, seed, edge, counter):
    d = pulse_delta(p, p_max, rate_set, rate_reset, exp_set, exp_reset, kind == 0)
    if noise_std > 0.0:
        d += noise_std * keyed_normal(seed, uint64(TAG_WRITE_NOISE), edge, counter)
    return min(max(p + d, p_min), p_max)


@njit(cache=True, inline="always")
def binary_conductance(p, threshold, g_max, g_min):
    return g_max if p >= threshold else g_min


@njit(cache=True, inline="always")
def read_noisy(g, noise_std, seed, edge, counter):
    if noise_std <= 0.0:
        return g
    return g + noise_std * keyed_normal(seed, uint64(TAG_READ_NOISE), edge, counter)


# --- per-device API ----------------------------------------------------------


def sample_initial_state(params: DeviceParams, rng: RandomStream) -> DeviceState:
    """Fresh device: g_min ~ U(g0_min, g0_max) and g starts there; binary
    devices also draw their permanence floor p_min ~ U(p0_min, p0_max)."""
    g_min = rng.uniform(params.g0_min, params.g0_max, tag=TAG_DEVICE_INIT)
    state = DeviceState(g=g_min, g_min=g_min)
    if params.binary:
        p_min = rng.uniform(params.p0_min, params.p0_max, tag=TAG_DEVICE_INIT)
        state.p = p_min
        state.p_min = p_min
    return state


def apply_pulse(state: DeviceState, kind: PulseKind, params: DeviceParams,
                rng: RandomStream) -> DeviceState:
    """One SET or RESET pulse; returns the updated state (input unchanged)."""
    noise = rng.normal(tag=TAG_WRITE_NOISE) if params.write_noise > 0.0 else 0.0
    if params.binary:
        d = pulse_delta(state.p, params.p_max, params.set_rate, params.reset_rate,
                        params.set_exponent, params.reset_exponent,
                        kind == PulseKind.POTENTIATION)
        p = min(max(state.p + d + params.write_noise * params.p_max * noise,
                    state.p_min), params.p_max)
        g = binary_conductance(p, params.maturity_threshold, params.g_max, state.g_min)
        return replace(state, p=p, g=g)
    d = pulse_delta(state.g, params.g_max, params.set_rate, params.reset_rate,
                    params.set_exponent, params.reset_exponent,
                    kind == PulseKind.POTENTIATION)
    g = min(max(state.g + d + params.write_noise * params.g_max * noise,
                state.g_min), params.g_max)
    return replace(state, g=g)


def read_conductance(state: DeviceState, params: DeviceParams,
                     rng: RandomStream) -> float:
    """Noisy, non-mutating readout of the conductance in uS."""
    if params.read_noise <= 0.0:
        return state.g
    return state.g + params.read_noise * params.g_max * rng.normal(tag=TAG_READ_NOISE)


def fixed_point(params: DeviceParams) -> float:
    """Stationary state of a SET pulse immediately followed by a RESET pulse,
    with noise off: the root of

        set_rate * (1 - x)**set_exponent == reset_rate * x**reset_exponent

    on x in (0, 1), scaled by g_max (analog) or p_max (binary).  If depression
    never balances potentiation, growth stops only at the upper clip and the
    scale itself is returned; if the net update is nonpositive everywhere,
    there is no interior rest point and NoFixedPointError is raised.
    """
    scale = params.p_max if params.binary else params.g_max

    def net(x: float) -> float:
        return (params.set_rate * (1.0 - x) ** params.set_exponent
                - params.reset_rate * x ** params.reset_exponent)

    lo, hi = 0.0, 1.0
    f_lo, f_hi = net(lo), net(hi)
    if f_lo > 0.0 and f_hi >= 0.0:
        return scale
    if f_lo <= 0.0:
        raise NoFixedPointError(
            "depression dominates potentiation everywhere; no rest point above 0"
        )
    # f_lo > 0 > f_hi and net() is monotone decreasing for exponents >= 0:
    # bisect to 1e-9 of scale
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        if net(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if (hi - lo) * scale < 1e-9 * scale:
            break
    return 0.5 * (lo + hi) * scale


def set_reset_schedule(n: int = 100) -> list[PulseKind]:
    """n SET pulses followed by n RESET pulses."""
    return [PulseKind.POTENTIATION] * n + [PulseKind.DEPRESSION] * n


def interleaved_schedule(n_pairs: int = 100) -> list[PulseKind]:
    """n pairs of SET immediately followed by RESET, the regime the sequence
    network drives its synapses in."""
    out: list[PulseKind] = []
    for _ in range(n_pairs):
        out.append(PulseKind.POTENTIATION)
        out.append(PulseKind.DEPRESSION)
    return out


def run_pulse_protocol(params: DeviceParams, schedule: list[PulseKind],
                       seed: int) -> list[tuple[int, PulseKind, float, float]]:
    """Drive one fresh device through `schedule`, reading the (noisy)
    conductance after every pulse.  Returns rows (step, kind, g_read, p);
    p is meaningful in binary mode only."""
    if not schedule:
        raise ParameterError("pulse schedule must be nonempty")
    rng = RandomStream(seed)
    state = sample_initial_state(params, rng)
    trace = []
    for i, kind in enumerate(schedule):
        state = apply_pulse(state, kind, params, rng)
        g_read = read_conductance(state, params, rng)
        trace.append((i, kind, g_read, state.p))
    return trace
