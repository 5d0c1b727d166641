"""Grid-stepped simulation kernel: exact propagation, delayed spike routing,
plasticity on spike events, keyed noise, snapshots.

One step s -> s+1 is processed in fixed sub-phases so results are independent
of the order in which neurons are iterated:

  1. external stimulus events scheduled at grid point s are pushed into the
     delivery ring buffers;
  2. all neurons advance one step by the closed-form propagator, consume the
     deliveries due at s+1, and threshold checks run (plateau onset, somatic
     spike);
  3. for every excitatory spike, first the postsynaptic side of plasticity
     (pairing-gated potentiation plus the homeostatic pulse) runs over all
     firing neurons, then the presynaptic side (conductance read + delayed
     delivery, depression, pairing-ledger update); inhibitory spikes are
     routed to their subpopulation.

Each plastic edge owns keyed noise counters, so any schedule of draws is
reproducible and independent of evaluation order.  All state lives in flat
numpy arrays; snapshots are a straight dump of those arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numba import njit, uint64

from .device import ParameterError
from .network import NetworkTopology
from .neurons import V_READ, build_exc_propagator, build_inh_propagator
from .streams import keyed_normal, substream_seed
from . import device as dev

SNAPSHOT_VERSION = 1

# float-parameter vector indices
CF_DEC_M, CF_DEC_DEN, CF_DEC_EXT, CF_DEC_INH = 0, 1, 2, 3
CF_C_AUX, CF_C_DEN, CF_C_EXT, CF_C_INH, CF_CONST_GAIN = 4, 5, 6, 7, 8
CF_V_TH, CF_V_RESET, CF_I_DAP, CF_THETA_DAP = 9, 10, 11, 12
CF_IDEC_M, CF_IDEC_EXC, CF_IC_EXC, CF_IV_TH, CF_IV_RESET = 13, 14, 15, 16, 17
CF_G_MAX, CF_SET_RATE, CF_RESET_RATE, CF_SET_EXP, CF_RESET_EXP = 18, 19, 20, 21, 22
CF_MATURITY, CF_P_MAX, CF_WNOISE_G, CF_WNOISE_P, CF_RNOISE = 23, 24, 25, 26, 27
CF_LAM_H, CF_Z_STAR, CF_ZDEC, CF_W_E2I, CF_W_I2E, CF_W_EXT, CF_ALPHA_JUMP = 28, 29, 30, 31, 32, 33, 34
N_CF = 35

# int-parameter vector indices
CI_REF_STEPS, CI_DAP_STEPS, CI_IREF_STEPS = 0, 1, 2
CI_GAP_MIN, CI_WINDOW = 3, 4
CI_D_EE, CI_D_EXT, CI_D_E2I, CI_D_I2E = 5, 6, 7, 8
CI_N_PER_SUBPOP, CI_BINARY, CI_REC_SPIKES, CI_REC_ONSETS = 9, 10, 11, 12
N_CI = 13

NEVER = np.int64(-(2**62))

TAG_WRITE = np.uint64(dev.TAG_WRITE_NOISE)
TAG_READ = np.uint64(dev.TAG_READ_NOISE)


@dataclass
class SimConfig:
    dt: float = 0.1  # ms
    master_seed: int = 1
    record_spikes: bool = False
    record_dap_onsets: bool = False
    probe_neurons: tuple[int, ...] = ()


def _delay_steps(delay: float, dt: float, name: str) -> int:
    steps = round(delay / dt)
    if steps < 1 or abs(steps * dt - delay) > 1e-9:
        raise ParameterError(
            f"{name}={delay} ms must be a positive multiple of dt={dt} ms"
        )
    return steps


@njit(cache=True, inline="always")
def _apply_write_pulse(e, kind, rate_set, rate_reset, seed, cf, g, g_min, p,
                       p_min, wctr, binary):
    """One pulse on edge e (kind 0 = SET, 1 = RESET) with keyed write noise.
    The caller guarantees the edge is not pinned."""
    ctr = wctr[e]
    wctr[e] = ctr + uint64(1)
    if binary:
        x = p[e]
        d = dev.pulse_delta(x, cf[CF_P_MAX], rate_set, rate_reset,
                            cf[CF_SET_EXP], cf[CF_RESET_EXP], kind == 0)
        if cf[CF_WNOISE_P] > 0.0:
            d += cf[CF_WNOISE_P] * keyed_normal(seed, TAG_WRITE, uint64(e), ctr)
        x = min(max(x + d, p_min[e]), cf[CF_P_MAX])
        p[e] = x
        g[e] = cf[CF_G_MAX] if x >= cf[CF_MATURITY] else g_min[e]
    else:
        x = g[e]
        d = dev.pulse_delta(x, cf[CF_G_MAX], rate_set, rate_reset,
                            cf[CF_SET_EXP], cf[CF_RESET_EXP], kind == 0)
        if cf[CF_WNOISE_G] > 0.0:
            d += cf[CF_WNOISE_G] * keyed_normal(seed, TAG_WRITE, uint64(e), ctr)
        g[e] = min(max(x + d, g_min[e]), cf[CF_G_MAX])


@njit(cache=True)
def _run_steps(
    s_begin, n_steps, seed, dt,
    # excitatory state
    v_e, refr_e, y_aux, y_den, i_ext, i_inh, dap_until, z_val, z_step,
    # inhibitory state
    v_i, refr_i, i_exc,
    # parameters
    cf, ci,
    # topology
    in_ptr, in_pre, out_ptr, out_edge, edge_post, subpop_of,
    # devices
    g, g_min, p, p_min, pinned, wctr, rctr,
    # pairing ledger
    last_pre, last_pair,
    # ring buffers
    buf_den, buf_ext, buf_inh, buf_ie,
    # events
    stim_step, stim_subpop, stim_subset, first_subset,
    assess_step, counts,
    # recording
    spike_step, spike_neuron, onset_step, onset_neuron,
    probe_ids, probe_out,
    # scratch: indices of neurons that fired this step
    fired_e, fired_i,
):
    ne = v_e.shape[0]
    ni = v_i.shape[0]
    n_sub = ci[CI_N_PER_SUBPOP]
    binary = ci[CI_BINARY] != 0
    nsl_den = buf_den.shape[0]
    nsl_ext = buf_ext.shape[0]
    nsl_inh = buf_inh.shape[0]
    nsl_ie = buf_ie.shape[0]

    next_ev = 0
    while next_ev < stim_step.shape[0] and stim_step[next_ev] < s_begin:
        next_ev += 1
    next_as = 0
    while next_as < assess_step.shape[0] and assess_step[next_as] <= s_begin:
        next_as += 1

    n_spikes = np.int64(0)
    n_onsets = np.int64(0)
    n_den_pushes = np.int64(0)

    for s in range(s_begin, s_begin + n_steps):
        now = s + 1

        # phase 1: external stimulus emissions scheduled at grid point s
        while next_ev < stim_step.shape[0] and stim_step[next_ev] == s:
            sp = stim_subpop[next_ev]
            slot = (s + ci[CI_D_EXT]) % nsl_ext
            if stim_subset[next_ev] != 0:
                for idx in range(first_subset.shape[1]):
                    buf_ext[slot, first_subset[sp, idx]] += cf[CF_W_EXT] * V_READ
            else:
                for i in range(sp * n_sub, (sp + 1) * n_sub):
                    buf_ext[slot, i] += cf[CF_W_EXT] * V_READ
            next_ev += 1

        # phase 2: propagate neurons to grid point `now`, consume deliveries
        slot_den = now % nsl_den
        slot_ext = now % nsl_ext
        slot_inh = now % nsl_inh
        slot_ie = now % nsl_ie
        nf_e = 0
        nf_i = 0
        for i in range(ne):
            clamped = s < dap_until[i]
            if clamped:
                v = (cf[CF_DEC_M] * v_e[i] + cf[CF_CONST_GAIN] * cf[CF_I_DAP]
                     + cf[CF_C_EXT] * i_ext[i] + cf[CF_C_INH] * i_inh[i])
            else:
                ya = y_aux[i]
                v = (cf[CF_DEC_M] * v_e[i] + cf[CF_C_AUX] * ya
                     + cf[CF_C_DEN] * y_den[i]
                     + cf[CF_C_EXT] * i_ext[i] + cf[CF_C_INH] * i_inh[i])
                y_den[i] = cf[CF_DEC_DEN] * (y_den[i] + dt * ya)
                y_aux[i] = cf[CF_DEC_DEN] * ya
            i_ext[i] = cf[CF_DEC_EXT] * i_ext[i] + buf_ext[slot_ext, i]
            buf_ext[slot_ext, i] = 0.0
            i_inh[i] = cf[CF_DEC_INH] * i_inh[i] + buf_inh[slot_inh, i]
            buf_inh[slot_inh, i] = 0.0
            jump = buf_den[slot_den, i]
            buf_den[slot_den, i] = 0.0
            if now >= dap_until[i]:
                # dendritic deliveries during a plateau are discarded
                y_aux[i] += jump
                # plateau onset check on the dendritic current at `now`
                if y_den[i] >= cf[CF_THETA_DAP]:
                    dap_until[i] = now + ci[CI_DAP_STEPS]
                    y_aux[i] = 0.0
                    y_den[i] = 0.0
                    z_val[i] = z_val[i] * np.exp(-(now - z_step[i]) * cf[CF_ZDEC]) + 1.0
                    z_step[i] = now
                    if ci[CI_REC_ONSETS] != 0 and n_onsets < onset_step.shape[0]:
                        onset_step[n_onsets] = now
                        onset_neuron[n_onsets] = i
                    n_onsets += 1
            if now <= refr_e[i]:
                v = cf[CF_V_RESET]
            elif v >= cf[CF_V_TH]:
                v = cf[CF_V_RESET]
                refr_e[i] = now + ci[CI_REF_STEPS]
                fired_e[nf_e] = i
                nf_e += 1
            v_e[i] = v

        for q in range(ni):
            v = cf[CF_IDEC_M] * v_i[q] + cf[CF_IC_EXC] * i_exc[q]
            i_exc[q] = cf[CF_IDEC_EXC] * i_exc[q] + buf_ie[slot_ie, q]
            buf_ie[slot_ie, q] = 0.0
            if now <= refr_i[q]:
                v = cf[CF_IV_RESET]
            elif v >= cf[CF_IV_TH]:
                v = cf[CF_IV_RESET]
                refr_i[q] = now + ci[CI_IREF_STEPS]
                fired_i[nf_i] = q
                nf_i += 1
            v_i[q] = v

        # phase 3a: postsynaptic plasticity for all excitatory spikes
        for fi in range(nf_e):
            i = fired_e[fi]
            z_now = z_val[i] * np.exp(-(now - z_step[i]) * cf[CF_ZDEC])
            homeo_kind = 1 if z_now > cf[CF_Z_STAR] else 0
            for e in range(in_ptr[i], in_ptr[i + 1]):
                lp = last_pre[in_pre[e]]
                lag = now - lp
                if lag <= ci[CI_GAP_MIN] or lag > ci[CI_WINDOW]:
                    continue
                if last_pair[e] >= lp:
                    continue  # that presynaptic spike already paired here
                last_pair[e] = lp
                if pinned[e] != 0:
                    continue
                _apply_write_pulse(e, 0, cf[CF_SET_RATE], cf[CF_RESET_RATE],
                                   seed, cf, g, g_min, p, p_min, wctr, binary)
                _apply_write_pulse(e, homeo_kind, cf[CF_LAM_H], cf[CF_LAM_H],
                                   seed, cf, g, g_min, p, p_min, wctr, binary)

        # phase 3b: presynaptic side -- delivery reads, depression, WTA input
        for fi in range(nf_e):
            j = fired_e[fi]
            slot = (now + ci[CI_D_EE]) % nsl_den
            for idx in range(out_ptr[j], out_ptr[j + 1]):
                e = out_edge[idx]
                rc = rctr[e]
                rctr[e] = rc + uint64(1)
                gv = g[e]
                if cf[CF_RNOISE] > 0.0:
                    gv += cf[CF_RNOISE] * keyed_normal(seed, TAG_READ, uint64(e), rc)
                buf_den[slot, edge_post[e]] += gv * cf[CF_ALPHA_JUMP]
                n_den_pushes += 1
                if pinned[e] == 0:
                    _apply_write_pulse(e, 1, cf[CF_SET_RATE], cf[CF_RESET_RATE],
                                       seed, cf, g, g_min, p, p_min, wctr, binary)
            last_pre[j] = now
            buf_ie[(now + ci[CI_D_E2I]) % nsl_ie, subpop_of[j]] += cf[CF_W_E2I] * V_READ
            if ci[CI_REC_SPIKES] != 0 and n_spikes < spike_step.shape[0]:
                spike_step[n_spikes] = now
                spike_neuron[n_spikes] = j
            n_spikes += 1

        for fi in range(nf_i):
            q = fired_i[fi]
            slot = (now + ci[CI_D_I2E]) % nsl_inh
            for i in range(q * n_sub, (q + 1) * n_sub):
                buf_inh[slot, i] += cf[CF_W_I2E] * V_READ
            if ci[CI_REC_SPIKES] != 0 and n_spikes < spike_step.shape[0]:
                spike_step[n_spikes] = now
                spike_neuron[n_spikes] = ne + q
            n_spikes += 1

        # phase 4: assessment sample (plateau-active neurons per subpopulation)
        while next_as < counts.shape[0] and assess_step[next_as] == now:
            for i in range(ne):
                if now < dap_until[i]:
                    counts[next_as, subpop_of[i]] += 1
            next_as += 1

        if probe_ids.shape[0] > 0:
            row = now - s_begin - 1
            for k in range(probe_ids.shape[0]):
                i = probe_ids[k]
                probe_out[row, k, 0] = v_e[i]
                if now < dap_until[i]:
                    probe_out[row, k, 1] = cf[CF_I_DAP]
                    probe_out[row, k, 2] = 1.0
                else:
                    probe_out[row, k, 1] = y_den[i]
                    probe_out[row, k, 2] = 0.0

    return n_spikes, n_onsets, n_den_pushes


@dataclass
class SimState:
    """Mutable runtime state for one network instance on a grid."""

    config: SimConfig
    network: NetworkTopology
    step: int
    seed: int  # realization-folded root seed for keyed draws
    cf: np.ndarray
    ci: np.ndarray
    v_e: np.ndarray
    refr_e: np.ndarray
    y_aux: np.ndarray
    y_den: np.ndarray
    i_ext: np.ndarray
    i_inh: np.ndarray
    dap_until: np.ndarray
    z_val: np.ndarray
    z_step: np.ndarray
    v_i: np.ndarray
    refr_i: np.ndarray
    i_exc: np.ndarray
    last_pre: np.ndarray
    last_pair: np.ndarray
    buf_den: np.ndarray
    buf_ext: np.ndarray
    buf_inh: np.ndarray
    buf_ie: np.ndarray
    fired_e: np.ndarray
    fired_i: np.ndarray


def make_state(network: NetworkTopology, config: SimConfig,
               realization: int = 0) -> SimState:
    """Fresh runtime state: everything at rest, clock at step 0."""
    dt = config.dt
    params = network.params
    ep = build_exc_propagator(network.exc_params, dt)
    ip = build_inh_propagator(network.inh_params, dt)

    cf = np.zeros(N_CF)
    cf[CF_DEC_M], cf[CF_DEC_DEN], cf[CF_DEC_EXT], cf[CF_DEC_INH] = (
        ep.dec_m, ep.dec_den, ep.dec_ext, ep.dec_inh)
    cf[CF_C_AUX], cf[CF_C_DEN], cf[CF_C_EXT], cf[CF_C_INH] = (
        ep.c_aux, ep.c_den, ep.c_ext, ep.c_inh)
    cf[CF_CONST_GAIN] = ep.const_gain
    cf[CF_V_TH], cf[CF_V_RESET], cf[CF_I_DAP] = ep.v_threshold, ep.v_reset, ep.i_dap
    cf[CF_THETA_DAP] = network.theta_dap
    cf[CF_IDEC_M], cf[CF_IDEC_EXC], cf[CF_IC_EXC] = ip.dec_m, ip.dec_exc, ip.c_exc
    cf[CF_IV_TH], cf[CF_IV_RESET] = ip.v_threshold, ip.v_reset
    d = network.device_params
    cf[CF_G_MAX], cf[CF_SET_RATE], cf[CF_RESET_RATE] = d.g_max, d.set_rate, d.reset_rate
    cf[CF_SET_EXP], cf[CF_RESET_EXP] = d.set_exponent, d.reset_exponent
    cf[CF_MATURITY], cf[CF_P_MAX] = d.maturity_threshold, d.p_max
    cf[CF_WNOISE_G] = d.write_noise * d.g_max
    cf[CF_WNOISE_P] = d.write_noise * d.p_max
    cf[CF_RNOISE] = d.read_noise * d.g_max
    cf[CF_LAM_H] = d.reset_rate  # homeostasis pulses run at the depression rate
    cf[CF_Z_STAR] = params.plateau_rate_target
    cf[CF_ZDEC] = dt / params.plateau_trace_tau
    cf[CF_W_E2I] = params.w_exc_to_inh
    cf[CF_W_I2E] = params.w_inh_to_exc
    cf[CF_W_EXT] = params.w_external
    cf[CF_ALPHA_JUMP] = V_READ * np.e / network.exc_params.tau_dendritic

    ci = np.zeros(N_CI, dtype=np.int64)
    ci[CI_REF_STEPS], ci[CI_DAP_STEPS], ci[CI_IREF_STEPS] = (
        ep.ref_steps, ep.dap_steps, ip.ref_steps)
    ci[CI_GAP_MIN] = _delay_steps(params.pairing_gap_min, dt, "pairing_gap_min")
    ci[CI_WINDOW] = _delay_steps(params.pairing_window, dt, "pairing_window")
    ci[CI_D_EE] = _delay_steps(params.delay_ee, dt, "delay_ee")
    ci[CI_D_EXT] = _delay_steps(params.delay_external, dt, "delay_external")
    ci[CI_D_E2I] = _delay_steps(params.delay_exc_to_inh, dt, "delay_exc_to_inh")
    ci[CI_D_I2E] = _delay_steps(params.delay_inh_to_exc, dt, "delay_inh_to_exc")
    ci[CI_N_PER_SUBPOP] = params.subpop_size
    ci[CI_BINARY] = 1 if d.binary else 0

    ne, ni = params.n_excitatory, params.n_inhibitory
    return SimState(
        config=config,
        network=network,
        step=0,
        seed=substream_seed(config.master_seed, realization),
        cf=cf,
        ci=ci,
        v_e=np.full(ne, ep.v_reset),
        refr_e=np.full(ne, NEVER, dtype=np.int64),
        y_aux=np.zeros(ne),
        y_den=np.zeros(ne),
        i_ext=np.zeros(ne),
        i_inh=np.zeros(ne),
        dap_until=np.full(ne, NEVER, dtype=np.int64),
        z_val=np.zeros(ne),
        z_step=np.zeros(ne, dtype=np.int64),
        v_i=np.full(ni, ip.v_reset),
        refr_i=np.full(ni, NEVER, dtype=np.int64),
        i_exc=np.zeros(ni),
        last_pre=np.full(ne, NEVER, dtype=np.int64),
        last_pair=np.full(network.n_edges, NEVER, dtype=np.int64),
        buf_den=np.zeros((ci[CI_D_EE] + 1, ne)),
        buf_ext=np.zeros((ci[CI_D_EXT] + 1, ne)),
        buf_inh=np.zeros((ci[CI_D_I2E] + 1, ne)),
        buf_ie=np.zeros((ci[CI_D_E2I] + 1, ni)),
        fired_e=np.zeros(ne, dtype=np.int64),
        fired_i=np.zeros(ni, dtype=np.int64),
    )


@dataclass
class StepBlockResult:
    n_spikes: int
    n_onsets: int
    n_den_pushes: int
    counts: np.ndarray
    spikes: np.ndarray | None = None       # (n, 2) [step, neuron]; I offset by n_exc
    onsets: np.ndarray | None = None       # (n, 2) [step, neuron]
    probe_trace: np.ndarray | None = None  # (n_steps, n_probe, 3) [v, i_den, dap]


_EMPTY_I8 = np.zeros(0, dtype=np.int64)
_EMPTY_I4 = np.zeros(0, dtype=np.int32)
_EMPTY_U1 = np.zeros(0, dtype=np.uint8)


def run_steps(state: SimState, n_steps: int,
              stim_step: np.ndarray | None = None,
              stim_subpop: np.ndarray | None = None,
              stim_subset: np.ndarray | None = None,
              assess_step: np.ndarray | None = None,
              spike_cap: int = 0) -> StepBlockResult:
    """Advance the clock `n_steps`, handling the given stimulus emissions and
    assessment samples (all in absolute grid steps).  Returns per-assessment
    plateau counts per subpopulation and any requested recordings."""
    net = state.network
    cfg = state.config
    if stim_step is None:
        stim_step = _EMPTY_I8
        stim_subpop = _EMPTY_I4
        stim_subset = _EMPTY_U1
    if assess_step is None:
        assess_step = _EMPTY_I8
    counts = np.zeros((assess_step.shape[0], net.params.n_subpopulations),
                      dtype=np.int32)

    rec_spikes = cfg.record_spikes or spike_cap > 0
    if rec_spikes and spike_cap == 0:
        # refractory periods bound the spike count per neuron over the block
        per_e = n_steps // max(state.ci[CI_REF_STEPS], 1) + 2
        per_i = n_steps // max(state.ci[CI_IREF_STEPS], 1) + 2
        spike_cap = int(net.params.n_excitatory * per_e + net.params.n_inhibitory * per_i)
    spike_step = np.zeros(spike_cap, dtype=np.int64)
    spike_neuron = np.zeros(spike_cap, dtype=np.int32)
    rec_onsets = cfg.record_dap_onsets
    onset_cap = 0
    if rec_onsets:
        onset_cap = int(net.params.n_excitatory * (n_steps // max(state.ci[CI_DAP_STEPS], 1) + 2))
    onset_step = np.zeros(onset_cap, dtype=np.int64)
    onset_neuron = np.zeros(onset_cap, dtype=np.int32)

    probe_ids = np.asarray(cfg.probe_neurons, dtype=np.int32)
    probe_out = np.zeros((n_steps if probe_ids.size else 0, probe_ids.size, 3))

    state.ci[CI_REC_SPIKES] = 1 if rec_spikes else 0
    state.ci[CI_REC_ONSETS] = 1 if rec_onsets else 0

    n_spikes, n_onsets, n_pushes = _run_steps(
        np.int64(state.step), np.int64(n_steps), np.uint64(state.seed), cfg.dt,
        state.v_e, state.refr_e, state.y_aux, state.y_den, state.i_ext,
        state.i_inh, state.dap_until, state.z_val, state.z_step,
        state.v_i, state.refr_i, state.i_exc,
        state.cf, state.ci,
        net.in_ptr, net.in_pre, net.out_ptr, net.out_edge, net.edge_post,
        net.subpop_of,
        net.g, net.g_min, net.p, net.p_min, net.pinned, net.write_ctr,
        net.read_ctr,
        state.last_pre, state.last_pair,
        state.buf_den, state.buf_ext, state.buf_inh, state.buf_ie,
        stim_step, stim_subpop, stim_subset, net.first_subset,
        assess_step, counts,
        spike_step, spike_neuron, onset_step, onset_neuron,
        probe_ids, probe_out,
        state.fired_e, state.fired_i,
    )
    state.step += int(n_steps)

    if rec_spikes and n_spikes > spike_cap:
        raise RuntimeError(f"spike recording overflow: {n_spikes} > {spike_cap}")
    if rec_onsets and n_onsets > onset_cap:
        raise RuntimeError(f"onset recording overflow: {n_onsets} > {onset_cap}")
    result = StepBlockResult(
        n_spikes=int(n_spikes), n_onsets=int(n_onsets),
        n_den_pushes=int(n_pushes), counts=counts)
    if rec_spikes:
        result.spikes = np.stack(
            [spike_step[:n_spikes], spike_neuron[:n_spikes].astype(np.int64)], axis=1)
    if rec_onsets:
        result.onsets = np.stack(
            [onset_step[:n_onsets], onset_neuron[:n_onsets].astype(np.int64)], axis=1)
    if probe_ids.size:
        result.probe_trace = probe_out
    return result


# --- snapshots ----------------------------------------------------------------

_STATE_ARRAYS = [
    "v_e", "refr_e", "y_aux", "y_den", "i_ext", "i_inh", "dap_until",
    "z_val", "z_step", "v_i", "refr_i", "i_exc", "last_pre", "last_pair",
    "buf_den", "buf_ext", "buf_inh", "buf_ie",
]
_NET_ARRAYS = [
    "in_ptr", "in_pre", "out_ptr", "out_edge", "edge_post", "subpop_of",
    "g", "g_min", "p", "p_min", "pinned", "write_ctr", "read_ctr",
    "first_subset",
]


def checkpoint(state: SimState, path: str) -> None:
    """Write a complete snapshot: device states, ledgers, traces, buffers,
    stream counters, and the clock.  Restoring continues bit-exactly."""
    from dataclasses import asdict

    net = state.network
    meta = {
        "version": SNAPSHOT_VERSION,
        "step": state.step,
        "seed": state.seed,
        "config": {
            "dt": state.config.dt,
            "master_seed": state.config.master_seed,
        },
        "network_seed": net.seed,
        "theta_dap": net.theta_dap,
        "params": asdict(net.params),
        "device_params": {**asdict(net.device_params),
                          "mode": net.device_params.mode.value},
        "exc_params": asdict(net.exc_params),
        "inh_params": asdict(net.inh_params),
    }
    arrays = {f"state_{n}": getattr(state, n) for n in _STATE_ARRAYS}
    arrays.update({f"net_{n}": getattr(net, n) for n in _NET_ARRAYS})
    np.savez_compressed(path, meta=json.dumps(meta), **arrays)


def restore(path: str) -> SimState:
    """Load a snapshot written by `checkpoint`."""
    from .device import DeviceMode, DeviceParams
    from .network import NetworkParams, NetworkTopology
    from .neurons import ExcNeuronParams, InhNeuronParams

    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("version") != SNAPSHOT_VERSION:
            raise ParameterError(
                f"snapshot version {meta.get('version')} != {SNAPSHOT_VERSION}")
        dp = dict(meta["device_params"])
        dp["mode"] = DeviceMode(dp["mode"])
        net = NetworkTopology(
            params=NetworkParams(**meta["params"]),
            device_params=DeviceParams(**dp),
            exc_params=ExcNeuronParams(**meta["exc_params"]),
            inh_params=InhNeuronParams(**meta["inh_params"]),
            theta_dap=meta["theta_dap"],
            seed=meta["network_seed"],
            **{n: data[f"net_{n}"].copy() for n in _NET_ARRAYS},
        )
        config = SimConfig(dt=meta["config"]["dt"],
                           master_seed=meta["config"]["master_seed"])
        state = make_state(net, config)
        state.step = int(meta["step"])
        state.seed = int(meta["seed"])
        for n in _STATE_ARRAYS:
            getattr(state, n)[...] = data[f"state_{n}"]
    return state
