"""Network construction for the sequence-memory circuit.

Excitatory neurons are split into equal subpopulations, one per stimulus
element.  Plastic excitatory-to-excitatory connectivity is random with a fixed
in-degree, no autapses, no multapses; each edge owns one ReRAM device.  Each
subpopulation has one inhibitory partner wired all-to-all in both directions
(the winner-take-all loop), and one external spike source wired one-to-all.

Edges are stored post-major in CSR form with a parallel out-going CSR, so the
simulation kernel can walk in-edges on postsynaptic spikes (potentiation) and
out-edges on presynaptic spikes (delivery and depression).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .device import DeviceMode, DeviceParams, ParameterError, fixed_point
from .neurons import V_READ, ExcNeuronParams, InhNeuronParams
from .streams import TAG_DEVICE_INIT, TAG_FAILURE, TAG_FIRST_SUBSET, TAG_TOPOLOGY, RandomStream

ON_STUCK = 0   # device pinned at the high-conductance state
OFF_STUCK = 1  # device pinned at its low-conductance state


@dataclass(frozen=True)
class NetworkParams:
    n_excitatory: int = 1800
    n_inhibitory: int = 12      # one WTA partner per subpopulation
    n_subpopulations: int = 12  # = alphabet size of the reference sequence set
    in_degree: int = 450        # plastic inputs per excitatory neuron
    sparse_set_size: int = 20   # target active neurons per subpopulation (rho)
    coincidence_count: int = 20  # presynaptic coincidences defining theta_dap
    w_exc_to_inh: float = 581.19      # uS
    w_inh_to_exc: float = -19373.24   # uS
    w_external: float = 6168.31       # uS
    delay_ee: float = 2.0       # ms
    delay_exc_to_inh: float = 0.1
    delay_inh_to_exc: float = 0.1
    delay_external: float = 0.1
    pairing_gap_min: float = 4.0    # ms; lags <= this never potentiate
    pairing_window: float = 60.0    # ms; lags above this never potentiate
    plateau_rate_target: float = 1.8   # homeostasis setpoint for the trace
    plateau_trace_tau: float = 1040.0  # ms
    dap_threshold_scale: float = 1.0   # global factor on theta_dap
    predict_threshold: int = 10  # plateau-active neurons that mark a subpop predicted

    def __post_init__(self):
        if self.n_excitatory % self.n_subpopulations != 0:
            raise ParameterError(
                f"n_excitatory={self.n_excitatory} not divisible by "
                f"n_subpopulations={self.n_subpopulations}"
            )
        if self.in_degree >= self.n_excitatory:
            raise ParameterError(
                f"in_degree={self.in_degree} must be < n_excitatory={self.n_excitatory}"
            )
        if self.n_inhibitory != self.n_subpopulations:
            raise ParameterError(
                "one inhibitory neuron per subpopulation is required "
                f"(n_inhibitory={self.n_inhibitory}, n_subpopulations={self.n_subpopulations})"
            )
        if not (0.0 <= self.pairing_gap_min < self.pairing_window):
            raise ParameterError("need 0 <= pairing_gap_min < pairing_window")
        if self.sparse_set_size > self.subpop_size:
            raise ParameterError("sparse_set_size exceeds subpopulation size")

    @property
    def subpop_size(self) -> int:
        return self.n_excitatory // self.n_subpopulations

    @property
    def potential_prob(self) -> float:
        return self.in_degree / self.n_excitatory


def compute_dap_threshold(params: NetworkParams, device_params: DeviceParams) -> float:
    """Plateau threshold in uA: the peak dendritic current produced by
    coincidence_count presynaptic spikes through potential connectivity at the
    learned conductance (the pulse-pair rest point for analog devices, g_max
    for binary), times the optional global scale."""
    if device_params.mode == DeviceMode.BINARY:
        g_plus = device_params.g_max
    else:
        g_plus = fixed_point(device_params)
    return (g_plus * params.coincidence_count * params.potential_prob
            * V_READ * params.dap_threshold_scale)


@dataclass
class NetworkTopology:
    """Flat-array network state, the unit the engine runs and snapshots."""

    params: NetworkParams
    device_params: DeviceParams
    exc_params: ExcNeuronParams
    inh_params: InhNeuronParams
    theta_dap: float
    seed: int            # per-realization root for all keyed runtime draws
    # post-major CSR of plastic edges
    in_ptr: np.ndarray   # (n_exc+1,) int64
    in_pre: np.ndarray   # (n_edges,) int32, presynaptic neuron per edge
    out_ptr: np.ndarray  # (n_exc+1,) int64
    out_edge: np.ndarray  # (n_edges,) int64, edge ids ordered by presynaptic neuron
    edge_post: np.ndarray  # (n_edges,) int32
    subpop_of: np.ndarray  # (n_exc,) int32
    # device state per edge
    g: np.ndarray        # float64 uS
    g_min: np.ndarray    # float64 uS
    p: np.ndarray        # float64
    p_min: np.ndarray    # float64
    pinned: np.ndarray   # uint8; pinned devices ignore pulses
    write_ctr: np.ndarray  # uint64 keyed-noise counters
    read_ctr: np.ndarray   # uint64
    # first-of-sequence stimulation subsets, one row per subpopulation
    # (row k used only when element k starts a sequence)
    first_subset: np.ndarray  # (n_subpop, sparse_set_size) int32

    @property
    def n_edges(self) -> int:
        return int(self.in_pre.shape[0])

    def mature_mask(self) -> np.ndarray:
        if self.device_params.binary:
            return self.p >= self.device_params.maturity_threshold
        return self.g >= 0.9 * fixed_point(self.device_params)


def build_network(params: NetworkParams, device_params: DeviceParams,
                  exc_params: ExcNeuronParams, inh_params: InhNeuronParams,
                  seed: int) -> NetworkTopology:
    """Wire the network for one realization, deterministically from `seed`."""
    ne = params.n_excitatory
    k = params.in_degree
    stream = RandomStream(seed)
    rng = stream.numpy_rng(tag=TAG_TOPOLOGY)

    # fixed in-degree, uniform without replacement, no autapses
    in_pre = np.empty(ne * k, dtype=np.int32)
    for post in range(ne):
        draw = rng.choice(ne - 1, size=k, replace=False)
        draw[draw >= post] += 1  # skip the diagonal
        draw.sort()
        in_pre[post * k:(post + 1) * k] = draw
    in_ptr = np.arange(0, ne * k + 1, k, dtype=np.int64)
    edge_post = np.repeat(np.arange(ne, dtype=np.int32), k)

    # out-going CSR over the same edge ids
    order = np.argsort(in_pre, kind="stable")
    out_edge = order.astype(np.int64)
    counts = np.bincount(in_pre, minlength=ne)
    out_ptr = np.zeros(ne + 1, dtype=np.int64)
    np.cumsum(counts, out=out_ptr[1:])

    init_rng = stream.numpy_rng(tag=TAG_DEVICE_INIT)
    g_min = init_rng.uniform(device_params.g0_min, device_params.g0_max, size=ne * k)
    p_min = init_rng.uniform(device_params.p0_min, device_params.p0_max, size=ne * k)
    if not device_params.binary:
        p_min[:] = 0.0

    subset_rng = stream.numpy_rng(tag=TAG_FIRST_SUBSET)
    n_sub = params.subpop_size
    first_subset = np.empty((params.n_subpopulations, params.sparse_set_size), dtype=np.int32)
    for sp in range(params.n_subpopulations):
        members = subset_rng.choice(n_sub, size=params.sparse_set_size, replace=False)
        members.sort()
        first_subset[sp] = members + sp * n_sub

    return NetworkTopology(
        params=params,
        device_params=device_params,
        exc_params=exc_params,
        inh_params=inh_params,
        theta_dap=compute_dap_threshold(params, device_params),
        seed=seed,
        in_ptr=in_ptr,
        in_pre=in_pre,
        out_ptr=out_ptr,
        out_edge=out_edge,
        edge_post=edge_post,
        subpop_of=(np.arange(ne, dtype=np.int32) // n_sub),
        g=g_min.copy(),
        g_min=g_min,
        p=p_min.copy(),
        p_min=p_min,
        pinned=np.zeros(ne * k, dtype=np.uint8),
        write_ctr=np.zeros(ne * k, dtype=np.uint64),
        read_ctr=np.zeros(ne * k, dtype=np.uint64),
        first_subset=first_subset,
    )


def inject_failure(network: NetworkTopology, fraction: float, polarity: int,
                   rng: np.random.Generator | None = None) -> int:
    """Pin a random `fraction` of all plastic edges: ON-stuck devices jump to
    g_max, OFF-stuck devices drop to their g_min floor.  Pinned devices
    conduct but ignore every later pulse.  Returns the number pinned."""
    if not (0.0 <= fraction <= 1.0):
        raise ParameterError(f"failure fraction must be in [0, 1], got {fraction}")
    if polarity not in (ON_STUCK, OFF_STUCK):
        raise ParameterError(f"unknown failure polarity {polarity}")
    n = network.n_edges
    count = int(round(fraction * n))
    if count == 0:
        return 0
    if rng is None:
        rng = RandomStream(network.seed).numpy_rng(tag=TAG_FAILURE)
    chosen = rng.choice(n, size=count, replace=False)
    network.pinned[chosen] = 1
    if polarity == ON_STUCK:
        network.g[chosen] = network.device_params.g_max
    else:
        network.g[chosen] = network.g_min[chosen]
    return count


def connectivity_rows(network: NetworkTopology):
    """Rows (pre, post, subpop_pre, subpop_post, g_uS, p, mature) for the
    connectivity dump used to inspect learned pathways."""
    mature = network.mature_mask()
    sub = network.subpop_of
    post = network.edge_post
    pre = network.in_pre
    for e in range(network.n_edges):
        yield (int(pre[e]), int(post[e]), int(sub[pre[e]]), int(sub[post[e]]),
               float(network.g[e]), float(network.p[e]), int(mature[e]))
