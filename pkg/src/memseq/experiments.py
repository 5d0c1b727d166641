"""Training protocol, prediction metrics, ensembles, sweeps, failure runs.

An episode presents every sequence of the program once, elements spaced by
the inter-stimulus interval and sequences by the inter-sequence interval.
Elements that start a sequence are delivered only to a fixed random subset of
their subpopulation; all other elements stimulate the whole subpopulation.

One grid step before each non-first element's stimulus, the neurons holding
an active dendritic plateau are counted per subpopulation; subpopulations at
or above the predict threshold form the predicted set.  A transition is
correct iff that set is exactly {target}; the episode error is the mean of
the per-transition error over all non-first elements of all sequences.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .device import DeviceParams, ParameterError
from .engine import SimConfig, SimState, make_state, run_steps
from .network import (
    OFF_STUCK,
    ON_STUCK,
    NetworkParams,
    NetworkTopology,
    build_network,
    compute_dap_threshold,
    inject_failure,
)
from .neurons import ExcNeuronParams, InhNeuronParams
from .streams import TAG_FAILURE, RandomStream, substream_seed

DEFAULT_SEQUENCES = ("ADBEI", "FDBEC", "HLJKD", "GLJKE")


@dataclass(frozen=True)
class SequenceProgram:
    sequences: tuple[str, ...] = DEFAULT_SEQUENCES
    inter_stimulus_ms: float = 40.0
    inter_sequence_ms: float = 100.0
    episodes: int = 400

    def __post_init__(self):
        for seq in self.sequences:
            if len(seq) < 2:
                raise ParameterError(f"sequence {seq!r} shorter than 2 elements")

    def alphabet(self) -> list[str]:
        return sorted({el for seq in self.sequences for el in seq})

    def subpop_of_element(self, element: str) -> int:
        """Elements map to subpopulations in alphabetical order."""
        idx = self.alphabet().index(element)
        return idx

    def first_elements(self) -> set[str]:
        return {seq[0] for seq in self.sequences if seq}

    def n_transitions(self) -> int:
        return sum(len(seq) - 1 for seq in self.sequences)

    def episode_ms(self) -> float:
        """Episode length including the trailing inter-sequence gap, so
        consecutive episodes abut seamlessly."""
        total = 0.0
        for seq in self.sequences:
            total += (len(seq) - 1) * self.inter_stimulus_ms + self.inter_sequence_ms
        return total

    def element_times(self) -> list[tuple[float, str, bool, bool]]:
        """(time_ms, element, is_first_of_sequence, assessed) within one
        episode.  The first element of every sequence is neither assessed nor
        delivered to the full subpopulation."""
        out = []
        t = 0.0
        for seq in self.sequences:
            for pos, el in enumerate(seq):
                out.append((t, el, pos == 0, pos > 0))
                t += self.inter_stimulus_ms
            t += self.inter_sequence_ms - self.inter_stimulus_ms
        return out


@dataclass
class EpisodeEvents:
    """Per-episode stimulus and assessment tables in local grid steps."""

    n_steps: int
    stim_step: np.ndarray
    stim_subpop: np.ndarray
    stim_subset: np.ndarray
    assess_step: np.ndarray
    assess_target: np.ndarray


def compile_episode(program: SequenceProgram, dt: float) -> EpisodeEvents:
    n_steps = round(program.episode_ms() / dt)
    stim_step, stim_subpop, stim_subset = [], [], []
    assess_step, assess_target = [], []
    for t, el, is_first, assessed in program.element_times():
        step = round(t / dt)
        sp = program.subpop_of_element(el)
        stim_step.append(step)
        stim_subpop.append(sp)
        stim_subset.append(1 if is_first else 0)
        if assessed:
            assess_step.append(step - 1)
            assess_target.append(sp)
    return EpisodeEvents(
        n_steps=n_steps,
        stim_step=np.asarray(stim_step, dtype=np.int64),
        stim_subpop=np.asarray(stim_subpop, dtype=np.int32),
        stim_subset=np.asarray(stim_subset, dtype=np.uint8),
        assess_step=np.asarray(assess_step, dtype=np.int64),
        assess_target=np.asarray(assess_target, dtype=np.int32),
    )


@dataclass
class TransitionAssessment:
    target: int
    predicted: tuple[int, ...]
    false_positives: int
    false_negative: int

    @property
    def error(self) -> int:
        return 1 if (self.false_positives + self.false_negative) > 0 else 0


def assess_transition(counts: np.ndarray, target: int,
                      predict_threshold: int) -> TransitionAssessment:
    """Score one transition from the per-subpopulation plateau counts taken
    one step before the target's stimulus."""
    predicted = tuple(int(k) for k in np.nonzero(counts >= predict_threshold)[0])
    fp = sum(1 for k in predicted if k != target)
    fn = 0 if target in predicted else 1
    return TransitionAssessment(target=target, predicted=predicted,
                                false_positives=fp, false_negative=fn)


def episode_error(counts: np.ndarray, targets: np.ndarray,
                  predict_threshold: int) -> float:
    """Mean binary transition error over one episode's assessments."""
    if counts.shape[0] == 0:
        return 0.0
    wrong = 0
    for row, target in zip(counts, targets):
        if assess_transition(row, int(target), predict_threshold).error:
            wrong += 1
    return wrong / counts.shape[0]


def episodes_to_solution(errors: list[float] | np.ndarray) -> int | None:
    """First episode index from which the error is and stays zero."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ParameterError("empty error curve")
    nonzero = np.nonzero(errors != 0.0)[0]
    if nonzero.size == 0:
        return 0
    first = int(nonzero[-1]) + 1
    return first if first < errors.size else None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one realization needs, bundled for process workers."""

    network: NetworkParams = NetworkParams()
    device: DeviceParams = DeviceParams()
    exc: ExcNeuronParams = ExcNeuronParams()
    inh: InhNeuronParams = InhNeuronParams()
    program: SequenceProgram = SequenceProgram()
    sim: SimConfig = field(default_factory=SimConfig)
    failure_fraction: float = 0.0
    failure_polarity: int = ON_STUCK
    failure_episode: int | None = None


@dataclass
class RealizationRecord:
    realization: int
    seed: int
    errors: np.ndarray                 # (episodes,)
    counts: np.ndarray                 # (episodes, transitions, subpops)
    episodes_to_solution: int | None
    state: SimState | None = None      # populated when keep_state=True


def run_realization(cfg: ExperimentConfig, realization: int,
                    keep_state: bool = False,
                    episode_hook=None) -> RealizationRecord:
    """Train one network realization through all episodes of the program,
    assessing inline every episode.  Plasticity is always active."""
    seed = cfg.sim.master_seed
    net = build_network(cfg.network, cfg.device, cfg.exc, cfg.inh,
                        seed=substream_seed(seed, realization))
    state = make_state(net, cfg.sim, realization=realization)
    events = compile_episode(cfg.program, cfg.sim.dt)
    if events.stim_subpop.size and events.stim_subpop.max() >= cfg.network.n_subpopulations:
        raise ParameterError(
            f"program uses {int(events.stim_subpop.max()) + 1} elements but the "
            f"network has only {cfg.network.n_subpopulations} subpopulations")
    n_tr = events.assess_step.shape[0]
    episodes = cfg.program.episodes
    errors = np.zeros(episodes)
    all_counts = np.zeros((episodes, n_tr, cfg.network.n_subpopulations),
                          dtype=np.int32)
    failure_rng = None
    for ep in range(episodes):
        if cfg.failure_episode is not None and ep == cfg.failure_episode:
            failure_rng = RandomStream(state.seed).numpy_rng(tag=TAG_FAILURE)
            inject_failure(net, cfg.failure_fraction, cfg.failure_polarity,
                           rng=failure_rng)
        offset = state.step
        result = run_steps(
            state, events.n_steps,
            stim_step=events.stim_step + offset,
            stim_subpop=events.stim_subpop,
            stim_subset=events.stim_subset,
            assess_step=events.assess_step + offset,
        )
        errors[ep] = episode_error(result.counts, events.assess_target,
                                   cfg.network.predict_threshold)
        all_counts[ep] = result.counts
        if episode_hook is not None:
            episode_hook(ep, errors[ep], state)
    return RealizationRecord(
        realization=realization,
        seed=seed,
        errors=errors,
        counts=all_counts,
        episodes_to_solution=episodes_to_solution(errors),
        state=state if keep_state else None,
    )


def _worker(args) -> tuple[int, np.ndarray, int | None]:
    cfg, realization = args
    rec = run_realization(cfg, realization)
    return realization, rec.errors, rec.episodes_to_solution


@dataclass
class EnsembleResult:
    errors: np.ndarray  # (realizations, episodes)
    episodes_to_solution: list[int | None]

    def median_curve(self) -> np.ndarray:
        return np.median(self.errors, axis=0)

    def percentile_band(self, lo: float = 5.0, hi: float = 95.0):
        return (np.percentile(self.errors, lo, axis=0),
                np.percentile(self.errors, hi, axis=0))

    def median_episodes_to_solution(self) -> float:
        vals = [v if v is not None else math.inf
                for v in self.episodes_to_solution]
        return float(np.median(vals))


def run_ensemble(cfg: ExperimentConfig, realizations: int,
                 jobs: int = 1) -> EnsembleResult:
    """Train `realizations` independent network instances.  Results are
    ordered by realization index and independent of `jobs`."""
    if realizations < 1:
        raise ParameterError("need at least one realization")
    tasks = [(cfg, r) for r in range(realizations)]
    results: dict[int, tuple[np.ndarray, int | None]] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for r, errors, ets in pool.map(_worker, tasks):
                results[r] = (errors, ets)
    else:
        for task in tasks:
            r, errors, ets = _worker(task)
            results[r] = (errors, ets)
    errors = np.stack([results[r][0] for r in range(realizations)])
    ets = [results[r][1] for r in range(realizations)]
    return EnsembleResult(errors=errors, episodes_to_solution=ets)


# --- parameter sweeps ---------------------------------------------------------


@dataclass(frozen=True)
class SweepAxis:
    name: str       # dotted config key, e.g. "device.set_rate" or "on_off_ratio"
    values: tuple[float, ...]


@dataclass(frozen=True)
class SweepSpec:
    axis1: SweepAxis
    axis2: SweepAxis | None = None
    realizations: int = 3

    def __post_init__(self):
        if self.realizations < 1:
            raise ParameterError("sweep needs realizations >= 1")
        for axis in (self.axis1, self.axis2):
            if axis is not None and len(axis.values) == 0:
                raise ParameterError(f"axis {axis.name} has no values")


def apply_axis_value(cfg: ExperimentConfig, name: str, value: float) -> ExperimentConfig:
    """Set one swept parameter, applying derived-parameter rules.

    `on_off_ratio` sets g_max to ratio times the mean initial conductance;
    `beta` sets reset_rate to set_rate / beta.  Plain dotted device/network
    keys are assigned directly.  The plateau threshold is recomputed from the
    final device parameters whenever they change.
    """
    if name == "on_off_ratio":
        g_floor = 0.5 * (cfg.device.g0_min + cfg.device.g0_max)
        device = replace(cfg.device, g_max=value * g_floor)
        return replace(cfg, device=device)
    if name == "beta":
        if value <= 0:
            raise ParameterError("beta must be > 0")
        device = replace(cfg.device, reset_rate=cfg.device.set_rate / value)
        return replace(cfg, device=device)
    if "." not in name:
        raise ParameterError(f"unknown sweep axis {name!r}")
    section, key = name.split(".", 1)
    if section == "device":
        if not hasattr(cfg.device, key):
            raise ParameterError(f"unknown device parameter {key!r}")
        return replace(cfg, device=replace(cfg.device, **{key: value}))
    if section == "network":
        if not hasattr(cfg.network, key):
            raise ParameterError(f"unknown network parameter {key!r}")
        value = type(getattr(cfg.network, key))(value)
        return replace(cfg, network=replace(cfg.network, **{key: value}))
    raise ParameterError(f"unknown sweep axis {name!r}")


@dataclass
class SweepCell:
    value1: float
    value2: float | None
    median_error: float        # median over realizations of the final error
    median_episodes: float     # median episodes-to-solution (inf = unsolved)
    final_errors: list[float]
    episodes_to_solution: list[int | None]
    failed: str | None = None  # populated when the cell raised


def run_sweep(spec: SweepSpec, base: ExperimentConfig,
              jobs: int = 1) -> list[SweepCell]:
    """Run every grid cell; failures are recorded and the sweep continues."""
    cells = []
    values2 = spec.axis2.values if spec.axis2 is not None else (None,)
    for v1 in spec.axis1.values:
        for v2 in values2:
            cfg = apply_axis_value(base, spec.axis1.name, v1)
            if spec.axis2 is not None:
                cfg = apply_axis_value(cfg, spec.axis2.name, v2)
            try:
                result = run_ensemble(cfg, spec.realizations, jobs=jobs)
            except Exception as exc:  # record, keep sweeping
                cells.append(SweepCell(v1, v2, math.nan, math.nan, [], [],
                                       failed=f"{type(exc).__name__}: {exc}"))
                continue
            finals = [float(row[-1]) for row in result.errors]
            cells.append(SweepCell(
                value1=v1, value2=v2,
                median_error=float(np.median(finals)),
                median_episodes=result.median_episodes_to_solution(),
                final_errors=finals,
                episodes_to_solution=result.episodes_to_solution,
            ))
    return cells
