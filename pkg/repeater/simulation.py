"""
Seeded Monte Carlo of the nested repeater protocol.

A basic link retries local PME generation (slots of 1/r, success p_r) and a
heralded link attempt (cost L0/c, success p_b) until the link attempt
succeeds. A level-i link needs two level-(i-1) links, waits for the slower of
the two and then tries a swap with success p_i; a failed swap discards both
sub-links. A swap attempt adds no time of its own.

Trials are sampled in fixed-size chunks, each with its own generator spawned
from the root seed, so the result never depends on the worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import norm

import config
from .analytics import ProtocolParams, RateBreakdown, success_probs, total_time
from .common import ConfigError, SimulationError, log


@dataclass(frozen=True)
class SimConfig:
    params: ProtocolParams
    trials: int = config.SIM_DEFAULT_TRIALS
    seed: int = config.SIM_DEFAULT_SEED
    memory_coherence_time: Optional[float] = None   # seconds, None means no decoherence
    time_model: str = "attempt-slotted"
    workers: int = config.SIM_DEFAULT_WORKERS

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"sim.trials: must be a positive integer, got {self.trials!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"sim.seed: must be an unsigned 64-bit integer, got {self.seed!r}")
        tau = self.memory_coherence_time
        if tau is not None and (not isinstance(tau, (int, float)) or isinstance(tau, bool) or not tau > 0):
            raise ConfigError(f"sim.memory_coherence_time: must be positive, got {self.memory_coherence_time!r}")
        if self.time_model not in config.SIM_TIME_MODELS:
            raise ConfigError(f"sim.time_model: expected one of {config.SIM_TIME_MODELS}, got {self.time_model!r}")
        if isinstance(self.workers, bool) or not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError(f"sim.workers: must be a positive integer, got {self.workers!r}")


@dataclass(frozen=True)
class RetryModel:
    """Success probabilities and per-attempt costs of every stage."""
    p_r: float
    p_b: float
    p_swap: Tuple[float, ...] = ()
    slot_time: float = 0.0
    link_time: float = 0.0

    def __post_init__(self):
        for name, p in [("p_r", self.p_r), ("p_b", self.p_b)] + [
                (f"p_swap[{i}]", p) for i, p in enumerate(self.p_swap)]:
            if not config.SIM_MIN_PROBABILITY <= p <= 1.0:
                raise SimulationError(f"{name}={p} cannot be sampled, the retry loop would not terminate")

    @classmethod
    def from_params(cls, params: ProtocolParams) -> "RetryModel":
        probs = success_probs(params)
        return cls(
            p_r=probs.p_r,
            p_b=probs.p_b,
            p_swap=(probs.p_i,) * params.n,
            slot_time=1.0 / params.r,
            link_time=params.L0 / params.c,
        )

    @property
    def levels(self) -> int:
        return len(self.p_swap)


@dataclass(frozen=True)
class SimOutcome:
    mean_total_time: float
    std_error: float
    trials: int
    attempts_per_level: Tuple[Dict[int, int], ...]   # per level: {2^b: attempts in [2^b, 2^(b+1))}
    success_rate_conditional: Tuple[float, ...]      # per level: links / attempts
    mean_attempts: Tuple[float, ...]

    def as_record(self) -> Dict[str, Any]:
        return asdict(self)


class _Tally:
    def __init__(self, levels: int):
        self.links = np.zeros(levels + 1, dtype=np.int64)
        self.attempts = np.zeros(levels + 1, dtype=np.float64)
        self.hist = np.zeros((levels + 1, config.SIM_HISTOGRAM_BUCKETS), dtype=np.int64)

    def add(self, level: int, k: np.ndarray) -> None:
        self.links[level] += k.size
        self.attempts[level] += float(k.sum())
        buckets = np.frexp(k.astype(np.float64))[1] - 1
        self.hist[level] += np.bincount(buckets, minlength=config.SIM_HISTOGRAM_BUCKETS)

    def merge(self, other: "_Tally") -> None:
        self.links += other.links
        self.attempts += other.attempts
        self.hist += other.hist


@dataclass
class _Chunk:
    count: int
    mean: float
    m2: float
    tally: _Tally = field(repr=False)


class _Sampler:
    def __init__(self, model: RetryModel, rng: np.random.Generator, time_model: str,
                 coherence_time: Optional[float]):
        self.model = model
        self.rng = rng
        self.continuous = time_model == "continuous"
        self.coherence_time = coherence_time
        self.tally = _Tally(model.levels)

    def link_times(self, level: int, count: int) -> np.ndarray:
        if count == 0:
            return np.zeros(0)
        if level == 0:
            return self._basic(count)
        k = self.rng.geometric(self.model.p_swap[level - 1], size=count)
        self.tally.add(level, k)
        pairs = self.link_times(level - 1, 2 * int(k.sum())).reshape(-1, 2)
        if self.coherence_time is not None:
            pairs = self._hold(level - 1, pairs)
        attempt = pairs.max(axis=1)
        starts = np.concatenate(([0], np.cumsum(k)[:-1]))
        return np.add.reduceat(attempt, starts)

    def _basic(self, count: int) -> np.ndarray:
        m = self.model
        k = self.rng.geometric(m.p_b, size=count)
        self.tally.add(0, k)
        if self.continuous:
            local = self.rng.gamma(k, m.slot_time / m.p_r)
        else:
            local = (k + self.rng.negative_binomial(k, m.p_r)) * m.slot_time
        return local + k * m.link_time

    def _hold(self, level: int, pairs: np.ndarray) -> np.ndarray:
        """Regenerate sub-links that decay while waiting for their partner."""
        a, b = pairs[:, 0].copy(), pairs[:, 1].copy()
        pending = np.arange(a.size)
        while pending.size:
            pa, pb = a[pending], b[pending]
            life = self.rng.exponential(self.coherence_time, size=pending.size)
            died = life < np.abs(pa - pb)
            if not died.any():
                break
            idx = pending[died]
            early_a = (pa <= pb)[died]
            fresh = np.minimum(pa, pb)[died] + life[died] + self.link_times(level, idx.size)
            a[idx[early_a]] = fresh[early_a]
            b[idx[~early_a]] = fresh[~early_a]
            pending = idx
        return np.stack([a, b], axis=1)


def _run_chunk(model: RetryModel, count: int, seed: np.random.SeedSequence, time_model: str,
               coherence_time: Optional[float]) -> _Chunk:
    sampler = _Sampler(model, np.random.default_rng(seed), time_model, coherence_time)
    times = sampler.link_times(model.levels, count)
    mean = float(times.mean())
    return _Chunk(count, mean, float(((times - mean) ** 2).sum()), sampler.tally)


def _merge(chunks: List[_Chunk], levels: int) -> Tuple[int, float, float, _Tally]:
    """Combine chunk moments in chunk order."""
    n, mean, m2 = 0, 0.0, 0.0
    tally = _Tally(levels)
    for chunk in chunks:
        total = n + chunk.count
        delta = chunk.mean - mean
        mean += delta * chunk.count / total
        m2 += chunk.m2 + delta ** 2 * n * chunk.count / total
        n = total
        tally.merge(chunk.tally)
    return n, mean, m2, tally


def simulate_model(model: RetryModel, trials: int, seed: int, workers: int = 1,
                   time_model: str = "attempt-slotted",
                   memory_coherence_time: Optional[float] = None) -> SimOutcome:
    """Sample `trials` top-level links of a retry model."""
    if trials < 1:
        raise ConfigError(f"sim.trials: must be a positive integer, got {trials!r}")
    sizes = [config.SIM_CHUNK_TRIALS] * (trials // config.SIM_CHUNK_TRIALS)
    if trials % config.SIM_CHUNK_TRIALS:
        sizes.append(trials % config.SIM_CHUNK_TRIALS)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    log(f"Sampling {trials} trials in {len(sizes)} chunks on {workers} workers "
        f"(levels={model.levels}, seed={seed})", "DEBUG")

    results: List[Optional[_Chunk]] = [None] * len(sizes)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {}
        for i, (size, chunk_seed) in enumerate(zip(sizes, seeds)):
            future = executor.submit(_run_chunk, model, size, chunk_seed, time_model, memory_coherence_time)
            futures[future] = i
        for future in as_completed(futures):
            results[futures[future]] = future.result()

    n, mean, m2, tally = _merge(results, model.levels)
    std_error = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
    histograms = tuple(
        {2 ** b: int(c) for b, c in enumerate(row) if c} for row in tally.hist
    )
    rates = tuple(float(links / att) if att else 0.0 for links, att in zip(tally.links, tally.attempts))
    mean_attempts = tuple(float(att / links) if links else 0.0 for links, att in zip(tally.links, tally.attempts))
    log(f"Monte Carlo done: mean {mean:.6g} s, std error {std_error:.3g} s")
    return SimOutcome(mean, std_error, n, histograms, rates, mean_attempts)


def _simulate(cfg: SimConfig) -> SimOutcome:
    return simulate_model(RetryModel.from_params(cfg.params), cfg.trials, cfg.seed, cfg.workers,
                          cfg.time_model, cfg.memory_coherence_time)


def simulate_basic_link(cfg: SimConfig) -> SimOutcome:
    """Elementary link over L0 = L_n / 2^n; nesting is ignored."""
    model = replace(RetryModel.from_params(cfg.params), p_swap=())
    return simulate_model(model, cfg.trials, cfg.seed, cfg.workers, cfg.time_model,
                          cfg.memory_coherence_time)


def simulate_nested(cfg: SimConfig) -> SimOutcome:
    if cfg.params.n < 1:
        raise ConfigError(f"protocol.n: nested simulation needs n >= 1, got {cfg.params.n}")
    return _simulate(cfg)


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    L: float
    trials: int
    mean_total_time: float
    std_error: float
    analytic_T_tot: float
    ratio: float
    ci_low: float
    ci_high: float
    band_low: float
    band_high: float
    success_rate: float
    mean_attempts: float
    flagged: bool

    def as_record(self) -> Dict[str, Any]:
        return asdict(self)


CONVERGENCE_COLUMNS = tuple(ConvergenceRow.__dataclass_fields__)


def convergence_report(cfg: SimConfig, analytic: Optional[RateBreakdown] = None) -> List[ConvergenceRow]:
    """
    Monte Carlo over analytic total time for every level 0..n at fixed L0.

    Level 0 is flagged when 1 falls outside the confidence interval, deeper
    levels when the ratio leaves config.SIM_CONVERGENCE_BAND.
    """
    z = float(norm.ppf(0.5 + config.SIM_CONFIDENCE / 2.0))
    band_low, band_high = config.SIM_CONVERGENCE_BAND
    L0 = cfg.params.L0
    rows = []
    for level in range(cfg.params.n + 1):
        params = replace(cfg.params, n=level, L_n=L0 * 2 ** level)
        outcome = _simulate(replace(cfg, params=params))
        expected = total_time(params)
        if level == cfg.params.n and analytic is not None and analytic.T_tot is not None:
            expected = analytic.T_tot
        ratio = outcome.mean_total_time / expected
        half = z * outcome.std_error / expected
        if level == 0:
            flagged = not (ratio - half <= 1.0 <= ratio + half)
        else:
            flagged = not (band_low <= ratio <= band_high)
        if flagged:
            log(f"Level {level}: Monte Carlo/analytic ratio {ratio:.4f} outside expected range", "WARNING")
        rows.append(ConvergenceRow(
            level=level,
            L=params.L_n,
            trials=outcome.trials,
            mean_total_time=outcome.mean_total_time,
            std_error=outcome.std_error,
            analytic_T_tot=expected,
            ratio=ratio,
            ci_low=ratio - half,
            ci_high=ratio + half,
            band_low=band_low,
            band_high=band_high,
            success_rate=outcome.success_rate_conditional[level],
            mean_attempts=outcome.mean_attempts[level],
            flagged=flagged,
        ))
    return rows
