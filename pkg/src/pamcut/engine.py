"""Population Annealing Monte Carlo for Max-Cut.

A fixed-size population of spin configurations is annealed from
``beta_start`` to ``beta_end``. Each step: pick the largest inverse
temperature increment whose effective sample size stays above the target
(bisection), reweight and systematically resample the population, run
``sweeps_per_step`` Metropolis sweeps per replica, and periodically apply
non-local kicks (random subset flip + greedy descent, kept only when not
worse). If the mean sweep acceptance drops under ``acceptance_floor`` the
inverse temperature freezes and the run continues as plain sampling.

Everything random is drawn from counter-based streams keyed by (seed,
step, replica, purpose), so a run is bit-reproducible for any worker
count or block decomposition.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import IO, Iterable

import numpy as np

from . import kernels, rng
from .codec import encode_hex
from .graph import Graph, as_spins

# replicas per kernel call; fixed so block shape never depends on workers
_BLOCK = 64

# in-memory budget for the population spin matrix (bytes)
_MEMORY_BUDGET = 2_000_000_000


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    """Annealing knobs. Defaults are desk-scale starting points, not tuned
    per instance; override via config file or CLI flags of the same name."""

    population_size: int = 4096
    sweeps_per_step: int = 8
    target_ess_ratio: float = 0.9
    beta_start: float = 0.0
    beta_end: float = 5.0
    max_steps: int = 1000
    kick_period: int = 20
    kick_fraction: float = 0.05
    acceptance_floor: float = 0.02
    seed: int = 1
    # steps without a best-cut improvement tolerated once beta is final
    # (0 = run to max_steps)
    patience: int = 50
    # smallest beta increment when the ESS bisection collapses toward zero
    min_delta_beta: float = 1e-4

    def validate(self) -> "EngineConfig":
        c = self
        if c.population_size < 1:
            raise ConfigError(f"population_size must be positive, got {c.population_size}")
        if c.population_size >= rng.POPULATION:
            raise ConfigError(f"population_size must be < {rng.POPULATION}")
        if c.sweeps_per_step < 1:
            raise ConfigError(f"sweeps_per_step must be positive, got {c.sweeps_per_step}")
        if not (0.0 < c.target_ess_ratio <= 1.0):
            raise ConfigError(f"target_ess_ratio must be in (0, 1], got {c.target_ess_ratio}")
        if c.beta_start < 0.0:
            raise ConfigError(f"beta_start must be >= 0, got {c.beta_start}")
        if not (c.beta_end > c.beta_start):
            raise ConfigError(
                f"beta_end must exceed beta_start, got {c.beta_end} <= {c.beta_start}"
            )
        if c.max_steps < 1:
            raise ConfigError(f"max_steps must be positive, got {c.max_steps}")
        if c.kick_period < 0:
            raise ConfigError(f"kick_period must be >= 0, got {c.kick_period}")
        if not (0.0 <= c.kick_fraction <= 1.0):
            raise ConfigError(f"kick_fraction must be in [0, 1], got {c.kick_fraction}")
        if not (0.0 <= c.acceptance_floor < 1.0):
            raise ConfigError(f"acceptance_floor must be in [0, 1), got {c.acceptance_floor}")
        if c.patience < 0:
            raise ConfigError(f"patience must be >= 0, got {c.patience}")
        if not (c.min_delta_beta > 0.0):
            raise ConfigError(f"min_delta_beta must be positive, got {c.min_delta_beta}")
        return c


_CONFIG_FIELD_TYPES = {
    "population_size": int,
    "sweeps_per_step": int,
    "target_ess_ratio": float,
    "beta_start": float,
    "beta_end": float,
    "max_steps": int,
    "kick_period": int,
    "kick_fraction": float,
    "acceptance_floor": float,
    "seed": int,
    "patience": int,
    "min_delta_beta": float,
}


def config_from_text(text: str, base: EngineConfig | None = None) -> EngineConfig:
    """Parse 'key = value' lines (blank lines and #-comments allowed)."""
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        try:
            overrides[key] = _CONFIG_FIELD_TYPES[key](value)
        except ValueError:
            raise ConfigError(
                f"line {lineno}: cannot parse {value!r} as {_CONFIG_FIELD_TYPES[key].__name__}"
            ) from None
    return replace(base or EngineConfig(), **overrides).validate()


@dataclass
class Replica:
    """One population member; energy caches ising_energy(graph, config)."""

    config: np.ndarray
    energy: int


@dataclass
class Population:
    """Fixed-size replica pool stored columnar: spins (R, n), energies (R,)."""

    spins: np.ndarray
    energies: np.ndarray
    beta: float
    step_index: int = 0

    @property
    def size(self) -> int:
        return int(self.spins.shape[0])

    @property
    def replicas(self) -> list[Replica]:
        return [
            Replica(self.spins[r].copy(), int(self.energies[r]))
            for r in range(self.size)
        ]


@dataclass
class RunResult:
    best_config: np.ndarray
    best_cut: int
    best_energy: int
    beta_trajectory: np.ndarray
    ess_trajectory: np.ndarray
    acceptance_trajectory: np.ndarray
    best_cut_trajectory: np.ndarray
    delta_beta_trajectory: np.ndarray
    mean_energy_trajectory: np.ndarray
    min_energy_trajectory: np.ndarray
    wall_time: float
    total_sweeps: int
    steps: int
    log_mean_weight_sum: float
    frozen_at_step: int | None = None

    def signature(self) -> dict:
        """Deterministic content of the run (everything except wall time)."""
        return {
            "best_hex": encode_hex(self.best_config),
            "best_cut": int(self.best_cut),
            "best_energy": int(self.best_energy),
            "beta": self.beta_trajectory.tolist(),
            "ess": self.ess_trajectory.tolist(),
            "acceptance": self.acceptance_trajectory.tolist(),
            "best_cut_steps": self.best_cut_trajectory.tolist(),
            "delta_beta": self.delta_beta_trajectory.tolist(),
            "mean_energy": self.mean_energy_trajectory.tolist(),
            "min_energy": self.min_energy_trajectory.tolist(),
            "total_sweeps": int(self.total_sweeps),
            "steps": int(self.steps),
            "log_mean_weight_sum": float(self.log_mean_weight_sum),
            "frozen_at_step": self.frozen_at_step,
        }


@lru_cache(maxsize=8)
def _threshold_table_cached(g: Graph, beta: float) -> np.ndarray:
    table = np.exp(-beta * np.arange(2 * g.max_abs_local + 1, dtype=np.float64))
    table.setflags(write=False)
    return table


def threshold_table(g: Graph, beta: float) -> np.ndarray:
    """exp(-beta * d) for every possible positive energy increase d."""
    return _threshold_table_cached(g, float(beta))


def init_population(g: Graph, cfg: EngineConfig) -> Population:
    """R uniform-random replicas at beta_start with exact energies."""
    cfg = cfg.validate()
    n, R = g.n, cfg.population_size
    if R * n > _MEMORY_BUDGET:
        raise ConfigError(
            f"population of {R} x {n} spins exceeds the in-memory budget"
        )
    spins = np.empty((R, n), dtype=np.int8)
    kernels.init_spins_block_keyed(
        np.uint64(cfg.seed & rng.MASK64), np.arange(R, dtype=np.int64), spins
    )
    energies = np.empty(R, dtype=np.int64)
    kernels.energies_block(g.edge_u, g.edge_v, g.edge_w, spins, energies)
    return Population(spins=spins, energies=energies, beta=cfg.beta_start)


def metropolis_sweep(
    g: Graph, r: Replica, beta: float, rand: np.random.Generator
) -> tuple[Replica, float]:
    """One full sweep in node-index order; returns (new replica, accept rate).

    Accepts with probability min(1, exp(-beta * dH)); dH == 0 moves are
    always accepted. The input replica is not mutated.
    """
    spins = as_spins(r.config, g.n).copy().reshape(1, g.n)
    energies = np.array([r.energy], dtype=np.int64)
    accepts = np.zeros(1, dtype=np.int64)
    uniforms = rand.random((1, g.n))
    kernels.sweep_block(
        g.indptr, g.nbr_index, g.nbr_weight, spins, energies,
        threshold_table(g, beta), uniforms, accepts,
    )
    return Replica(spins[0], int(energies[0])), accepts[0] / g.n


def greedy_descent(g: Graph, r: Replica) -> Replica:
    """Flip strictly improving spins in index order until 1-flip-optimal."""
    spins = as_spins(r.config, g.n).copy().reshape(1, g.n)
    energies = np.array([r.energy], dtype=np.int64)
    kernels.descend_block(g.indptr, g.nbr_index, g.nbr_weight, spins, energies)
    return Replica(spins[0], int(energies[0]))


def nonlocal_kick(
    g: Graph, r: Replica, fraction: float, rand: np.random.Generator
) -> Replica:
    """Flip floor(fraction * n) random distinct spins, then greedy-descend."""
    if not (0.0 <= fraction <= 1.0):
        raise ConfigError(f"kick fraction must be in [0, 1], got {fraction}")
    spins = as_spins(r.config, g.n).copy()
    k = int(fraction * g.n)
    if k > 0:
        idx = rand.permutation(g.n)[:k]
        spins[idx] = -spins[idx]
    spins = spins.reshape(1, g.n)
    energies = np.empty(1, dtype=np.int64)
    kernels.energies_block(g.edge_u, g.edge_v, g.edge_w, spins, energies)
    kernels.descend_block(g.indptr, g.nbr_index, g.nbr_weight, spins, energies)
    return Replica(spins[0], int(energies[0]))


def reweight(pop: Population, delta_beta: float) -> np.ndarray:
    """Normalized annealing weights exp(-delta_beta * (E_i - E_min))."""
    if delta_beta < 0:
        raise ConfigError(f"delta_beta must be >= 0, got {delta_beta}")
    shifted = (pop.energies - pop.energies.min()).astype(np.float64)
    w = np.exp(-delta_beta * shifted)
    return w / w.sum()


def effective_sample_size(weights) -> float:
    """ESS = (sum w)^2 / sum w^2; lies in [1, R]."""
    w = np.asarray(weights, dtype=np.float64)
    if (w < 0).any():
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if total == 0.0:
        raise ValueError("weights must not all be zero")
    wn = w / total
    return float(1.0 / np.square(wn).sum())


def choose_delta_beta(pop: Population, target_ess_ratio: float, beta_end: float) -> float:
    """Largest step in (0, beta_end - beta] keeping ESS/R >= target.

    Bisection to relative precision 1e-6. Returns the full remaining step
    when even that satisfies the target (e.g. all energies equal); can
    return ~0 when only an infinitesimal step would satisfy it (the engine
    bumps that up to its configured minimum).
    """
    if not (0.0 < target_ess_ratio <= 1.0):
        raise ConfigError(f"target_ess_ratio must be in (0, 1], got {target_ess_ratio}")
    remaining = beta_end - pop.beta
    if remaining <= 0.0:
        return 0.0
    R = pop.size

    def ratio(db: float) -> float:
        return effective_sample_size(reweight(pop, db)) / R

    if ratio(remaining) >= target_ess_ratio:
        return remaining
    lo, hi = 0.0, remaining
    while (hi - lo) > 1e-6 * hi and hi > 1e-12:
        mid = 0.5 * (lo + hi)
        if ratio(mid) >= target_ess_ratio:
            lo = mid
        else:
            hi = mid
    return lo


def _systematic_indices(weights: np.ndarray, u: float) -> np.ndarray:
    """Ancestor indices at quantiles (u + k)/R of the cumulative weights.

    Exactly uniform weights short-circuit to the identity; in exact
    arithmetic that is what the quantiles select for every u, but rounding
    in the cumulative sum could otherwise shift a boundary by one ulp.
    """
    R = weights.shape[0]
    if np.all(weights == weights[0]):
        return np.arange(R)
    cumw = np.cumsum(weights)
    cumw[-1] = 1.0
    positions = (u + np.arange(R)) / R
    return np.minimum(np.searchsorted(cumw, positions, side="right"), R - 1)


def resample(pop: Population, weights, rand: np.random.Generator) -> Population:
    """Systematic (low-variance) resampling to a same-size population.

    Expected copy count of replica i is R * w_i; uniform weights reproduce
    the population unchanged. Rows are copied, so descendants are
    independent.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape[0] != pop.size:
        raise ValueError(f"{w.shape[0]} weights for population of {pop.size}")
    inds = _systematic_indices(w, float(rand.random()))
    return Population(
        spins=pop.spins[inds].copy(),
        energies=pop.energies[inds].copy(),
        beta=pop.beta,
        step_index=pop.step_index,
    )


def _blocks(R: int) -> list[slice]:
    return [slice(a, min(a + _BLOCK, R)) for a in range(0, R, _BLOCK)]


def kick_population(
    g: Graph,
    pop: Population,
    n_flips: int,
    seed: int,
    step: int,
    executor: ThreadPoolExecutor | None = None,
) -> None:
    """Kick + descend every replica, keeping each result only if not worse.

    In place; after the call no replica's energy exceeds its pre-kick value
    (elitist acceptance).
    """
    seed64 = np.uint64(seed & rng.MASK64)
    step64 = np.uint64(step)
    replica_ids = np.arange(pop.size, dtype=np.int64)
    pre_spins = pop.spins.copy()
    pre_energies = pop.energies.copy()

    def job(blk: slice) -> None:
        kernels.kick_flip_block_keyed(
            g.edge_u, g.edge_v, g.edge_w,
            pop.spins[blk], pop.energies[blk],
            seed64, step64, replica_ids[blk], n_flips,
        )
        kernels.descend_block(
            g.indptr, g.nbr_index, g.nbr_weight, pop.spins[blk], pop.energies[blk]
        )

    _run_blocks(executor, job, _blocks(pop.size))
    worse = pop.energies > pre_energies
    if worse.any():
        pop.spins[worse] = pre_spins[worse]
        pop.energies[worse] = pre_energies[worse]


def _run_blocks(executor: ThreadPoolExecutor | None, job, blocks: Iterable[slice]) -> None:
    if executor is None:
        for blk in blocks:
            job(blk)
    else:
        list(executor.map(job, blocks))


def anneal(
    g: Graph,
    cfg: EngineConfig,
    workers: int = 1,
    diag: IO[str] | None = None,
    check_invariants: bool = False,
) -> RunResult:
    """Run the full annealing loop; deterministic given (g, cfg).

    workers only distributes replica blocks over threads; results are
    bit-identical for every worker count. diag, when given, receives one
    JSON line per step. check_invariants recomputes every cached energy
    from scratch each step (use on small instances only).
    """
    cfg = cfg.validate()
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    t_start = time.perf_counter()

    n, R, theta = g.n, cfg.population_size, cfg.sweeps_per_step
    seed64 = np.uint64(cfg.seed & rng.MASK64)
    replica_ids = np.arange(R, dtype=np.int64)
    blocks = _blocks(R)
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    pop = init_population(g, cfg)
    W = g.total_weight

    best_idx = int(np.argmin(pop.energies))
    best_energy = int(pop.energies[best_idx])
    best_config = pop.spins[best_idx].copy()
    best_cut = (W - best_energy) // 2

    betas, esses, accepts_hist, best_cuts = [], [], [], []
    delta_betas, mean_energies, min_energies = [], [], []
    log_mean_weight_sum = 0.0
    total_sweeps = 0
    frozen_at: int | None = None
    stagnation = 0

    try:
        for step in range(1, cfg.max_steps + 1):
            pop.step_index = step
            delta_beta = 0.0
            ess = float(R)
            remaining = cfg.beta_end - pop.beta
            if frozen_at is None and remaining > 0.0:
                delta_beta = choose_delta_beta(pop, cfg.target_ess_ratio, cfg.beta_end)
                delta_beta = min(max(delta_beta, cfg.min_delta_beta), remaining)
                w = reweight(pop, delta_beta)
                ess = effective_sample_size(w)
                e_min = int(pop.energies.min())
                shifted = (pop.energies - e_min).astype(np.float64)
                log_mean_weight_sum += (
                    math.log(np.exp(-delta_beta * shifted).mean()) - delta_beta * e_min
                )
                u = rng.uniform_at(
                    rng.stream_key(cfg.seed, step, rng.POPULATION, rng.RESAMPLE), 0
                )
                pop = resample(pop, w, _FixedUniform(u))
                pop.step_index = step
                if delta_beta >= remaining:
                    pop.beta = cfg.beta_end
                else:
                    pop.beta = pop.beta + delta_beta

            table = threshold_table(g, pop.beta)
            step64 = np.uint64(step)
            accept_counts = np.zeros(R, dtype=np.int64)

            def sweep_job(blk: slice) -> None:
                kernels.sweep_block_keyed(
                    g.indptr, g.nbr_index, g.nbr_weight,
                    pop.spins[blk], pop.energies[blk], table,
                    seed64, step64, replica_ids[blk], theta, accept_counts[blk],
                )

            _run_blocks(executor, sweep_job, blocks)
            total_sweeps += R * theta
            acceptance = float(accept_counts.sum()) / (R * theta * n)

            kicked = False
            if cfg.kick_period > 0 and step % cfg.kick_period == 0:
                kicked = True
                kick_population(
                    g, pop, int(cfg.kick_fraction * n), cfg.seed, step, executor
                )

            step_min_idx = int(np.argmin(pop.energies))
            step_min_energy = int(pop.energies[step_min_idx])
            if step_min_energy < best_energy:
                best_energy = step_min_energy
                best_config = pop.spins[step_min_idx].copy()
                best_cut = (W - best_energy) // 2
                stagnation = 0
            else:
                stagnation += 1

            betas.append(pop.beta)
            esses.append(ess)
            accepts_hist.append(acceptance)
            best_cuts.append(best_cut)
            delta_betas.append(delta_beta)
            mean_energies.append(float(pop.energies.mean()))
            min_energies.append(step_min_energy)

            if diag is not None:
                diag.write(
                    json.dumps(
                        {
                            "step": step,
                            "beta": pop.beta,
                            "delta_beta": delta_beta,
                            "ess_ratio": ess / R,
                            "mean_energy": mean_energies[-1],
                            "min_energy": step_min_energy,
                            "best_cut": best_cut,
                            "acceptance": acceptance,
                            "kicked": kicked,
                        }
                    )
                    + "\n"
                )

            if check_invariants:
                recomputed = np.empty(R, dtype=np.int64)
                kernels.energies_block(g.edge_u, g.edge_v, g.edge_w, pop.spins, recomputed)
                assert np.array_equal(recomputed, pop.energies), (
                    f"energy cache incoherent at step {step}"
                )
                assert pop.size == R
                assert 1.0 - 1e-9 <= ess <= R * (1.0 + 1e-9)

            if frozen_at is None and acceptance < cfg.acceptance_floor:
                frozen_at = step
            beta_done = frozen_at is not None or pop.beta >= cfg.beta_end
            if beta_done and cfg.patience > 0 and stagnation >= cfg.patience:
                break
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    return RunResult(
        best_config=best_config,
        best_cut=int(best_cut),
        best_energy=int(best_energy),
        beta_trajectory=np.asarray(betas, dtype=np.float64),
        ess_trajectory=np.asarray(esses, dtype=np.float64),
        acceptance_trajectory=np.asarray(accepts_hist, dtype=np.float64),
        best_cut_trajectory=np.asarray(best_cuts, dtype=np.int64),
        delta_beta_trajectory=np.asarray(delta_betas, dtype=np.float64),
        mean_energy_trajectory=np.asarray(mean_energies, dtype=np.float64),
        min_energy_trajectory=np.asarray(min_energies, dtype=np.int64),
        wall_time=time.perf_counter() - t_start,
        total_sweeps=total_sweeps,
        steps=len(betas),
        log_mean_weight_sum=log_mean_weight_sum,
        frozen_at_step=frozen_at,
    )


class _FixedUniform:
    """Minimal Generator stand-in yielding one predetermined uniform."""

    def __init__(self, value: float):
        self._value = value

    def random(self) -> float:
        return self._value
