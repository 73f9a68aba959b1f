"""Monte Carlo estimation of outage, BEP and capacity.

Trials are grouped into fixed-size stream blocks.  Block ``j`` of stream
``s`` draws from a Philox generator keyed by ``(seed, s)`` with its counter
starting at ``j << 128`` (word 2 of the 256-bit counter), so every block is
reproducible on its own and the estimate depends only on the seed, the
stream and the trial count, never on scheduling or batch size.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from .analysis import (
    MODULATIONS,
    LinkModel,
    ModulationParams,
    bep_asym,
    bep_cf,
    ergodic_capacity,
    ergodic_capacity_asym,
    outage_asym,
    outage_cf,
)
from .errors import ModelError
from .fsohop import sample_irradiance, snr_from_irradiance
from .impairment import end_to_end_sndr
from .rfhop import sample_selected_pair

STREAM_BLOCK = 1 << 16
CI99_Z = 2.576
METRICS = ("outage", "bep", "capacity")
METHODS = ("analytic", "asymptotic", "mc")
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class McPlan:
    """What to estimate and with how many trials.

    ``batch`` is the number of trials handed to one worker at a time; it
    has no influence on the result.
    """

    trials: int
    seed: int = 0
    batch: int | None = None
    metric: str = "outage"
    gamma_th: float = 0.01
    modulation: ModulationParams = MODULATIONS["CBFSK"]

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 10_000:
            raise ModelError(f"trials must be an integer >= 1e4, got {self.trials!r}")
        if self.batch is not None and (self.batch <= 0 or self.trials % self.batch):
            raise ModelError(f"batch {self.batch!r} must be positive and divide trials {self.trials}")
        if self.metric not in METRICS:
            raise ModelError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if not self.gamma_th > 0.0:
            raise ModelError("gamma_th must be positive")
        if not 0 <= self.seed <= _MASK64:
            raise ModelError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    ci99_halfwidth: float
    trials_used: int


@dataclass(frozen=True)
class _Moments:
    """Count, mean and centred sum of squares, merged pairwise."""

    n: int
    mean: float
    m2: float

    def merge(self, other: "_Moments") -> "_Moments":
        if self.n == 0:
            return other
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return _Moments(n, mean, m2)

    @classmethod
    def of(cls, x: np.ndarray) -> "_Moments":
        mean = float(np.mean(x))
        return cls(x.size, mean, float(np.sum((x - mean) ** 2)))

    def estimate(self) -> McEstimate:
        var = self.m2 / (self.n - 1) if self.n > 1 else 0.0
        se = math.sqrt(max(var, 0.0) / self.n)
        return McEstimate(self.mean, se, CI99_Z * se, self.n)


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    counter = np.array([0, 0, block, 0], dtype=np.uint64)
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def sample_sndr(model: LinkModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """End-to-end SNDR of ``size`` independent trials of the full chain."""
    _, gamma1 = sample_selected_pair(model.rf, rng, size)
    gamma2 = snr_from_irradiance(model.fso, sample_irradiance(model.fso, rng, size))
    return end_to_end_sndr(gamma1, gamma2, model.mean_gamma1, model.kappa)


def trial_statistics(sndr: np.ndarray, gamma_th: float, mod: ModulationParams) -> dict:
    """Per-trial statistic of each metric."""
    return {
        "outage": (sndr < gamma_th).astype(float),
        "bep": 0.5 * special.gammaincc(mod.tau, mod.delta * sndr),
        "capacity": np.log2(1.0 + math.e * sndr / (2.0 * math.pi)),
    }


def worker_count() -> int:
    env = os.environ.get("RFSO_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ModelError(f"RFSO_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ModelError("RFSO_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _run_blocks(model: LinkModel, plan: McPlan, stream: int, blocks: range) -> list[dict]:
    out = []
    for j in blocks:
        size = min(STREAM_BLOCK, plan.trials - j * STREAM_BLOCK)
        rng = block_generator(plan.seed, stream, j)
        stats = trial_statistics(sample_sndr(model, rng, size), plan.gamma_th, plan.modulation)
        out.append({k: _Moments.of(v) for k, v in stats.items()})
    return out


def run_point_all(model: LinkModel, plan: McPlan, stream: int = 0,
                  threads: int | None = None) -> dict[str, McEstimate]:
    """Estimates of every metric from one shared set of trials."""
    n_blocks = -(-plan.trials // STREAM_BLOCK)
    per_task = max(1, -(-(plan.batch or plan.trials) // STREAM_BLOCK))
    tasks = [range(i, min(i + per_task, n_blocks)) for i in range(0, n_blocks, per_task)]
    threads = min(threads or worker_count(), len(tasks))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda r: _run_blocks(model, plan, stream, r), tasks))
    else:
        chunks = [_run_blocks(model, plan, stream, r) for r in tasks]
    totals = {k: _Moments(0, 0.0, 0.0) for k in METRICS}
    for chunk in chunks:
        for block in chunk:
            for k in METRICS:
                totals[k] = totals[k].merge(block[k])
    return {k: v.estimate() for k, v in totals.items()}


def run_point(model: LinkModel, plan: McPlan, stream: int = 0,
              threads: int | None = None) -> McEstimate:
    return run_point_all(model, plan, stream, threads)[plan.metric]


@dataclass(frozen=True)
class ModelTemplate:
    """How a single "average SNR" axis maps onto the two hops.

    ``coupling`` is ``"equal"`` (gbar1 = gbar2 = axis) or ``"transmit"``
    (the axis is the transmit SNR, gbar2 = axis * (mu h A0 Il)^2).
    ``gbar1_db`` / ``gbar2_db`` pin a hop to a fixed value instead.
    """

    base: LinkModel
    coupling: str = "equal"
    gbar1_db: float | None = None
    gbar2_db: float | None = None

    def __post_init__(self):
        if self.coupling not in ("equal", "transmit"):
            raise ModelError(f"unknown SNR coupling {self.coupling!r}")

    def at(self, snr_db: float) -> LinkModel:
        axis = 10.0 ** (snr_db / 10.0)
        g1 = 10.0 ** (self.gbar1_db / 10.0) if self.gbar1_db is not None else axis
        if self.gbar2_db is not None:
            g2 = 10.0 ** (self.gbar2_db / 10.0)
        elif self.coupling == "equal":
            g2 = axis
        else:
            f = self.base.fso
            g2 = axis * (self.base.hpa.mu * f.h * f.A0 * f.Il) ** 2
        return self.base.with_snr(g1, g2)


@dataclass(frozen=True)
class SweepResult:
    snr_db: float
    metric: str
    analytic: float = math.nan
    asymptotic: float = math.nan
    mc_value: float = math.nan
    mc_ci99: float = math.nan
    mc_stderr: float = math.nan
    mc_trials: int = 0


def analytic_value(model: LinkModel, plan: McPlan) -> float:
    if plan.metric == "outage":
        return outage_cf(model, plan.gamma_th)
    if plan.metric == "bep":
        return bep_cf(model, plan.modulation)
    return ergodic_capacity(model)


def asymptotic_value(model: LinkModel, plan: McPlan) -> float:
    if plan.metric == "outage":
        return outage_asym(model, plan.gamma_th)
    if plan.metric == "bep":
        return bep_asym(model, plan.modulation)
    return ergodic_capacity_asym(model)


def sweep(template: ModelTemplate, snr_grid_db, plan: McPlan,
          methods=METHODS, threads: int | None = None) -> list[SweepResult]:
    """Evaluate the requested methods at every grid point.

    Grid point ``i`` uses MC stream ``i``, so adding points to the end of
    a grid leaves earlier results unchanged.
    """
    grid = [float(x) for x in snr_grid_db]
    if not grid:
        raise ModelError("SNR grid is empty")
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ModelError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
    out = []
    for i, snr_db in enumerate(grid):
        model = template.at(snr_db)
        row = SweepResult(snr_db=snr_db, metric=plan.metric)
        if "analytic" in methods:
            row = replace(row, analytic=analytic_value(model, plan))
        if "asymptotic" in methods:
            row = replace(row, asymptotic=asymptotic_value(model, plan))
        if "mc" in methods:
            est = run_point(model, plan, stream=i, threads=threads)
            row = replace(row, mc_value=est.value, mc_ci99=est.ci99_halfwidth,
                          mc_stderr=est.stderr, mc_trials=est.trials_used)
        out.append(row)
    return out
