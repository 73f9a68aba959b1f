"""First (RF) hop: Rayleigh fading with outdated-CSI partial relay selection.

Rank convention: relays are sorted by their outdated SNR in increasing
order and ``m`` counts from the worst, so ``m == N`` picks the best relay.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ModelError
from .specfun import bessel_j0


@dataclass(frozen=True)
class RfHopConfig:
    N: int
    m: int
    rho: float
    gbar1: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ModelError(f"N must be a positive integer, got {self.N!r}")
        if int(self.m) != self.m or not 1 <= self.m <= self.N:
            raise ModelError(f"m must satisfy 1 <= m <= N, got m={self.m!r}, N={self.N!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise ModelError(f"rho must lie in [0, 1], got {self.rho!r}")
        if not self.gbar1 > 0.0:
            raise ModelError(f"gbar1 must be positive, got {self.gbar1!r}")

    def terms(self):
        """Yield (weight, mean) of the exponential mixture behind the CDF.

        F(x) = 1 - sum_n weight_n * exp(-x / mean_n).
        """
        N, m, rho = self.N, self.m, self.rho
        lead = m * comb(N, m)
        for n in range(m):
            k = N - m + n + 1
            d = (N - m + n) * (1.0 - rho) + 1.0
            weight = lead * (-1) ** n * comb(m - 1, n) / k
            yield weight, d * self.gbar1 / k


def jakes_rho(fd_td: float) -> float:
    """Correlation J0(2 pi f_d T_d) between outdated and current gains."""
    if fd_td < 0.0:
        raise ModelError("fd_td must be non-negative")
    rho = bessel_j0(2.0 * math.pi * fd_td)
    if rho < 0.0:
        raise ModelError(
            f"J0(2*pi*{fd_td:g}) = {rho:.6g} < 0 is not a valid correlation for the "
            "outdated-CSI model"
        )
    return min(rho, 1.0)


def prs_cdf(cfg: RfHopConfig, x: float) -> float:
    """CDF of the selected relay's current SNR."""
    if x <= 0.0:
        return 0.0
    return 1.0 - math.fsum(w * math.exp(-x / mu) for w, mu in cfg.terms())


def prs_mean(cfg: RfHopConfig) -> float:
    """E[gamma_1(m)], the mean current SNR of the selected relay."""
    return math.fsum(w * mu for w, mu in cfg.terms())


def sample_selected_pair(cfg: RfHopConfig, rng: np.random.Generator, size: int):
    """Draw ``size`` (outdated, current) SNR pairs of the selected relay.

    Each relay gets a circular complex Gaussian outdated gain of power
    ``gbar1``; the m-th weakest is selected and its current gain is
    sqrt(rho) * h_hat + sqrt(1 - rho) * w with an independent w of equal
    power.
    """
    N, m = cfg.N, cfg.m
    scale = math.sqrt(cfg.gbar1 / 2.0)
    h_hat = rng.standard_normal((size, N)) + 1j * rng.standard_normal((size, N))
    power = h_hat.real**2 + h_hat.imag**2
    if m == N:
        idx = np.argmax(power, axis=1)
    elif m == 1:
        idx = np.argmin(power, axis=1)
    else:
        idx = np.argpartition(power, m - 1, axis=1)[:, m - 1]
    rows = np.arange(size)
    sel = h_hat[rows, idx] * scale
    w = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * scale
    h = math.sqrt(cfg.rho) * sel + math.sqrt(1.0 - cfg.rho) * w
    return np.abs(sel) ** 2, np.abs(h) ** 2
