"""Soft-envelope-limiter relay amplifier and SNDR combining.

The input power sigma_p^2 is the normalisation unit throughout, so the
distortion power is reported as sigma_b^2 / sigma_p^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .specfun import erfc


@dataclass(frozen=True)
class SelHpaParams:
    ibo: float
    nu: float
    sigma_b2: float
    mu: float

    @property
    def ideal(self) -> bool:
        return self.sigma_b2 == 0.0

    @property
    def ibo_db(self) -> float:
        return 10.0 * math.log10(self.ibo) if math.isfinite(self.ibo) else math.inf


def sel_params(ibo: float) -> SelHpaParams:
    """Bussgang gain, distortion power and clipping factor of the SEL.

    ``ibo`` is the linear input back-off A_sat^2 / sigma_p^2; ``math.inf``
    gives the ideal amplifier.
    """
    if not ibo > 0.0:
        raise ModelError(f"IBO must be positive, got {ibo!r}")
    if math.isinf(ibo):
        return SelHpaParams(ibo=math.inf, nu=1.0, sigma_b2=0.0, mu=1.0)
    s = math.sqrt(ibo)
    q = math.exp(-ibo)
    mu = -math.expm1(-ibo)
    excess = 0.5 * math.sqrt(math.pi) * s * erfc(s)
    nu = mu + excess
    # mu - nu^2 rearranged to avoid cancelling two numbers close to one
    sigma_b2 = mu * (q - 2.0 * excess) - excess * excess
    if sigma_b2 < -1e-12:
        raise ModelError(f"negative distortion power {sigma_b2:g} at IBO={ibo:g}")
    return SelHpaParams(ibo=float(ibo), nu=nu, sigma_b2=max(sigma_b2, 0.0), mu=mu)


def sel_params_db(ibo_db: float) -> SelHpaParams:
    return sel_params(10.0 ** (ibo_db / 10.0))


def relay_gain_and_kappa(p: SelHpaParams, gbar1: float, mean_power_ratio: float) -> float:
    """Distortion factor kappa of the fixed-gain relay.

    ``mean_power_ratio`` is E[|h_m|^2], so E[gamma_1(m)] = mean_power_ratio * gbar1.
    The gain is formed explicitly (P_s = 1, sigma_1^2 = 1/gbar1).
    """
    if p.nu == 0.0:
        raise ZeroDivisionError("Bussgang gain nu is zero")
    sigma1_sq = 1.0 / gbar1
    gain_sq = 1.0 / (mean_power_ratio * 1.0 + sigma1_sq)
    return 1.0 + p.sigma_b2 / (p.nu**2 * gain_sq * sigma1_sq)


def kappa_closed_form(p: SelHpaParams, mean_gamma1: float) -> float:
    """kappa with the fixed gain substituted: 1 + sigma_b^2 (E[gamma_1] + 1) / nu^2."""
    return 1.0 + p.sigma_b2 * (mean_gamma1 + 1.0) / p.nu**2


def end_to_end_sndr(gamma1, gamma2, mean_gamma1: float, kappa: float):
    """gamma1 gamma2 / (kappa gamma2 + E[gamma1] + kappa); works on arrays."""
    g2 = np.asarray(gamma2, dtype=float)
    with np.errstate(invalid="ignore"):
        out = np.asarray(gamma1, dtype=float) * g2 / (kappa * g2 + mean_gamma1 + kappa)
    if np.ndim(out) == 0:
        inf_g2 = np.isinf(g2)
        return float(gamma1) / kappa if inf_g2 else float(out)
    return np.where(np.isinf(g2), np.asarray(gamma1, dtype=float) / kappa, out)


@dataclass(frozen=True)
class BussgangEstimate:
    nu_hat: float
    nu_se: float
    sigma_b2_hat: float
    sigma_b2_se: float
    power_hat: float
    power_se: float


def sel_clip(x: np.ndarray, a_sat: float) -> np.ndarray:
    """Clip the envelope at a_sat, keeping the phase."""
    mag = np.abs(x)
    scale = np.minimum(1.0, a_sat / np.maximum(mag, np.finfo(float).tiny))
    return x * scale


def _sel_chunks(n, rng, a_sat, chunk):
    done = 0
    while done < n:
        k = min(chunk, n - done)
        x = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / math.sqrt(2.0)
        yield x, sel_clip(x, a_sat)
        done += k


def bussgang_empirical_check(ibo: float, n: int, rng: np.random.Generator,
                             chunk: int = 1 << 20) -> BussgangEstimate:
    """Simulate the SEL on unit-power Gaussian input.

    Returns estimates (with standard errors) of the Bussgang gain
    nu = E[y x*] / E[|x|^2], the distortion power E[|y - nu x|^2] and the
    output power E[|y|^2].  The sample stream is read twice (the generator
    state is rewound), leaving ``rng`` advanced exactly once.
    """
    if n < 100_000:
        raise ModelError("need at least 1e5 samples")
    a_sat = math.sqrt(ibo) if math.isfinite(ibo) else math.inf
    start = rng.bit_generator.state

    px_sum = cross_sum = 0.0
    for x, y in _sel_chunks(n, rng, a_sat, chunk):
        px_sum += float(np.sum(x.real**2 + x.imag**2))
        cross_sum += float(np.sum((y * np.conj(x)).real))
    nu_hat = cross_sum / px_sum
    mean_px = px_sum / n

    rng.bit_generator.state = start
    acc = np.zeros(6)
    for x, y in _sel_chunks(n, rng, a_sat, chunk):
        px = x.real**2 + x.imag**2
        resid = (y * np.conj(x)).real - nu_hat * px
        dist = np.abs(y - nu_hat * x) ** 2
        py = y.real**2 + y.imag**2
        acc += [np.sum(resid**2), np.sum(dist), np.sum(dist**2), np.sum(py), np.sum(py**2), 0.0]
    nu_se = math.sqrt(acc[0] / n / n) / mean_px
    sb = acc[1] / n
    sb_se = math.sqrt(max(acc[2] / n - sb**2, 0.0) / n)
    pw = acc[3] / n
    pw_se = math.sqrt(max(acc[4] / n - pw**2, 0.0) / n)
    return BussgangEstimate(nu_hat=nu_hat, nu_se=nu_se, sigma_b2_hat=sb, sigma_b2_se=sb_se,
                            power_hat=pw, power_se=pw_se)
