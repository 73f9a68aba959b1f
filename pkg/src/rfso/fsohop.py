"""Second (optical) hop: link geometry, Gamma-Gamma turbulence, pointing error.

All lengths are SI (metres); attenuation is given in dB/km and converted
to nepers per metre before the Beers-Lambert law is applied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ModelError
from .specfun import MeijerGSpec, erf, gamma, meijer_g

# Clear air is the only weather condition with a published attenuation here.
WEATHER_DB_PER_KM = {"clear": 0.43}


@dataclass(frozen=True)
class FsoGeometryInput:
    L: float = 1000.0
    wavelength: float = 1550e-9
    a: float = 0.05
    w0: float = 0.005
    F0: float = -10.0
    Cn2: float = 5e-14
    sigma_s: float = 0.0375
    sigma_db_per_km: float = 0.43
    eta: float = 1.0
    sigma2_sq: float = 1.0
    Pt: float = 1.0

    def __post_init__(self):
        for name in ("L", "wavelength", "a", "w0", "Cn2", "eta", "sigma2_sq", "Pt"):
            if not getattr(self, name) > 0.0:
                raise ModelError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.F0 == 0.0 or not math.isfinite(self.F0):
            raise ModelError("F0 must be finite and non-zero")
        if self.sigma_s < 0.0:
            raise ModelError("sigma_s must be non-negative")
        if self.sigma_db_per_km < 0.0:
            raise ModelError("sigma_db_per_km must be non-negative")


@dataclass(frozen=True)
class FsoDerived:
    sigma_R2: float
    alpha: float
    beta: float
    wL: float
    wLeq: float
    v: float
    A0: float
    xi: float
    h: float
    Il: float
    gbar2: float
    sigma_s: float

    def with_xi(self, xi: float) -> "FsoDerived":
        """Impose the pointing-error coefficient, adjusting the jitter to match.

        gbar2 keeps its dependence on h**2 from the average-SNR relation.
        """
        if not xi > 0.0:
            raise ModelError("xi must be positive")
        h = xi**2 / (xi**2 + 1.0)
        gbar2 = self.gbar2 * (h / self.h) ** 2 if self.h > 0.0 else self.gbar2
        return replace(self, xi=float(xi), h=h, gbar2=gbar2, sigma_s=self.wLeq / (2.0 * xi))

    def with_gbar2(self, gbar2: float) -> "FsoDerived":
        if not gbar2 > 0.0:
            raise ModelError("gbar2 must be positive")
        return replace(self, gbar2=float(gbar2))


def rytov_variance(Cn2: float, wavelength: float, L: float) -> float:
    k = 2.0 * math.pi / wavelength
    return 1.23 * Cn2 * k ** (7.0 / 6.0) * L ** (11.0 / 6.0)


def turbulence_shape(sigma_R2: float) -> tuple[float, float]:
    """Gamma-Gamma (alpha, beta) for a plane wave at Rytov variance sigma_R2."""
    if not sigma_R2 > 0.0:
        raise ModelError("Rytov variance must be positive")
    s125 = sigma_R2 ** 1.2
    alpha = 1.0 / math.expm1(0.49 * sigma_R2 / (1.0 + 1.11 * s125) ** (7.0 / 6.0))
    beta = 1.0 / math.expm1(0.51 * sigma_R2 / (1.0 + 0.69 * s125) ** (5.0 / 6.0))
    if not (alpha > 0.0 and beta > 0.0):
        raise ModelError(f"non-positive turbulence parameters alpha={alpha}, beta={beta}")
    return alpha, beta


def path_loss(sigma_db_per_km: float, L: float) -> float:
    nepers_per_m = sigma_db_per_km * math.log(10.0) / 10.0 / 1000.0
    return math.exp(-nepers_per_m * L)


def derive_geometry(g: FsoGeometryInput) -> FsoDerived:
    k = 2.0 * math.pi / g.wavelength
    sigma_R2 = rytov_variance(g.Cn2, g.wavelength, g.L)
    alpha, beta = turbulence_shape(sigma_R2)

    theta0 = 1.0 - g.L / g.F0
    lambda0 = 2.0 * g.L / (k * g.w0**2)
    denom = theta0**2 + lambda0**2
    if denom == 0.0:
        raise ModelError("beam parameters give Theta0^2 + Lambda0^2 = 0")
    lambda1 = lambda0 / denom
    # standard diffraction-plus-turbulence beam spreading
    wL = g.w0 * math.sqrt(denom * (1.0 + 1.63 * sigma_R2 ** 1.2 * lambda1))

    v = math.sqrt(math.pi) * g.a / (math.sqrt(2.0) * wL)
    ev = erf(v)
    wLeq = math.sqrt(wL**2 * math.sqrt(math.pi) * ev / (2.0 * v * math.exp(-v * v)))
    A0 = ev * ev
    xi = wLeq / (2.0 * g.sigma_s) if g.sigma_s > 0.0 else math.inf
    h = xi**2 / (xi**2 + 1.0) if math.isfinite(xi) else 1.0
    Il = path_loss(g.sigma_db_per_km, g.L)
    gbar2 = (g.Pt * g.eta) ** 2 / g.sigma2_sq * (h * A0 * Il) ** 2
    return FsoDerived(
        sigma_R2=sigma_R2, alpha=alpha, beta=beta, wL=wL, wLeq=wLeq, v=v, A0=A0,
        xi=xi, h=h, Il=Il, gbar2=gbar2, sigma_s=g.sigma_s,
    )


def fso_from_shape(alpha: float, beta: float, xi: float, gbar2: float,
                   A0: float = 1.0, Il: float = 1.0, wLeq: float = 1.0) -> FsoDerived:
    """Optical hop given directly by its statistical parameters."""
    if not (alpha > 0.0 and beta > 0.0 and xi > 0.0 and gbar2 > 0.0):
        raise ModelError("alpha, beta, xi and gbar2 must be positive")
    h = xi**2 / (xi**2 + 1.0)
    return FsoDerived(
        sigma_R2=math.nan, alpha=alpha, beta=beta, wL=math.nan, wLeq=wLeq, v=math.nan,
        A0=A0, xi=xi, h=h, Il=Il, gbar2=gbar2, sigma_s=wLeq / (2.0 * xi),
    )


def sample_irradiance(d: FsoDerived, rng: np.random.Generator, size: int) -> np.ndarray:
    """Composite irradiance I_a * I_l * I_p."""
    ia = rng.gamma(d.alpha, 1.0 / d.alpha, size) * rng.gamma(d.beta, 1.0 / d.beta, size)
    r = rng.rayleigh(d.sigma_s, size) if d.sigma_s > 0.0 else np.zeros(size)
    ip = d.A0 * np.exp(-2.0 * r**2 / d.wLeq**2)
    return ia * d.Il * ip


def snr_from_irradiance(d: FsoDerived, irradiance: np.ndarray) -> np.ndarray:
    """Electrical SNR (eta Pt I)^2 / sigma2^2, written through gbar2."""
    return d.gbar2 * (irradiance / (d.h * d.A0 * d.Il)) ** 2


def optical_snr_spec(d: FsoDerived) -> MeijerGSpec:
    xi2 = d.xi**2
    return MeijerGSpec(m=3, n=0, a=(xi2 + 1.0,), b=(xi2, d.alpha, d.beta))


def optical_snr_pdf(d: FsoDerived, x: float) -> float:
    """PDF of the instantaneous optical SNR."""
    if not x > 0.0:
        raise ModelError("optical SNR PDF needs x > 0")
    xi2 = d.xi**2
    z = d.alpha * d.beta * d.h * math.sqrt(x / d.gbar2)
    g = meijer_g(optical_snr_spec(d), z)
    return xi2 / (2.0 * gamma(d.alpha) * gamma(d.beta) * x) * g
