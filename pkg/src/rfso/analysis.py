"""Closed-form and asymptotic performance metrics of the relayed link.

All three metrics share one building block: the end-to-end CCDF

    P(gamma > x) = C * sum_n c_n exp(-varrho_n kappa x) G^{7,0}_{2,7}(varrho_n zeta s x)

with s = (alpha beta h)^2 / (16 gbar2).  Outage is its complement, the
BEP integrates it against the modulation kernel (adding one upper
parameter 1 - tau) and the ergodic capacity integrates it numerically.
Asymptotic forms replace each Meijer-G by the leading residue of every
pole ladder.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import cached_property
from math import comb

from scipy import integrate

from .errors import ConsistencyError, ConvergenceError, IdealHardwareWarning, ModelError
from .fsohop import FsoDerived
from .impairment import SelHpaParams, kappa_closed_form
from .rfhop import RfHopConfig, prs_mean
from .specfun import MeijerGSpec, gamma, leading_residues, log_gamma, meijer_g
from .specfun import upper_incomplete_gamma_scaled

# probabilities this far outside their range are noise; beyond it, a bug
RANGE_SLACK = 1e-9
_LN2 = math.log(2.0)
_E_OVER_2PI = math.e / (2.0 * math.pi)
# Gamma(tau) leaves double range just above this
MAX_TAU = 170.0


@dataclass(frozen=True)
class ModulationParams:
    """Binary modulation in the family P_e(g) = Gamma(tau, delta g) / (2 Gamma(tau))."""

    tau: float
    delta: float
    name: str = ""

    def __post_init__(self):
        if not (self.tau > 0.0 and self.delta > 0.0):
            raise ModelError(f"modulation needs tau > 0 and delta > 0, got {self.tau}, {self.delta}")
        if self.tau > MAX_TAU:
            raise ModelError(f"tau = {self.tau:g} exceeds {MAX_TAU:g}; Gamma(tau) overflows")


MODULATIONS = {
    "CBFSK": ModulationParams(0.5, 0.5, "CBFSK"),
    "CBPSK": ModulationParams(0.5, 1.0, "CBPSK"),
    "NBFSK": ModulationParams(1.0, 0.5, "NBFSK"),
    "DBPSK": ModulationParams(1.0, 1.0, "DBPSK"),
}


@dataclass(frozen=True)
class SumTerm:
    """One n-term of the relay-selection sum."""

    sign_weight: float  # (-1)^n C(m-1, n) / k
    k: int
    d: float
    varrho: float


@dataclass(frozen=True)
class LinkModel:
    """RF hop, optical hop and relay amplifier, with derived constants.

    ``printed_kappa2`` selects the alternative lower-parameter block
    Delta(2: xi^2 + 1) in place of Delta(2: xi^2); it exists only to
    audit that alternative and is not a physical model.
    """

    rf: RfHopConfig
    fso: FsoDerived
    hpa: SelHpaParams
    printed_kappa2: bool = False

    def __post_init__(self):
        if not math.isfinite(self.fso.xi):
            raise ModelError("closed forms need a finite pointing-error coefficient xi")

    @cached_property
    def mean_gamma1(self) -> float:
        return prs_mean(self.rf)

    @cached_property
    def kappa(self) -> float:
        return kappa_closed_form(self.hpa, self.mean_gamma1)

    @property
    def zeta(self) -> float:
        return self.mean_gamma1 + self.kappa

    @cached_property
    def terms(self) -> tuple[SumTerm, ...]:
        N, m, rho = self.rf.N, self.rf.m, self.rf.rho
        out = []
        for n in range(m):
            k = N - m + n + 1
            d = (N - m + n) * (1.0 - rho) + 1.0
            out.append(SumTerm((-1) ** n * comb(m - 1, n) / k, k, d, k / (d * self.rf.gbar1)))
        return tuple(out)

    @cached_property
    def prefactor(self) -> float:
        """2^(alpha+beta-3) xi^2 m C(N, m) / (pi Gamma(alpha) Gamma(beta))."""
        a, b, xi = self.fso.alpha, self.fso.beta, self.fso.xi
        log_pref = ((a + b - 3.0) * _LN2 + 2.0 * math.log(xi) - math.log(math.pi)
                    - log_gamma(a) - log_gamma(b))
        return math.exp(log_pref) * self.rf.m * comb(self.rf.N, self.rf.m)

    @property
    def scale(self) -> float:
        """(alpha beta h)^2 / (16 gbar2), the optical factor of every G argument."""
        f = self.fso
        return (f.alpha * f.beta * f.h) ** 2 / (16.0 * f.gbar2)

    def omega(self, term: SumTerm) -> float:
        """G argument per unit threshold: outage at g_th uses omega * g_th."""
        return self.scale * term.varrho * self.zeta

    @cached_property
    def kappa1(self) -> tuple[float, float]:
        x2 = self.fso.xi**2
        return ((x2 + 1.0) / 2.0, (x2 + 2.0) / 2.0)

    @cached_property
    def kappa2(self) -> tuple[float, ...]:
        x2, a, b = self.fso.xi**2, self.fso.alpha, self.fso.beta
        first = x2 + 1.0 if self.printed_kappa2 else x2
        return (first / 2.0, (first + 1.0) / 2.0, a / 2.0, (a + 1.0) / 2.0,
                b / 2.0, (b + 1.0) / 2.0, 0.0)

    @cached_property
    def cdf_spec(self) -> MeijerGSpec:
        return MeijerGSpec(m=7, n=0, a=self.kappa1, b=self.kappa2)

    def bep_spec(self, mod: ModulationParams) -> MeijerGSpec:
        return MeijerGSpec(m=7, n=1, a=(1.0 - mod.tau,) + self.kappa1, b=self.kappa2)

    def with_snr(self, gbar1: float, gbar2: float) -> "LinkModel":
        return replace(self, rf=replace(self.rf, gbar1=float(gbar1)),
                       fso=self.fso.with_gbar2(gbar2))

    def with_hpa(self, hpa: SelHpaParams) -> "LinkModel":
        return replace(self, hpa=hpa)


def _check_probability(value: float, upper: float, what: str) -> float:
    if value < -RANGE_SLACK or value > upper + RANGE_SLACK or math.isnan(value):
        raise ConsistencyError(f"{what} = {value:.6g} outside [0, {upper:g}]")
    return min(max(value, 0.0), upper)


def ccdf(model: LinkModel, x: float) -> float:
    """P(SNDR > x), evaluated directly so small tails keep their precision."""
    if x <= 0.0:
        return 1.0
    spec = model.cdf_spec
    parts = []
    for t in model.terms:
        decay = math.exp(-t.varrho * model.kappa * x)
        if decay == 0.0:
            continue
        parts.append(t.sign_weight * decay * meijer_g(spec, model.omega(t) * x))
    return model.prefactor * math.fsum(parts)


def outage_cf(model: LinkModel, gamma_th: float) -> float:
    """Probability that the end-to-end SNDR falls below ``gamma_th``."""
    if not gamma_th > 0.0:
        raise ModelError("outage threshold must be positive")
    return _check_probability(1.0 - ccdf(model, gamma_th), 1.0, "outage probability")


def _asym_g(spec: MeijerGSpec, z: float, extra=None) -> float:
    """Leading-residue expansion sum_r c_r z^b_r (times extra(b_r) if given)."""
    total = []
    for br, coeff in leading_residues(spec):
        w = coeff * z**br
        if extra is not None:
            w *= extra(br)
        total.append(w)
    return math.fsum(total)


def outage_asym(model: LinkModel, gamma_th: float) -> float:
    """High-SNR outage: each Meijer-G replaced by its leading residues."""
    if not gamma_th > 0.0:
        raise ModelError("outage threshold must be positive")
    spec = model.cdf_spec
    parts = []
    for t in model.terms:
        decay = math.exp(-t.varrho * model.kappa * gamma_th)
        parts.append(t.sign_weight * decay * _asym_g(spec, model.omega(t) * gamma_th))
    return 1.0 - model.prefactor * math.fsum(parts)


def _bep_terms(model: LinkModel, mod: ModulationParams):
    for t in model.terms:
        rk = t.varrho * model.kappa
        shrink = (mod.delta / (rk + mod.delta)) ** mod.tau
        w = model.scale * t.varrho * model.zeta / (rk + mod.delta)
        yield t, shrink, w


def bep_cf(model: LinkModel, mod: ModulationParams) -> float:
    """Average bit error probability for the modulation family ``mod``."""
    spec = model.bep_spec(mod)
    parts = [t.sign_weight * shrink * meijer_g(spec, w) for t, shrink, w in _bep_terms(model, mod)]
    value = 0.5 - model.prefactor / (2.0 * gamma(mod.tau)) * math.fsum(parts)
    return _check_probability(value, 0.5, "bit error probability")


def bep_asym(model: LinkModel, mod: ModulationParams) -> float:
    """High-SNR BEP; each residue picks up a Gamma(tau + b_r) factor."""
    spec = model.cdf_spec
    lg_tau = log_gamma(mod.tau)
    ratio = lambda b: math.exp(log_gamma(mod.tau + b) - lg_tau)  # noqa: E731
    parts = []
    for t, shrink, w in _bep_terms(model, mod):
        parts.append(t.sign_weight * shrink * _asym_g(spec, w, ratio))
    return 0.5 - model.prefactor / 2.0 * math.fsum(parts)


def _capacity_knee(model: LinkModel) -> float:
    """SNDR scale where the CCDF turns over, mapped to the quadrature variable."""
    knee = model.mean_gamma1 / (model.kappa + model.zeta / model.fso.gbar2)
    return 1.0 / (1.0 + _E_OVER_2PI * knee)


def ergodic_capacity(model: LinkModel, epsrel: float = 1e-6, epsabs: float = 1e-12) -> float:
    """E[log2(1 + e gamma / 2 pi)] via the CCDF integral.

    With w = 1 / (1 + e gamma / 2 pi) the integral becomes
    (1 / ln 2) * int_0^1 CCDF(gamma(w)) / w dw.
    """
    def integrand(w: float) -> float:
        if w <= 0.0:
            return 0.0
        if w >= 1.0:
            return 1.0
        return ccdf(model, (1.0 - w) / (w * _E_OVER_2PI)) / w

    w_knee = _capacity_knee(model)
    pts = sorted({p for p in (w_knee / 10.0, w_knee, min(10.0 * w_knee, 0.5)) if 0.0 < p < 1.0})
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(integrand, 0.0, 1.0, points=pts, epsrel=epsrel,
                                      epsabs=epsabs, limit=200)
        except integrate.IntegrationWarning as exc:
            raise ConvergenceError(f"capacity quadrature did not converge: {exc}") from exc
    return value / _LN2


def ergodic_capacity_asym(model: LinkModel) -> float:
    """High-SNR capacity from the residue-expanded CCDF.

    Each residue term integrates in closed form:
    int_0^inf e^{-rk g} g^b / (1 + e g / 2 pi) dg ~ Gamma(1 + b) Gamma(-b, p) e^p (2 pi / e)^(b+1),
    with p = 2 pi rk / e.
    """
    spec = model.cdf_spec
    parts = []
    for t in model.terms:
        rk = t.varrho * model.kappa
        p = rk / _E_OVER_2PI
        ratio = model.omega(t) / rk
        inner = []
        for br, coeff in leading_residues(spec):
            inner.append(coeff * gamma(1.0 + br) * upper_incomplete_gamma_scaled(-br, p)
                         * ratio**br)
        parts.append(t.sign_weight * math.fsum(inner))
    return model.prefactor * math.fsum(parts) / _LN2


def capacity_ceiling(hpa: SelHpaParams) -> float:
    """Capacity limit imposed by amplifier distortion alone.

    Returns ``math.inf`` (with an :class:`IdealHardwareWarning`) when the
    distortion power is negligible.
    """
    if hpa.sigma_b2 < 1e-15:
        warnings.warn("distortion-free amplifier: no capacity ceiling", IdealHardwareWarning,
                      stacklevel=2)
        return math.inf
    return math.log2(1.0 + math.e * hpa.nu**2 / (2.0 * math.pi * hpa.sigma_b2))
