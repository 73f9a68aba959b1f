"""Special-function kernel.

Gamma family, error functions, J0/I0 Bessel functions and a Meijer-G
evaluator for the G^{q,n}_{p,q} class (n in {0, 1}, p < q) with real
parameters and a positive real argument.

Everything here is written against the ``math``/``cmath`` modules only,
with numpy used for the vectorised contour integrand.  All functions are
pure.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    CoincidentPoleWarning,
    ConvergenceError,
    GammaPoleError,
    MeijerGDomainError,
)

__all__ = [
    "gamma",
    "log_gamma",
    "rgamma",
    "upper_incomplete_gamma",
    "upper_incomplete_gamma_scaled",
    "gamma_family",
    "erf",
    "erfc",
    "erf_family",
    "bessel_j0",
    "bessel_i0",
    "bessel",
    "MeijerGSpec",
    "meijer_g",
    "meijer_g_series",
    "meijer_g_contour",
    "leading_residues",
]

EPS = 2.0**-52
EULER_GAMMA = 0.57721566490153286061
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_PI = math.sqrt(math.pi)
_GAMMA_MAX_ARG = 171.6243769563027

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


# ---------------------------------------------------------------------------
# gamma family
# ---------------------------------------------------------------------------

def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _sinpi(x: float) -> float:
    """sin(pi*x) with exact argument reduction."""
    r = math.fmod(x, 2.0)
    if r < 0.0:
        r += 2.0
    if r > 1.0:
        return -_sinpi(r - 1.0)
    if r > 0.5:
        r = 1.0 - r
    return math.sin(math.pi * r)


def _lanczos_sum(z: float) -> float:
    a = _LANCZOS_P[0]
    for i in range(1, 9):
        a += _LANCZOS_P[i] / (z + i)
    return a


def _gamma_lanczos(x: float) -> float:
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    half = t ** ((z + 0.5) / 2.0)
    return math.sqrt(2.0 * math.pi) * half * math.exp(-t) * half * _lanczos_sum(z)


def gamma(x: float) -> float:
    """Gamma function for real ``x``.

    Raises :class:`GammaPoleError` at non-positive integers and
    ``OverflowError`` when the result exceeds the double range.
    """
    x = float(x)
    if math.isnan(x):
        return math.nan
    if _is_nonpositive_integer(x):
        raise GammaPoleError(f"gamma has a pole at x = {x:g}")
    if x == math.floor(x) and 1.0 <= x <= 171.0:
        return float(math.factorial(int(x) - 1))
    if x > _GAMMA_MAX_ARG:
        raise OverflowError(f"gamma({x:g}) overflows")
    if x < 0.5:
        if 1.0 - x > _GAMMA_MAX_ARG:
            lg, sign = _log_gamma_sign(x)
            return sign * math.exp(lg)
        return math.pi / (_sinpi(x) * _gamma_lanczos(1.0 - x))
    return _gamma_lanczos(x)


def _log_gamma_sign(x: float) -> tuple[float, float]:
    """(log|Gamma(x)|, sign Gamma(x))."""
    if _is_nonpositive_integer(x):
        raise GammaPoleError(f"gamma has a pole at x = {x:g}")
    if x < 0.5:
        s = _sinpi(x)
        lg, _ = _log_gamma_sign(1.0 - x)
        return math.log(math.pi) - math.log(abs(s)) - lg, math.copysign(1.0, s)
    if x < 15.0:
        return math.log(gamma(x)), 1.0
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z)), 1.0


def log_gamma(x: float) -> float:
    """log|Gamma(x)|; equals ln Gamma(x) wherever Gamma(x) > 0."""
    return _log_gamma_sign(float(x))[0]


def rgamma(x: float) -> float:
    """Reciprocal gamma, entire: zero at the poles of Gamma."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    try:
        return 1.0 / gamma(x)
    except OverflowError:
        return 0.0


def _gamma_series_lower(s: float, x: float) -> float:
    """Lower incomplete gamma by its power series (s > 0)."""
    ap = s
    term = total = 1.0 / s
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * EPS:
            return total * math.exp(-x + s * math.log(x))
    raise ConvergenceError(f"lower incomplete gamma series failed at s={s}, x={x}")


def _gamma_cf_scaled(s: float, x: float) -> float:
    """Gamma(s, x) * e^x * x^-s by modified Lentz continued fraction."""
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 100_000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise ConvergenceError(f"upper incomplete gamma fraction failed at s={s}, x={x}")


def _expint_e1(x: float) -> float:
    """E1(x) for 0 < x < 1 by its convergent series."""
    total = 0.0
    term = 1.0
    for k in range(1, 500):
        term *= -x / k
        inc = term / k
        total += inc
        if abs(inc) < EPS * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def upper_incomplete_gamma_scaled(s: float, x: float) -> float:
    """Gamma(s, x) * exp(x) * x**(-s) for real ``s`` and ``x > 0``.

    The scaling keeps negative-order values finite for tiny ``x``.
    """
    s = float(s)
    x = float(x)
    if not x > 0.0:
        raise ValueError("scaled upper incomplete gamma needs x > 0")
    if x >= 1.0 and x >= s + 1.0:
        return _gamma_cf_scaled(s, x)
    if s > 0.0:
        full = gamma(s) - _gamma_series_lower(s, x)
        return full * math.exp(x - s * math.log(x))
    if s == math.floor(s):
        n = int(-s)
        # Gamma(-n, x) = (-1)^n / n! [E1(x) - e^-x sum_{k<n} (-1)^k k! / x^(k+1)]
        e1 = _expint_e1(x)
        tail = math.fsum((-1) ** k * math.factorial(k) / x ** (k + 1) for k in range(n))
        value = (-1) ** n / math.factorial(n) * (e1 - math.exp(-x) * tail)
        return value * math.exp(x) * x**n
    # non-integer s < 0, x < 1: Gamma(s) - x^s sum_k (-x)^k / (k! (s+k))
    terms = []
    term = 1.0
    for k in range(0, 500):
        if k:
            term *= -x / k
        inc = term / (s + k)
        terms.append(inc)
        if k > 2 and abs(inc) < EPS * abs(terms[0]) * 1e-2:
            break
    series = math.fsum(terms)
    g = gamma(s)
    return math.exp(x) * (g * x ** (-s) - series)


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Upper incomplete gamma Gamma(s, x) for real ``s`` and ``x >= 0``."""
    s = float(s)
    x = float(x)
    if x < 0.0:
        raise ValueError("upper incomplete gamma needs x >= 0")
    if x == 0.0:
        if s > 0.0:
            return gamma(s)
        return math.inf
    if s > 0.0 and x < s + 1.0:
        return gamma(s) - _gamma_series_lower(s, x)
    scaled = upper_incomplete_gamma_scaled(s, x)
    return scaled * math.exp(-x + s * math.log(x))


def gamma_family(x: float, mode: str = "gamma", s: float | None = None) -> float:
    """Dispatch over ``gamma``, ``log_gamma`` and ``upper_incomplete``."""
    if mode == "gamma":
        return gamma(x)
    if mode == "log_gamma":
        return log_gamma(x)
    if mode == "upper_incomplete":
        if s is None:
            raise ValueError("upper_incomplete mode needs the order s")
        return upper_incomplete_gamma(s, x)
    raise ValueError(f"unknown gamma mode {mode!r}")


# ---------------------------------------------------------------------------
# error functions
# ---------------------------------------------------------------------------

_ERF_SPLIT = 1.25


def _exp_neg_square(x: float) -> float:
    # hi has at most 21 significant bits so hi*hi is exact
    hi = math.floor(x * 65536.0) / 65536.0
    lo = x - hi
    return math.exp(-hi * hi) * math.exp(-lo * (x + hi))


def _erf_series(x: float) -> float:
    # erf(x) = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!, all terms positive
    x2 = x * x
    term = x
    total = x
    n = 0
    while True:
        n += 1
        term *= 2.0 * x2 / (2 * n + 1)
        total += term
        if term <= EPS * total:
            break
    return 2.0 / _SQRT_PI * math.exp(-x2) * total


def _erfc_large(x: float) -> float:
    # erfc(x) = Gamma(1/2, x^2) / sqrt(pi)
    return _exp_neg_square(x) * x * _gamma_cf_scaled(0.5, x * x) / _SQRT_PI


def erf(x: float) -> float:
    x = float(x)
    if math.isnan(x):
        return math.nan
    ax = abs(x)
    if ax == 0.0:
        return x
    if ax < _ERF_SPLIT:
        r = _erf_series(ax)
    elif ax > 27.0:
        r = 1.0
    else:
        r = 1.0 - _erfc_large(ax)
    return math.copysign(r, x)


def erfc(x: float) -> float:
    x = float(x)
    if math.isnan(x):
        return math.nan
    ax = abs(x)
    if ax < _ERF_SPLIT:
        r = 1.0 - _erf_series(ax) if ax > 0.0 else 1.0
        return r if x >= 0.0 else 2.0 - r
    r = _erfc_large(ax) if ax < 27.3 else 0.0
    return r if x > 0.0 else 2.0 - r


def erf_family(x: float, mode: str = "erf") -> float:
    if mode == "erf":
        return erf(x)
    if mode == "erfc":
        return erfc(x)
    raise ValueError(f"unknown error-function mode {mode!r}")


# ---------------------------------------------------------------------------
# Bessel functions
# ---------------------------------------------------------------------------

def _j0_series(x: float) -> float:
    q = -0.25 * x * x
    term = 1.0
    terms = [1.0]
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        terms.append(term)
        if abs(term) < 1e-18:
            break
    return math.fsum(terms)


def _j0_trapezoid(x: float) -> float:
    # J0(x) = (1/pi) int_0^pi cos(x sin t) dt; trapezoid error ~ 2 |J_{2M}(x)|
    m = int(abs(x)) + 40
    vals = [math.cos(x * math.sin(math.pi * j / m)) for j in range(1, m)]
    return (math.fsum(vals) + 1.0) / m


def _hankel_pq(x: float) -> tuple[float, float]:
    # a_k(0) = prod_{i=1..k} (2i-1)^2 / (k! 8^k)
    p_terms, q_terms = [1.0], []
    a = 1.0
    prev = math.inf
    for k in range(1, 200):
        a *= (2 * k - 1) ** 2 / (k * 8.0 * x)
        if a > prev or a < 1e-18:
            break
        prev = a
        sign = (-1) ** ((k + 1) // 2)
        if k % 2:
            q_terms.append(sign * a)
        else:
            p_terms.append(sign * a)
    return math.fsum(p_terms), math.fsum(q_terms)


def bessel_j0(x: float) -> float:
    """Bessel function of the first kind, order zero."""
    ax = abs(float(x))
    if ax <= 8.0:
        return _j0_series(ax)
    if ax <= 25.0:
        return _j0_trapezoid(ax)
    p, q = _hankel_pq(ax)
    s, c = math.sin(ax), math.cos(ax)
    # cos(x - pi/4) = (c + s)/sqrt2, sin(x - pi/4) = (s - c)/sqrt2
    return math.sqrt(1.0 / (math.pi * ax)) * (p * (c + s) - q * (s - c))


_I0_GUARD = 700.0


def bessel_i0(x: float) -> float:
    """Modified Bessel function of the first kind, order zero."""
    ax = abs(float(x))
    if ax > _I0_GUARD:
        raise OverflowError(f"I0({x:g}) exceeds the overflow guard |x| <= {_I0_GUARD:g}")
    if ax <= 30.0:
        q = 0.25 * ax * ax
        term = total = 1.0
        k = 0
        while True:
            k += 1
            term *= q / (k * k)
            total += term
            if term < EPS * total:
                return total
    a = 1.0
    total = 1.0
    prev = math.inf
    for k in range(1, 200):
        a *= (2 * k - 1) ** 2 / (k * 8.0 * ax)
        if a > prev or a < EPS * total:
            break
        prev = a
        total += a
    return math.exp(ax) / math.sqrt(2.0 * math.pi * ax) * total


def bessel(x: float, kind: str = "J0") -> float:
    if kind == "J0":
        return bessel_j0(x)
    if kind == "I0":
        return bessel_i0(x)
    raise ValueError(f"unknown Bessel kind {kind!r}")


# ---------------------------------------------------------------------------
# Meijer-G
# ---------------------------------------------------------------------------

SERIES_TERM_CAP = 10_000
SERIES_REL_TOL = 1e-14
COINCIDENCE_TOL = 1e-6
# residue sums whose rounding estimate exceeds this fall back to quadrature
SERIES_CANCELLATION_TOL = 1e-11
CONTOUR_TRUNCATION = 1e-18


@dataclass(frozen=True)
class MeijerGSpec:
    """Orders and real parameters of G^{m,n}_{p,q}(z | a; b).

    ``a`` holds the p upper parameters (the first n enter as
    Gamma(1 - a - s)); ``b`` the q lower ones (the first m enter as
    Gamma(b + s)).
    """

    m: int
    n: int
    a: tuple[float, ...] = field(default=())
    b: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise MeijerGDomainError(
                f"orders must satisfy 0<=m<=q, 0<=n<=p; got m={self.m}, n={self.n}, "
                f"p={self.p}, q={self.q}"
            )
        if not all(math.isfinite(v) for v in self.a + self.b):
            raise MeijerGDomainError("Meijer-G parameters must be finite reals")

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def q(self) -> int:
        return len(self.b)

    def check_supported(self) -> None:
        if self.m != self.q or self.n not in (0, 1) or self.p >= self.q:
            raise MeijerGDomainError(
                "supported class is m = q, n in {0, 1}, p < q; "
                f"got G^{{{self.m},{self.n}}}_{{{self.p},{self.q}}}"
            )
        for al in self.a[: self.n]:
            for bj in self.b:
                d = 1.0 - al + bj
                if _is_nonpositive_integer(d):
                    raise MeijerGDomainError(
                        "upper and lower pole sequences overlap (1 - a_l + b_j is a "
                        "non-positive integer)"
                    )

    def reduced(self) -> "MeijerGSpec":
        """Cancel equal pairs a_l (l > n) and b_j (j <= m); the value is unchanged."""
        a_rest = list(self.a[self.n:])
        b_main = list(self.b[: self.m])
        keep_a = []
        for al in a_rest:
            hit = next(
                (j for j, bj in enumerate(b_main) if abs(al - bj) <= 1e-13 * max(1.0, abs(bj))),
                None,
            )
            if hit is None:
                keep_a.append(al)
            else:
                b_main.pop(hit)
        if len(keep_a) == len(a_rest):
            return self
        return MeijerGSpec(
            m=len(b_main),
            n=self.n,
            a=tuple(self.a[: self.n]) + tuple(keep_a),
            b=tuple(b_main) + tuple(self.b[self.m:]),
        )


def _near_integer(d: float, tol: float = COINCIDENCE_TOL) -> bool:
    return abs(d - round(d)) < tol


def _coincident_lower(b: Sequence[float]) -> bool:
    return any(
        _near_integer(b[i] - b[j]) for i in range(len(b)) for j in range(i + 1, len(b))
    )


def _ladder_start(spec: MeijerGSpec, r: int, log_z: float) -> float:
    """First residue of the pole ladder at s = -b_r (simple poles assumed)."""
    b, a, n = spec.b, spec.a, spec.n
    br = b[r]
    log_mag = br * log_z
    sign = 1.0
    for j, bj in enumerate(b):
        if j != r:
            lg, sg = _log_gamma_sign(bj - br)
            log_mag += lg
            sign *= sg
    for al in a[:n]:
        lg, sg = _log_gamma_sign(1.0 - al + br)
        log_mag += lg
        sign *= sg
    for al in a[n:]:
        d = al - br
        if _is_nonpositive_integer(d):
            return 0.0
        lg, sg = _log_gamma_sign(d)
        log_mag -= lg
        sign *= sg
    if log_mag > 709.0:
        raise OverflowError("Meijer-G residue overflows")
    return sign * math.exp(log_mag)


def leading_residues(spec: MeijerGSpec) -> list[tuple[float, float]]:
    """Leading residue of every lower-pole ladder as ``(b_r, coefficient)``.

    The small-z behaviour of the G function is sum_r coefficient * z**b_r.
    Ladders whose start collides with another lower parameter (difference
    within the coincidence tolerance of an integer) are skipped with a
    :class:`CoincidentPoleWarning`.
    """
    spec.check_supported()
    red = spec.reduced()
    out = []
    for r, br in enumerate(red.b):
        if any(_near_integer(bj - br) for j, bj in enumerate(red.b) if j != r):
            warnings.warn(
                f"lower parameter {br:g} coincides with another modulo 1; term skipped",
                CoincidentPoleWarning,
                stacklevel=2,
            )
            continue
        out.append((br, _ladder_start(red, r, 0.0)))
    return out


def meijer_g_series(spec: MeijerGSpec, z: float) -> tuple[float, float]:
    """Residue-series value and its rounding-error estimate.

    Raises :class:`ConvergenceError` when a ladder has not settled within
    ``SERIES_TERM_CAP`` terms.
    """
    spec.check_supported()
    red = spec.reduced()
    if _coincident_lower(red.b):
        raise MeijerGDomainError("lower parameters coincide modulo 1; use the contour")
    z = float(z)
    log_z = math.log(z)
    b, a, n = red.b, red.a, red.n
    terms: list[float] = []
    abs_total = 0.0
    for r, br in enumerate(b):
        term = _ladder_start(red, r, log_z)
        if term == 0.0:
            continue
        ladder = [term]
        ladder_sum = term
        small = 0
        peak = abs(term)
        for k in range(SERIES_TERM_CAP):
            ratio = -z / (k + 1)
            for j, bj in enumerate(b):
                if j != r:
                    ratio /= bj - br - k - 1
            for al in a[:n]:
                ratio *= 1.0 - al + br + k
            for al in a[n:]:
                ratio *= al - br - k - 1
            term *= ratio
            ladder.append(term)
            ladder_sum += term
            peak = max(peak, abs(term))
            if abs(term) <= SERIES_REL_TOL * abs(ladder_sum) or term == 0.0:
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
        else:
            raise ConvergenceError(
                f"Meijer-G residue ladder at b={br:g} not converged after "
                f"{SERIES_TERM_CAP} terms (z={z:g})"
            )
        terms.extend(ladder)
        abs_total += math.fsum(abs(t) for t in ladder)
    value = math.fsum(terms)
    err = 4.0 * EPS * abs_total
    return value, err


# -- contour quadrature ------------------------------------------------------

def _clgamma(z: np.ndarray) -> np.ndarray:
    """Complex log-gamma (any branch) by Lanczos with reflection."""
    z = np.asarray(z, dtype=complex)
    refl = z.real < 0.5
    zr = np.where(refl, 1.0 - z, z) - 1.0
    acc = np.full(zr.shape, _LANCZOS_P[0], dtype=complex)
    for i in range(1, 9):
        acc = acc + _LANCZOS_P[i] / (zr + i)
    t = zr + _LANCZOS_G + 0.5
    lg = _LOG_SQRT_2PI + (zr + 0.5) * np.log(t) - t + np.log(acc)
    if np.any(refl):
        lg = np.where(refl, math.log(math.pi) - _log_sin_pi(z) - lg, lg)
    return lg


def _log_sin_pi(z: np.ndarray) -> np.ndarray:
    w = np.pi * z
    out = np.empty_like(w)
    up = w.imag > 1.0
    dn = w.imag < -1.0
    mid = ~(up | dn)
    with np.errstate(all="ignore"):
        out[mid] = np.log(np.sin(w[mid]))
        out[up] = -1j * w[up] + np.log1p(-np.exp(2j * w[up])) - np.log(-2j)
        out[dn] = 1j * w[dn] + np.log1p(-np.exp(-2j * w[dn])) - np.log(2j)
    return out


def _gamma_arguments(spec: MeijerGSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Offsets, s-signs and output signs so that each gamma factor is Gamma(off + sgn*s)."""
    off, sgn, out = [], [], []
    for bj in spec.b[: spec.m]:
        off.append(bj), sgn.append(1.0), out.append(1.0)
    for bj in spec.b[spec.m:]:
        off.append(1.0 - bj), sgn.append(-1.0), out.append(-1.0)
    for al in spec.a[: spec.n]:
        off.append(1.0 - al), sgn.append(-1.0), out.append(1.0)
    for al in spec.a[spec.n:]:
        off.append(al), sgn.append(1.0), out.append(-1.0)
    return np.array(off), np.array(sgn), np.array(out)


def _log_integrand(spec: MeijerGSpec, s: np.ndarray, log_z: float) -> np.ndarray:
    off, sgn, out = _gamma_arguments(spec)
    s = np.asarray(s, dtype=complex)
    lg = _clgamma(off[:, None] + sgn[:, None] * s[None, :])
    return -s * log_z + np.sum(out[:, None] * lg, axis=0)


def _real_log_integrand(spec: MeijerGSpec, c: float, log_z: float) -> float:
    """log |integrand| at the real point s = c."""
    total = -c * log_z
    for bj in spec.b[: spec.m]:
        total += _log_gamma_sign(bj + c)[0]
    for bj in spec.b[spec.m:]:
        total -= _log_gamma_sign(1.0 - bj - c)[0]
    for al in spec.a[: spec.n]:
        total += _log_gamma_sign(1.0 - al - c)[0]
    for al in spec.a[spec.n:]:
        total -= _log_gamma_sign(al + c)[0]
    return total


def _contour_abscissa(spec: MeijerGSpec, log_z: float) -> float:
    """Saddle of |integrand| on the admissible real interval."""
    lo = -min(spec.b[: spec.m])
    hi = min((1.0 - al for al in spec.a[: spec.n]), default=math.inf)
    width = hi - lo
    left = lo + min(1e-3, 0.01 * width)
    if math.isfinite(hi):
        right = hi - min(1e-3, 0.01 * width)
    else:
        right = lo + 1.0
        f_prev = _real_log_integrand(spec, right, log_z)
        while right < lo + 1e5:
            nxt = lo + 2.0 * (right - lo)
            f_next = _real_log_integrand(spec, nxt, log_z)
            if f_next > f_prev:
                right = nxt
                break
            right, f_prev = nxt, f_next
    f = lambda c: _real_log_integrand(spec, c, log_z)  # noqa: E731
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = right - invphi * (right - left)
    x2 = left + invphi * (right - left)
    f1, f2 = f(x1), f(x2)
    for _ in range(80):
        if f1 < f2:
            right, x2, f2 = x2, x1, f1
            x1 = right - invphi * (right - left)
            f1 = f(x1)
        else:
            left, x1, f1 = x1, x2, f2
            x2 = left + invphi * (right - left)
            f2 = f(x2)
        if right - left < 1e-6 * max(1.0, abs(left)):
            break
    return 0.5 * (left + right)


def meijer_g_contour(spec: MeijerGSpec, z: float, rtol: float = 1e-13) -> float:
    """Mellin-Barnes integral along Re(s) = c by tanh-sinh quadrature."""
    spec.check_supported()
    red = spec.reduced()
    z = float(z)
    log_z = math.log(z)
    c = _contour_abscissa(red, log_z)
    peak = _real_log_integrand(red, c, log_z)
    cutoff = peak + math.log(CONTOUR_TRUNCATION)
    t_max = 1.0
    while float(_log_integrand(red, np.array([c + 1j * t_max]), log_z)[0].real) > cutoff:
        t_max *= 1.5
        if t_max > 1e4:
            raise ConvergenceError("Meijer-G contour integrand does not decay")

    def integrand(t: np.ndarray) -> np.ndarray:
        lg = _log_integrand(red, c + 1j * t, log_z) - peak
        return np.exp(lg).real

    prev = None
    for level in range(3, 14):
        h = 2.0**-level
        u = np.arange(-int(3.2 / h), int(3.2 / h) + 1) * h
        arg = 0.5 * np.pi * np.sinh(u)
        x = 0.5 * t_max * (1.0 + np.tanh(arg))
        w = 0.5 * t_max * h * 0.5 * np.pi * np.cosh(u) / np.cosh(arg) ** 2
        keep = (x > 0.0) & (x < t_max) & (w > 0.0)
        vals = integrand(x[keep])
        est = float(np.sum(w[keep] * vals))
        scale = float(np.sum(w[keep] * np.abs(vals)))
        if prev is not None and abs(est - prev) <= max(rtol * abs(est), 1e-16 * scale):
            if peak > 709.0:
                raise OverflowError(f"Meijer-G value at z={z:g} exceeds double range")
            return est * math.exp(peak) / math.pi
        prev = est
    raise ConvergenceError(f"Meijer-G contour quadrature did not converge at z={z:g}")


def meijer_g(spec: MeijerGSpec, z: float, method: str = "auto") -> float:
    """Evaluate G^{m,n}_{p,q}(z | a; b) for z > 0.

    ``method`` is ``"auto"`` (residue series, falling back to the contour
    integral on coincident poles, non-convergence or heavy cancellation),
    ``"series"`` or ``"contour"``.
    """
    z = float(z)
    if not z > 0.0 or not math.isfinite(z):
        raise MeijerGDomainError(f"Meijer-G argument must be a positive finite real, got {z!r}")
    spec.check_supported()
    if method == "contour":
        return meijer_g_contour(spec, z)
    if method == "series":
        return meijer_g_series(spec, z)[0]
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    red = spec.reduced()
    if _coincident_lower(red.b):
        warnings.warn(
            "near-coincident lower parameters; using contour quadrature",
            CoincidentPoleWarning,
            stacklevel=2,
        )
        return meijer_g_contour(red, z)
    try:
        value, err = meijer_g_series(red, z)
    except (ConvergenceError, OverflowError):
        return meijer_g_contour(red, z)
    if err > SERIES_CANCELLATION_TOL * abs(value):
        return meijer_g_contour(red, z)
    return value
