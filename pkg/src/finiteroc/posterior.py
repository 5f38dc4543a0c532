"""Beta posteriors of bin probabilities and of per-bin likelihood ratios.

Under a uniform prior, the probability of a single bin observed ``k`` times
in ``n`` draws has posterior ``Beta(k + 1, n - k + 1)``. The likelihood ratio
of a bin is the quotient of two independent such posteriors (class H1 over
class H0); its density and CDF are evaluated by adaptive quadrature over the
denominator variable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, optimize, special

from .core import HistogramPair, SeedLike, as_generator
from .errors import ApproximationInvalidError, QuadratureError

__all__ = [
    "BetaPosterior",
    "RatioPosterior",
    "bin_posterior",
    "beta_quantile",
    "chebychev_tail",
    "chebychev_tail_universal",
    "percentile_width_w90",
    "ratio_density",
    "ratio_cdf",
    "ratio_median",
    "ratio_normal_approx",
    "normal_approx_valid",
    "sample_joint_posterior",
]

QUANTILE_ATOL = 1e-10
# Mass ignored on each side of every beta when bracketing quadrature limits.
BRACKET_TAIL = 1e-9


def beta_quantile(a, b, q, atol: float = QUANTILE_ATOL, bounds: bool = False):
    """Quantile of ``Beta(a, b)`` by bisection on the regularized incomplete beta.

    Vectorised over broadcastable ``a``, ``b`` and ``q``. With ``bounds=True``
    the final bracket ``(lo, hi)`` is returned instead of its midpoint; ``lo``
    never exceeds the true quantile and ``hi`` is never below it.
    """
    a, b, q = np.broadcast_arrays(
        np.asarray(a, float), np.asarray(b, float), np.asarray(q, float)
    )
    lo = np.zeros(a.shape)
    hi = np.ones(a.shape)
    # Each halving shrinks the bracket by 2; 1 / 2**n_iter <= atol.
    n_iter = max(1, math.ceil(math.log2(1.0 / atol)))
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        below = special.betainc(a, b, mid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    if bounds:
        return lo, hi
    mid = 0.5 * (lo + hi)
    return mid if mid.ndim else float(mid)


@dataclass(frozen=True)
class BetaPosterior:
    """Posterior ``Beta(k + 1, n - k + 1)`` of one bin probability."""

    k: int
    n: int

    def __post_init__(self):
        if self.k < 0 or self.n < 0 or self.k > self.n:
            raise ValueError(f"need 0 <= k <= n, got k={self.k}, n={self.n}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "n", int(self.n))

    @property
    def a(self) -> int:
        return self.k + 1

    @property
    def b(self) -> int:
        return self.n - self.k + 1

    @property
    def mean(self) -> float:
        return (self.k + 1) / (self.n + 2)

    @property
    def mode(self) -> float:
        """``k / n``; undefined (nan) for the flat prior ``n = 0``."""
        return self.k / self.n if self.n else math.nan

    @property
    def variance(self) -> float:
        k, n = self.k, self.n
        return (k + 1) * (n - k + 1) / ((n + 2) ** 2 * (n + 3))

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def logpdf(self, x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (
                special.xlogy(self.a - 1, x)
                + special.xlog1py(self.b - 1, -x)
                - special.betaln(self.a, self.b)
            )
        return np.where((x < 0) | (x > 1), -np.inf, out)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        return special.betainc(self.a, self.b, np.clip(x, 0.0, 1.0))

    def quantile(self, q, atol: float = QUANTILE_ATOL):
        return beta_quantile(self.a, self.b, q, atol)

    @cached_property
    def support_bracket(self) -> tuple[float, float]:
        """Interval outside which at most ``BRACKET_TAIL`` mass lies per side."""
        lo, _ = beta_quantile(self.a, self.b, BRACKET_TAIL, atol=1e-13, bounds=True)
        _, hi = beta_quantile(self.a, self.b, 1.0 - BRACKET_TAIL, atol=1e-13, bounds=True)
        return float(lo), float(hi)


def bin_posterior(k: int, n: int) -> BetaPosterior:
    return BetaPosterior(k, n)


def chebychev_tail(k: int, n: int, nu: float) -> float:
    """Tail bound ``min(1, t(1 - t) / (n nu^2))`` with ``t = k / n``.

    The plug-in bound collapses to 0 when ``k = 0`` or ``k = n``; use
    :func:`chebychev_tail_universal` for a bound that holds for every ``k``.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    t = k / n
    return min(1.0, t * (1.0 - t) / (n * nu * nu))


def chebychev_tail_universal(n: int, nu: float) -> float:
    """Worst-case form ``min(1, 1 / (4 n nu^2))``."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    return min(1.0, 1.0 / (4.0 * n * nu * nu))


def percentile_width_w90(p: BetaPosterior) -> float:
    """Width of the central 90% interval, ``q(0.95) - q(0.05)``."""
    lo = beta_quantile(p.a, p.b, 0.05)
    hi = beta_quantile(p.a, p.b, 0.95)
    return hi - lo


def w90_widths(k, n) -> np.ndarray:
    """Vectorised :func:`percentile_width_w90` for arrays of ``(k, n)``."""
    k = np.asarray(k, float)
    n = np.asarray(n, float)
    a, b = k + 1.0, n - k + 1.0
    q = beta_quantile(np.stack([a, a]), np.stack([b, b]),
                      np.array([0.05, 0.95]).reshape((2,) + (1,) * a.ndim))
    return q[1] - q[0]


@dataclass(frozen=True)
class RatioPosterior:
    """Posterior of ``zeta = theta_h1 / theta_h0`` for one bin.

    ``rtol`` is the relative accuracy requested from the quadrature.
    """

    numerator: BetaPosterior
    denominator: BetaPosterior
    rtol: float = field(default=1e-6)

    @classmethod
    def from_counts(cls, k1: int, n1: int, k0: int, n0: int, rtol: float = 1e-6):
        return cls(BetaPosterior(k1, n1), BetaPosterior(k0, n0), rtol)

    @cached_property
    def _median(self) -> float:
        return _solve_median(self)

    def swapped(self) -> "RatioPosterior":
        """Posterior of the reciprocal ratio."""
        return RatioPosterior(self.denominator, self.numerator, self.rtol)


def _quad(f, lo: float, hi: float, rtol: float, points=None) -> float:
    if not hi > lo:
        return 0.0
    kwargs = {}
    if points:
        pts = [p for p in points if lo < p < hi]
        if pts:
            kwargs["points"] = pts
    val, err, info = integrate.quad(
        f, lo, hi, epsabs=1e-14, epsrel=rtol * 1e-2, limit=400,
        full_output=True, **kwargs,
    )[:3]
    if err > max(rtol * abs(val), 1e-11):
        raise QuadratureError(
            f"quadrature on [{lo:.6g}, {hi:.6g}] reached error {err:.3g} for value {val:.6g}"
        )
    return val


def _log_kernel(p: BetaPosterior):
    """Scalar log-density of ``p`` on the open interval (0, 1)."""
    am1, bm1 = p.a - 1, p.b - 1
    c = -float(special.betaln(p.a, p.b))
    if am1 and bm1:
        return lambda x: c + am1 * math.log(x) + bm1 * math.log1p(-x)
    if am1:
        return lambda x: c + am1 * math.log(x)
    if bm1:
        return lambda x: c + bm1 * math.log1p(-x)
    return lambda x: c


def ratio_density(r: RatioPosterior, z: float) -> float:
    """Density of the ratio posterior at ``z >= 0``.

    ``p(z) = integral over x in [0, 1] of x f0(x) f1(z x)``, with ``f0`` the
    denominator density and ``f1`` the numerator density.
    """
    z = float(z)
    if z < 0:
        raise ValueError("ratio density is defined for z >= 0")
    num, den = r.numerator, r.denominator
    if z == 0.0:
        # integrand reduces to x f0(x) f1(0)
        f1_0 = float(num.pdf(0.0))
        if f1_0 == 0.0:
            return 0.0
        return f1_0 * den.mean
    d_lo, d_hi = den.support_bracket
    n_lo, n_hi = num.support_bracket
    lo = max(d_lo, n_lo / z)
    hi = min(d_hi, n_hi / z, 1.0)
    if not hi > lo:
        return 0.0
    log_f0 = _log_kernel(den)
    log_f1 = _log_kernel(num)
    log, exp = math.log, math.exp

    def integrand(x):
        zx = z * x
        if zx >= 1.0:
            return 0.0
        return exp(log(x) + log_f0(x) + log_f1(zx))

    return _quad(integrand, lo, hi, r.rtol, [den.mean, num.mean / z])


def ratio_cdf(r: RatioPosterior, z: float) -> float:
    """``P{zeta <= z} = integral of f0(x) F1(z x) dx`` over ``x`` in ``[0, 1]``."""
    z = float(z)
    if z < 0:
        raise ValueError("ratio CDF is defined for z >= 0")
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return 1.0
    num, den = r.numerator, r.denominator
    d_lo, d_hi = den.support_bracket
    n_lo, n_hi = num.support_bracket
    c_lo = n_lo / z
    c_hi = n_hi / z
    # beyond c_hi the numerator CDF is 1 to within BRACKET_TAIL
    upper_mass = 1.0 - float(den.cdf(c_hi)) if c_hi < 1.0 else 0.0
    lo = max(c_lo, d_lo)
    hi = min(c_hi, d_hi, 1.0)
    log_f0 = _log_kernel(den)
    a1, b1 = float(num.a), float(num.b)
    betainc, exp = special.betainc, math.exp

    def integrand(x):
        return exp(log_f0(x)) * betainc(a1, b1, min(1.0, z * x))

    mid = _quad(integrand, lo, hi, r.rtol, [den.mean, num.mean / z])
    return min(1.0, max(0.0, mid + upper_mass))


def _solve_median(r: RatioPosterior) -> float:
    guess = r.numerator.quantile(0.5) / max(r.denominator.quantile(0.5), 1e-300)
    if not (math.isfinite(guess) and guess > 0):
        return math.nan
    lg = math.log(guess)

    def f(t):
        return ratio_cdf(r, math.exp(t)) - 0.5

    lo, hi = lg - 0.5, lg + 0.5
    step = 0.5
    while f(lo) > 0:
        step *= 2
        lo = lg - step
        if step > 200:
            return math.nan
    step = 0.5
    while f(hi) < 0:
        step *= 2
        hi = lg + step
        if step > 200:
            return math.nan
    return math.exp(optimize.brentq(f, lo, hi, xtol=1e-10, rtol=1e-10))


def ratio_median(r: RatioPosterior) -> float:
    """Median of the ratio posterior (nan if it cannot be located)."""
    return r._median


def normal_approx_valid(p: BetaPosterior) -> bool:
    """Both tails of the posterior well away from 0 and 1."""
    need = max(8.0, 0.02 * p.n)
    return p.k >= need and (p.n - p.k) >= need


def ratio_normal_approx(r: RatioPosterior, z):
    """Normal-ratio approximation to the ratio posterior density.

    Each beta posterior is replaced by a normal with the same mean and
    variance; for a denominator bounded away from zero the ratio ``X1 / X0``
    has CDF ``Phi((mu0 z - mu1) / sqrt(s1^2 + s0^2 z^2))``, whose derivative
    is returned. Raises :class:`ApproximationInvalidError` when either
    posterior has too few successes or failures.
    """
    for p, name in ((r.numerator, "numerator"), (r.denominator, "denominator")):
        if not normal_approx_valid(p):
            raise ApproximationInvalidError(
                f"{name} posterior (k={p.k}, n={p.n}) is too close to the boundary "
                "for the normal approximation"
            )
    z = np.asarray(z, float)
    m1, v1 = r.numerator.mean, r.numerator.variance
    m0, v0 = r.denominator.mean, r.denominator.variance
    s2 = v1 + v0 * z * z
    dens = (m0 * v1 + m1 * v0 * z) / (math.sqrt(2 * math.pi) * s2 ** 1.5)
    dens = dens * np.exp(-((m0 * z - m1) ** 2) / (2 * s2))
    return dens if dens.ndim else float(dens)


def sample_joint_posterior(counts: HistogramPair, seed: SeedLike, size: int | None = None):
    """Draw ``(theta_h0, theta_h1)`` from the joint posterior under a flat simplex prior.

    Each class posterior is Dirichlet with parameters ``counts + 1``. With
    ``size`` given, each returned array has shape ``(size, L)``.
    """
    rng = as_generator(seed)
    t0 = rng.dirichlet(counts.counts_h0 + 1.0, size=size)
    t1 = rng.dirichlet(counts.counts_h1 + 1.0, size=size)
    return t0, t1
