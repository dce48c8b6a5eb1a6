"""Norms, essential norms and spectral radii of affine composition operators.

Everything here reduces to one-dimensional extrema of weight ratios over
t in (0, oo):

    norm bounds          L*inf_t w(t)/w(Lt) <= |C|^2 <= L*sup_t w(t)/w(Lt)
    exact hyperbolic     |C|^2 = (1/mu) * sup_t exp(-2xt) w(mu t)/w(t)
    spectral radius      r_n = mu^-1/2 * (sup_t exp(-2 x_n t) w(mu^n t)/w(t))^(1/2n)

with x_n = x*(mu^n-1)/(mu-1).  The extrema are frequently attained only in
the limits t -> 0+ or t -> oo, so every optimization works in u = log t on
a wide coarse grid refined by golden section, and the boundary values are
taken analytically from the weight's limit exponents rather than by
evaluating at extreme arguments.  Spectral-radius sequences are computed
entirely in log scale (log mu^n, log x_n, log of the weight ratio), which
makes overflow impossible by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ParameterError
from .weights import Weight

BOUNDARY_ZERO = "t->0+"
BOUNDARY_INF = "t->inf"
METHOD_INTERIOR = "interior golden-section"
METHOD_BOUNDARY = "boundary limit from exponents"

# half-width of the base scan window in u = log t  (t in [1e-12, 1e12])
_U_BASE = math.log(1e12)
# base coarse-scan resolution: 2001 points across the 24-decade window
_DU = 2.0 * _U_BASE / 2000.0
_GOLDEN_TOL = 1e-10

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RatioOptimum:
    """One extremum of a weight-ratio objective.

    ``location`` is the maximizing t for an interior optimum, or one of the
    boundary tags when the limit exponents put the extremum at t -> 0+ or
    t -> oo.
    """
    value: float
    location: Union[float, str]
    method: str


@dataclass(frozen=True)
class EssentialNormBounds:
    """Sandwich for the squared essential norm; exact when the sides meet."""
    lower: float
    upper: float
    exact: bool


@dataclass(frozen=True)
class SpectralRadiusResult:
    estimate: float
    sequence: list
    converged: bool


def _log_expm1(y: float) -> float:
    if y > 36.0:
        return y + math.log1p(-math.exp(-y))
    return math.log(math.expm1(y))


def _golden_max(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """Golden-section maximizer on [a, b] to absolute tolerance in u."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > _GOLDEN_TOL:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    u = 0.5 * (a + b)
    return u, f(u)


def _interior_max(obj: Callable[[np.ndarray], np.ndarray],
                  u_lo: float, u_hi: float) -> tuple[float, float]:
    n = max(2001, int(math.ceil((u_hi - u_lo) / _DU)) + 1)
    us = np.linspace(u_lo, u_hi, n)
    vals = np.asarray(obj(us), dtype=float)
    i = int(np.nanargmax(vals))
    a = us[max(i - 1, 0)]
    b = us[min(i + 1, n - 1)]
    return _golden_max(lambda u: float(obj(np.array([u]))[0]), a, b)


def _optimum(obj: Callable[[np.ndarray], np.ndarray],
             boundary_zero: float, boundary_inf: float,
             u_lo: float, u_hi: float, maximize: bool) -> RatioOptimum:
    """Combine an interior scan with the analytic boundary limits.

    ``obj`` and the boundary values are in log scale; the returned optimum
    is exponentiated.  Ties go to the boundary (the suprema in question are
    typically attained only in the limit).
    """
    sign = 1.0 if maximize else -1.0
    u_star, g_star = _interior_max(lambda u: sign * obj(u), u_lo, u_hi)
    g_star *= sign
    b_candidates = [(boundary_zero, BOUNDARY_ZERO), (boundary_inf, BOUNDARY_INF)]
    b_val, b_tag = max(b_candidates, key=lambda p: sign * p[0])
    if sign * b_val >= sign * g_star - 1e-12:
        return RatioOptimum(math.exp(b_val), b_tag, METHOD_BOUNDARY)
    return RatioOptimum(math.exp(g_star), math.exp(u_star), METHOD_INTERIOR)


# --------------------------------------------------------------------------
# norm and essential-norm bounds
# --------------------------------------------------------------------------

def ratio_extrema(w: Weight, L: float) -> tuple[RatioOptimum, RatioOptimum]:
    """(inf, sup) of t -> w(t)/w(Lt) over (0, oo), boundaries included.

    As t -> 0+ the ratio tends to L^-e0 and as t -> oo to L^-einf, by the
    limit power laws of the weight.
    """
    if not (L > 0 and math.isfinite(L)):
        raise ParameterError(f"L: angular derivative must be in (0, oo), got {L}")
    log_L = math.log(L)

    def obj(u: np.ndarray) -> np.ndarray:
        return w.log_eval(u) - w.log_eval(u + log_L)

    b0 = -w.e0 * log_L
    binf = -w.einf * log_L
    u_lo = -_U_BASE - max(0.0, log_L)
    u_hi = _U_BASE + max(0.0, -log_L)
    inf_opt = _optimum(obj, b0, binf, u_lo, u_hi, maximize=False)
    sup_opt = _optimum(obj, b0, binf, u_lo, u_hi, maximize=True)
    return inf_opt, sup_opt


def norm_bounds(w: Weight, L: float) -> tuple[float, float]:
    """Bounds (lower, upper) on the squared operator norm for derivative L."""
    inf_opt, sup_opt = ratio_extrema(w, L)
    return L * inf_opt.value, L * sup_opt.value


def essential_norm_bounds(w: Weight, L: float) -> EssentialNormBounds:
    """The same sandwich bounds the squared essential norm.

    When the two sides agree the essential norm equals the norm (the flag
    is set), as happens for every pure power-law weight.
    """
    lower, upper = norm_bounds(w, L)
    exact = (upper - lower) <= 1e-9 * upper
    return EssentialNormBounds(lower, upper, exact)


# --------------------------------------------------------------------------
# exact hyperbolic norms
# --------------------------------------------------------------------------

def hyperbolic_norm_optimum(w: Weight, mu: float, x: float) -> RatioOptimum:
    """sup_t exp(-2xt) w(mu t)/w(t), the quantity under the exact norm."""
    if not (mu > 0 and math.isfinite(mu)):
        raise ParameterError(f"mu: must be a positive real, got {mu}")
    if not (x >= 0 and math.isfinite(x)):
        raise ParameterError(f"x: must be a real >= 0, got {x}")
    log_mu = math.log(mu)

    if x > 0:
        log_x = math.log(x)

        def obj(u: np.ndarray) -> np.ndarray:
            with np.errstate(over="ignore"):
                damp = -2.0 * np.exp(np.minimum(log_x + u, 710.0))
            return damp + w.log_eval(u + log_mu) - w.log_eval(u)
    else:
        def obj(u: np.ndarray) -> np.ndarray:
            return w.log_eval(u + log_mu) - w.log_eval(u)

    b0 = w.e0 * log_mu
    binf = w.einf * log_mu if x == 0 else -math.inf
    u_lo = -_U_BASE + min(0.0, -log_mu)
    u_hi = _U_BASE + max(0.0, -log_mu)
    if x > 0:
        u_lo = min(u_lo, -math.log(x) - _U_BASE)
    return _optimum(obj, b0, binf, u_lo, u_hi, maximize=True)


def exact_hyperbolic_norm(w: Weight, mu: float, x: float) -> float:
    """Exact norm of the composition operator with symbol mu*s + x, x >= 0.

    Equals ((1/mu) * sup_t exp(-2xt) w(mu t)/w(t))^(1/2).
    """
    opt = hyperbolic_norm_optimum(w, mu, x)
    return math.exp(0.5 * (math.log(opt.value) - math.log(mu)))


# --------------------------------------------------------------------------
# spectral radii
# --------------------------------------------------------------------------

def _growth_extremum(w: Weight, shift: float, log_xn: float,
                     maximize: bool) -> float:
    """Extremum in log scale of -2 x_n t + log w(e^u * e^shift) - log w(e^u).

    ``shift`` is log mu^n; ``log_xn`` is -inf when there is no exponential
    damping.  Returns the extremal log value including boundary limits.
    """
    damped = math.isfinite(log_xn)

    def obj(u: np.ndarray) -> np.ndarray:
        core = w.log_eval(u + shift) - w.log_eval(u)
        if not damped:
            return core
        with np.errstate(over="ignore"):
            return core - 2.0 * np.exp(np.minimum(log_xn + u, 710.0))

    b0 = w.e0 * shift
    binf = -math.inf if damped else w.einf * shift
    u_lo = -_U_BASE - max(0.0, shift)
    u_hi = _U_BASE + max(0.0, -shift)
    if damped:
        u_lo = min(u_lo, -log_xn - _U_BASE)
    opt = _optimum(obj, b0, binf, u_lo, u_hi, maximize=maximize)
    return math.log(opt.value)


def _log_xn(x: float, mu: float, n: int) -> float:
    """log of x_n = x*(mu^n-1)/(mu-1) (n*x for mu = 1), -inf when x = 0."""
    if x == 0:
        return -math.inf
    log_mu = math.log(mu)
    if mu == 1.0:
        return math.log(n * x)
    if mu > 1.0:
        return math.log(x) + _log_expm1(n * log_mu) - _log_expm1(log_mu)
    return math.log(x) + math.log1p(-mu ** n) - math.log1p(-mu)


def spectral_radius(w: Weight, mu: float, x: float,
                    n_max: int = 64) -> SpectralRadiusResult:
    """Iterate-based spectral radius of the operator with symbol mu*s + x.

    Computes r_n = mu^-1/2 * (sup_t exp(-2 x_n t) w(mu^n t)/w(t))^(1/2n)
    for n = 1..n_max and estimates the limit by the geometric mean of the
    last eight terms.  The convergence flag is cleared when the last
    quarter of the sequence still varies by more than 1%.
    """
    if not (mu > 0 and math.isfinite(mu)):
        raise ParameterError(f"mu: must be a positive real, got {mu}")
    if not (x >= 0 and math.isfinite(x)):
        raise ParameterError(f"x: must be a real >= 0, got {x}")
    if not n_max >= 8:
        raise ParameterError(f"n_max: need n_max >= 8, got {n_max}")
    log_mu = math.log(mu)
    seq = []
    for n in range(1, n_max + 1):
        g = _growth_extremum(w, n * log_mu, _log_xn(x, mu, n), maximize=True)
        seq.append(math.exp(-0.5 * log_mu + g / (2.0 * n)))
    tail = np.array(seq[-min(8, n_max):])
    estimate = float(np.exp(np.mean(np.log(tail))))
    quarter = np.array(seq[-max(2, n_max // 4):])
    converged = float(quarter.max() - quarter.min()) <= 0.01 * estimate
    return SpectralRadiusResult(estimate, seq, converged)


def spectral_radius_bounds(w: Weight, L: float,
                           n_max: int = 32) -> tuple[float, float]:
    """Bounds on the squared spectral radius from the iterate norm bounds.

    Returns L*(lim of n-th roots of inf_t w(t)/w(L^n t)) and the analogue
    with sup, the limits estimated from the sequence tails.
    """
    if not (L > 0 and math.isfinite(L)):
        raise ParameterError(f"L: angular derivative must be in (0, oo), got {L}")
    if not n_max >= 8:
        raise ParameterError(f"n_max: need n_max >= 8, got {n_max}")
    log_L = math.log(L)
    lo_roots, hi_roots = [], []
    for n in range(1, n_max + 1):
        shift = n * log_L
        # w(t)/w(L^n t) is the reciprocal of the core ratio in
        # _growth_extremum, so its inf comes from the core's sup
        g_core_max = _growth_extremum(w, shift, -math.inf, maximize=True)
        g_core_min = _growth_extremum(w, shift, -math.inf, maximize=False)
        lo_roots.append(math.exp(-g_core_max / n))
        hi_roots.append(math.exp(-g_core_min / n))
    lower = L * float(np.exp(np.mean(np.log(lo_roots[-8:]))))
    upper = L * float(np.exp(np.mean(np.log(hi_roots[-8:]))))
    return lower, upper


def dilation_spectrum_radii(w: Weight, mu: float,
                            n_max: int = 48) -> tuple[float, float]:
    """Modulus range [r, R] enclosing the spectrum of the pure dilation.

    r and R are mu^-1/2 times the 2n-th-root limits of the inf/sup of
    w(mu^n t)/w(t).  The case mu < 1 is obtained from 1/mu by inversion
    (the spectrum of the inverse operator is the reciprocal set).
    """
    if not (mu > 0 and math.isfinite(mu)) or mu == 1.0:
        raise ParameterError(f"mu: dilation radii need mu > 0, mu != 1, got {mu}")
    if mu < 1.0:
        r_inv, R_inv = dilation_spectrum_radii(w, 1.0 / mu, n_max)
        return 1.0 / R_inv, 1.0 / r_inv
    log_mu = math.log(mu)
    lo, hi = [], []
    for n in range(1, n_max + 1):
        shift = n * log_mu
        g_lo = _growth_extremum(w, shift, -math.inf, maximize=False)
        g_hi = _growth_extremum(w, shift, -math.inf, maximize=True)
        lo.append(math.exp(-0.5 * log_mu + g_lo / (2.0 * n)))
        hi.append(math.exp(-0.5 * log_mu + g_hi / (2.0 * n)))
    r = float(np.exp(np.mean(np.log(lo[-8:]))))
    R = float(np.exp(np.mean(np.log(hi[-8:]))))
    return r, R
