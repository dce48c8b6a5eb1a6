"""Affine self-maps of the right half-plane.

phi(s) = mu*s + s0 with mu > 0 and Re s0 >= 0 are exactly the
linear-fractional self-maps fixing infinity whose composition operators
are bounded on the spaces handled here.  This module classifies them,
computes the angular derivative at infinity, iterates and inverts them,
and reduces away the imaginary translation part by unitary conjugation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvergenceFailure, ParameterError

IDENTITY = "identity"
PARABOLIC = "parabolic"
HYPERBOLIC = "hyperbolic"

# largest y with exp(y) finite in double precision
_EXP_MAX = 709.0


def _log_expm1(y: float) -> float:
    """log(e^y - 1) for y > 0 without overflow."""
    if y > 36.0:
        return y + math.log1p(-math.exp(-y))
    return math.log(math.expm1(y))


@dataclass(frozen=True)
class AffineSymbol:
    """phi(s) = mu*s + s0, a self-map of the right half-plane.

    ``log_mu`` and ``log_s0_mag`` are carried alongside the plain floats so
    that large iterates stay usable after ``mu**n`` leaves double range;
    in that regime ``mu``/``s0`` are clamped to huge finite values while the
    log-scale fields remain exact.
    """
    mu: float
    s0: complex
    log_mu: float = None
    log_s0_mag: float = None

    def __post_init__(self) -> None:
        mu = float(self.mu)
        s0 = complex(self.s0)
        if not (mu > 0 and math.isfinite(mu)):
            if not (mu == math.inf and self.log_mu is not None):
                raise ParameterError(f"mu: must be a positive real, got {self.mu}")
        if s0.real < 0:
            raise ParameterError(
                f"s0: needs Re s0 >= 0 for a half-plane self-map, got {self.s0}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "s0", s0)
        if self.log_mu is None:
            object.__setattr__(self, "log_mu", math.log(mu))
        if self.log_s0_mag is None:
            mag = abs(s0)
            object.__setattr__(self, "log_s0_mag",
                               math.log(mag) if mag > 0 else -math.inf)

    # -- basic structure ----------------------------------------------------

    @property
    def classification(self) -> str:
        if self.mu == 1.0:
            return IDENTITY if self.s0 == 0 else PARABOLIC
        return HYPERBOLIC

    @property
    def x(self) -> float:
        return self.s0.real

    @property
    def y(self) -> float:
        return self.s0.imag

    def __call__(self, s: complex) -> complex:
        return self.mu * s + self.s0

    def to_dict(self) -> dict:
        return {"mu": self.mu, "s0": [self.s0.real, self.s0.imag]}

    @classmethod
    def from_dict(cls, data: dict) -> "AffineSymbol":
        return cls(data["mu"], complex(data["s0"][0], data["s0"][1]))


def compose(outer: AffineSymbol, inner: AffineSymbol) -> AffineSymbol:
    """outer o inner, again affine: (mu1*mu2, mu1*s2 + s1)."""
    return AffineSymbol(outer.mu * inner.mu,
                        outer.mu * inner.s0 + outer.s0,
                        log_mu=outer.log_mu + inner.log_mu)


def angular_derivative(phi: AffineSymbol) -> float:
    """L = lim z/phi(z) along the positive axis; equals 1/mu."""
    return 1.0 / phi.mu


def iterate(phi: AffineSymbol, n: int) -> AffineSymbol:
    """The n-th compositional iterate (mu^n, s0*(mu^n-1)/(mu-1)).

    Translations add: the mu = 1 case returns (1, n*s0).  The log-scale
    fields are computed exactly even when mu**n overflows.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ParameterError(f"n: iterate needs an integer n >= 1, got {n}")
    n = int(n)
    if phi.mu == 1.0:
        return AffineSymbol(1.0, n * phi.s0, log_mu=0.0)
    log_mu_n = n * phi.log_mu
    mu_n = math.exp(log_mu_n) if log_mu_n <= _EXP_MAX else math.inf
    # (mu^n - 1)/(mu - 1) > 0; stable via expm1 for mu near 1
    if log_mu_n <= _EXP_MAX:
        scale = math.expm1(log_mu_n) / math.expm1(phi.log_mu)
        s0_n = phi.s0 * scale
        log_scale = math.log(scale) if scale > 0 else -math.inf
    else:
        log_scale = _log_expm1(log_mu_n) - _log_expm1(phi.log_mu) \
            if phi.log_mu > 0 else log_mu_n - _log_expm1(-phi.log_mu)
        # clamp the complex field, keep the exact magnitude in log scale
        s0_n = cmath.rect(math.exp(min(log_scale + phi.log_s0_mag, 700.0)),
                          cmath.phase(phi.s0)) if phi.s0 != 0 else 0j
    if s0_n.real < 0 and abs(s0_n.real) < 1e-12 * abs(s0_n):
        s0_n = complex(0.0, s0_n.imag)  # rounding noise on the boundary
    return AffineSymbol(mu_n, s0_n, log_mu=log_mu_n,
                        log_s0_mag=(phi.log_s0_mag + log_scale
                                    if phi.s0 != 0 else -math.inf))


def reduce(phi: AffineSymbol) -> tuple[AffineSymbol, float]:
    """Strip the imaginary part of s0 by conjugating with s -> s + i*shift.

    Returns (psi, shift) with psi(s) = mu*s + Re s0 and
    shift = Im s0 / (mu - 1); the conjugation identity
    rho^-1 o psi o rho = phi holds exactly.  Undefined for mu = 1.
    """
    if phi.mu == 1.0:
        raise ParameterError(
            "mu: reduction is undefined for mu = 1 (parabolic symbols are "
            "handled directly)")
    shift = phi.y / (phi.mu - 1.0)
    psi = AffineSymbol(phi.mu, complex(phi.x, 0.0), log_mu=phi.log_mu)
    return psi, shift


def invert(phi: AffineSymbol) -> AffineSymbol:
    """phi^-1(s) = (s - s0)/mu; a self-map only when Re s0 = 0."""
    if phi.x > 0:
        raise ParameterError(
            "s0: the inverse maps the half-plane into itself only when "
            f"Re s0 = 0, got Re s0 = {phi.x}")
    return AffineSymbol(1.0 / phi.mu, -phi.s0 / phi.mu, log_mu=-phi.log_mu)


def estimate_angular_derivative(
        sampler: Callable[[float], complex],
        radii: Optional[Sequence[float]] = None,
        rtol: float = 1e-6) -> float:
    """Numerical angular derivative lim r/phi(r) for user-supplied symbols.

    Evaluates g(r) = r/phi(r) along increasing positive radii and
    accelerates the sequence with iterated Aitken extrapolation (the error
    decays geometrically on a geometric radius ladder).  Raises
    :class:`ConvergenceFailure` when successive estimates disagree beyond
    ``rtol`` or when the limit is 0 or infinite, which are exactly the
    symbols whose composition operators are unbounded.
    """
    if radii is None:
        radii = np.geomspace(1e2, 1e12, 21)
    r = np.asarray(list(radii), dtype=float)
    if len(r) < 3 or np.any(np.diff(r) <= 0) or np.any(r <= 0):
        raise ParameterError("radii: need >= 3 increasing positive radii")
    g = np.array([rr / complex(sampler(rr)) for rr in r])
    if np.any(~np.isfinite(g)):
        raise ConvergenceFailure("angular derivative: phi(r) vanished or blew "
                                 "up along the positive axis")
    # iterated Aitken delta-squared
    seq = g.copy()
    for _ in range(3):
        if len(seq) < 3:
            break
        d1 = seq[1:-1] - seq[:-2]
        d2 = seq[2:] - 2 * seq[1:-1] + seq[:-2]
        safe = np.abs(d2) > 1e-300
        acc = np.where(safe, seq[2:] - (seq[2:] - seq[1:-1]) ** 2
                       / np.where(safe, d2, 1.0), seq[2:])
        seq = acc
    est = seq[-1]
    tail = seq[-3:] if len(seq) >= 3 else seq
    spread = float(np.max(np.abs(np.diff(tail)))) if len(tail) > 1 else 0.0
    scale = max(abs(est), 1e-30)
    if spread > rtol * max(1.0, scale):
        raise ConvergenceFailure(
            f"angular derivative: estimates still move by {spread:.3e} "
            f"(tolerance {rtol:.1e}); the limit may not exist")
    if abs(est) < 1e-9 or abs(est) > 1e9 or abs(est.imag) > rtol * max(1.0, scale):
        raise ConvergenceFailure(
            f"angular derivative: limit {est:.6g} is not finite, nonzero and "
            "positive; the composition operator is unbounded")
    return float(est.real)
