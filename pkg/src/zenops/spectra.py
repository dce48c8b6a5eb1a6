"""Spectra and essential spectra of affine composition operators.

Exact spectral sets are returned for the built-in weight families:

  * identity symbol: the singleton {1};
  * parabolic symbols (mu = 1): the closure of {exp(-s0 t): t >= 0}, a
    circle when s0 is purely imaginary, for every weight (the operator is
    unitarily equivalent to multiplication by exp(-s0 t));
  * hyperbolic symbols on the Hardy / power-Bergman families: the circle
    or closed disc of radius mu^-(alpha+2)/2 (Hardy is alpha = -1);
  * hyperbolic symbols on the Hardy-Bergman weight 1 + 1/t: the annulus
    with radii {1/mu, 1/sqrt(mu)} when Re s0 = 0, the closed disc of
    radius 1/mu when Re s0 > 0.

For general synthesized weights only an enclosure is proved, so the
prediction is an annulus (or disc) bound computed from iterate-norm
limits, together with a certified subset of eigenvalue moduli coming from
the power-law eigenfunctions t^alpha (times exponential factors when
Re s0 > 0); exactness is never claimed outside the proven families.  The
same sets bound the essential spectrum: the certified eigenvalues have
infinite multiplicity (restriction to any set invariant under scaling by
mu gives new eigenfunctions), and in every exact case the spectrum and
essential spectrum coincide.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ParameterError
from .norms import dilation_spectrum_radii, spectral_radius
from .symbols import HYPERBOLIC, IDENTITY, PARABOLIC, AffineSymbol
from .weights import ALPHA_BERGMAN, HARDY, HARDY_BERGMAN, Weight

CIRCLE = "circle"
ANNULUS = "annulus"
DISC = "disc"
SPIRAL = "spiral-closure"
SINGLETON = "singleton"
ENCLOSURE = "enclosure"

SIDE_A = "A"
SIDE_A_STAR = "A*"

_MODULUS_TOL = 1e-12
_SPIRAL_TOL = 1e-9


@dataclass(frozen=True)
class SpectralSet:
    """Tagged spectral set; use the factory functions to construct one."""
    variant: str
    exact: bool = False
    radius: Optional[float] = None
    r_in: Optional[float] = None
    r_out: Optional[float] = None
    s0: Optional[complex] = None
    value: Optional[complex] = None
    bound: Optional["SpectralSet"] = None
    certified_subset: Optional["SpectralSet"] = None

    def __post_init__(self) -> None:
        v = self.variant
        if v in (CIRCLE, DISC):
            if not (self.radius is not None and self.radius > 0):
                raise ParameterError(f"radius: {v} needs radius > 0")
        elif v == ANNULUS:
            if not (self.r_in is not None and self.r_out is not None
                    and 0 < self.r_in <= self.r_out):
                raise ParameterError("annulus needs 0 < r_in <= r_out")
        elif v == SPIRAL:
            s0 = complex(self.s0)
            if s0.real <= 0:
                raise ParameterError(
                    "s0: spiral closures need Re s0 > 0 (purely imaginary "
                    "s0 normalizes to the unit circle)")
            object.__setattr__(self, "s0", s0)
        elif v == SINGLETON:
            if self.value is None:
                raise ParameterError("singleton needs a value")
            object.__setattr__(self, "value", complex(self.value))
        elif v == ENCLOSURE:
            if self.bound is None or self.bound.variant not in (ANNULUS, DISC):
                raise ParameterError("enclosure needs an annulus or disc bound")
            if self.certified_subset is not None:
                lo_b, hi_b = self.bound.modulus_range()
                lo_s, hi_s = self.certified_subset.modulus_range()
                if lo_s < lo_b - _MODULUS_TOL or hi_s > hi_b + _MODULUS_TOL:
                    raise ParameterError(
                        "enclosure: certified subset exceeds the bound")
        else:
            raise ParameterError(f"variant: unknown spectral-set kind {v!r}")

    def modulus_range(self) -> tuple[float, float]:
        """Smallest and largest modulus of points in the set."""
        if self.variant == CIRCLE:
            return self.radius, self.radius
        if self.variant == ANNULUS:
            return self.r_in, self.r_out
        if self.variant == DISC:
            return 0.0, self.radius
        if self.variant == SPIRAL:
            return 0.0, 1.0
        if self.variant == SINGLETON:
            return abs(self.value), abs(self.value)
        return self.bound.modulus_range()

    def to_dict(self) -> dict:
        out: dict = {"variant": self.variant, "exact": self.exact}
        if self.variant in (CIRCLE, DISC):
            out["radius"] = self.radius
        elif self.variant == ANNULUS:
            out["r_in"] = self.r_in
            out["r_out"] = self.r_out
        elif self.variant == SPIRAL:
            out["s0"] = [self.s0.real, self.s0.imag]
        elif self.variant == SINGLETON:
            out["value"] = [self.value.real, self.value.imag]
        else:
            out["bound"] = self.bound.to_dict()
            out["certified_subset"] = (None if self.certified_subset is None
                                       else self.certified_subset.to_dict())
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralSet":
        v = data["variant"]
        exact = bool(data.get("exact", False))
        if v == CIRCLE:
            return circle(data["radius"], exact=exact)
        if v == DISC:
            return disc(data["radius"], exact=exact)
        if v == ANNULUS:
            return annulus(data["r_in"], data["r_out"], exact=exact)
        if v == SPIRAL:
            re, im = data["s0"]
            return spiral_closure(complex(re, im), exact=exact)
        if v == SINGLETON:
            re, im = data["value"]
            return singleton(complex(re, im), exact=exact)
        if v == ENCLOSURE:
            sub = data.get("certified_subset")
            return enclosure(cls.from_dict(data["bound"]),
                             None if sub is None else cls.from_dict(sub))
        raise ParameterError(f"variant: unknown spectral-set kind {v!r}")


def circle(radius: float, *, exact: bool = False) -> SpectralSet:
    return SpectralSet(CIRCLE, exact=exact, radius=float(radius))


def annulus(r_in: float, r_out: float, *, exact: bool = False) -> SpectralSet:
    return SpectralSet(ANNULUS, exact=exact, r_in=float(r_in), r_out=float(r_out))


def disc(radius: float, *, exact: bool = False) -> SpectralSet:
    return SpectralSet(DISC, exact=exact, radius=float(radius))


def spiral_closure(s0: complex, *, exact: bool = False) -> SpectralSet:
    """Closure of {exp(-s0 t): t >= 0} (with 0); the unit circle if Re s0 = 0."""
    s0 = complex(s0)
    if s0 == 0:
        raise ParameterError("s0: spiral closure needs s0 != 0")
    if s0.real < 0:
        raise ParameterError(f"s0: needs Re s0 >= 0, got {s0}")
    if s0.real == 0:
        return circle(1.0, exact=exact)
    return SpectralSet(SPIRAL, exact=exact, s0=s0)


def singleton(value: complex, *, exact: bool = False) -> SpectralSet:
    return SpectralSet(SINGLETON, exact=exact, value=value)


def enclosure(bound: SpectralSet,
              certified_subset: Optional[SpectralSet] = None) -> SpectralSet:
    return SpectralSet(ENCLOSURE, exact=False, bound=bound,
                       certified_subset=certified_subset)


# --------------------------------------------------------------------------
# membership and boundary sampling
# --------------------------------------------------------------------------

def contains(s: SpectralSet, z: complex) -> bool:
    """Membership with modulus slack 1e-12 (1e-9 point distance on spirals).

    For enclosures this tests the outer bound; the certified subset can be
    queried directly through ``s.certified_subset``.
    """
    z = complex(z)
    m = abs(z)
    if s.variant == CIRCLE:
        return abs(m - s.radius) <= _MODULUS_TOL * max(1.0, s.radius)
    if s.variant == ANNULUS:
        return (s.r_in - _MODULUS_TOL <= m <= s.r_out + _MODULUS_TOL)
    if s.variant == DISC:
        return m <= s.radius + _MODULUS_TOL * max(1.0, s.radius)
    if s.variant == SINGLETON:
        return abs(z - s.value) <= _MODULUS_TOL * max(1.0, abs(s.value))
    if s.variant == ENCLOSURE:
        return contains(s.bound, z)
    # spiral: the modulus pins down the parameter t, then compare points
    if m <= _SPIRAL_TOL:
        return True
    if m > 1.0 + _SPIRAL_TOL:
        return False
    t = -math.log(min(m, 1.0)) / s.s0.real
    point = cmath.exp(-s.s0 * t)
    return abs(z - point) <= _SPIRAL_TOL


def boundary_samples(s: SpectralSet, n: int) -> list[tuple[complex, int]]:
    """Points tracing each boundary component, tagged by component id.

    Circles and discs give n equally spaced points; annuli give n per
    bounding circle; spirals give n points along exp(-s0 t) down to
    modulus 1e-6 plus the origin as its own component.  Enclosures sample
    their outer bound.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise ParameterError(f"n: boundary sampling needs an integer n >= 2, got {n}")
    n = int(n)

    def ring(radius: float, component: int) -> list[tuple[complex, int]]:
        return [(radius * cmath.exp(2j * math.pi * k / n), component)
                for k in range(n)]

    if s.variant == CIRCLE or s.variant == DISC:
        return ring(s.radius, 0)
    if s.variant == ANNULUS:
        return ring(s.r_in, 0) + ring(s.r_out, 1)
    if s.variant == SINGLETON:
        return [(s.value, 0)]
    if s.variant == ENCLOSURE:
        return boundary_samples(s.bound, n)
    t_end = -math.log(1e-6) / s.s0.real
    arc = [(cmath.exp(-s.s0 * t), 0) for t in np.linspace(0.0, t_end, n)]
    return arc + [(0j, 1)]


# --------------------------------------------------------------------------
# spectrum prediction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphaRange:
    """Open interval of Re alpha with t^alpha / w(t) square-integrable.

    Integrability of t^(2a)/w(t) needs 2a - e0 > -1 at zero and
    2a - einf < -1 at infinity, hence the interval
    ((e0 - 1)/2, (einf - 1)/2), possibly empty.
    """
    lower: float
    upper: float

    @property
    def is_empty(self) -> bool:
        return not self.lower < self.upper

    def __contains__(self, a: float) -> bool:
        return self.lower < a < self.upper


def eigen_admissible_alphas(w: Weight) -> AlphaRange:
    """Admissible Re alpha for the power eigenfunctions, from exponents only."""
    return AlphaRange((w.e0 - 1.0) / 2.0, (w.einf - 1.0) / 2.0)


def _builtin_power_alpha(w: Weight) -> Optional[float]:
    if w.kind == HARDY:
        return -1.0
    if w.kind == ALPHA_BERGMAN:
        return w.alpha
    return None


def predict_spectrum(w: Weight, phi: AffineSymbol) -> SpectralSet:
    """Predicted spectrum of the composition operator with symbol phi.

    See the module docstring for the case analysis.  Exact sets carry
    ``exact=True``; general weights get an enclosure with an optional
    certified subset of eigenvalue moduli.
    """
    cls = phi.classification
    if cls == IDENTITY:
        return singleton(1.0 + 0j, exact=True)
    if cls == PARABOLIC:
        return spiral_closure(phi.s0, exact=True)

    mu, x = phi.mu, phi.x
    power_alpha = _builtin_power_alpha(w)
    if power_alpha is not None:
        rho = mu ** (-(power_alpha + 2.0) / 2.0)
        if x == 0:
            return circle(rho, exact=True)
        return disc(rho, exact=True)
    if w.kind == HARDY_BERGMAN:
        if x == 0:
            lo = min(1.0 / mu, 1.0 / math.sqrt(mu))
            hi = max(1.0 / mu, 1.0 / math.sqrt(mu))
            return annulus(lo, hi, exact=True)
        return disc(1.0 / mu, exact=True)

    # general weight: enclosure plus certified eigenvalue moduli
    if x == 0:
        r, big_r = dilation_spectrum_radii(w, mu)
        alphas = eigen_admissible_alphas(w)
        subset = None
        if not alphas.is_empty:
            radii = sorted((mu ** alphas.lower, mu ** alphas.upper))
            subset = annulus(radii[0], radii[1])
            r, big_r = min(r, radii[0]), max(big_r, radii[1])
        return enclosure(annulus(r, big_r), subset)
    rho_est = spectral_radius(w, mu, x).estimate
    subset_radius = mu ** ((w.e0 - 1.0) / 2.0)
    subset = disc(subset_radius)
    return enclosure(disc(max(rho_est, subset_radius)), subset)


def predict_essential_spectrum(w: Weight, phi: AffineSymbol) -> SpectralSet:
    """Predicted essential spectrum; coincides with the spectrum prediction.

    In every exact case the two sets are equal, and the enclosure plus
    certified subset of the general case bounds the essential spectrum as
    well (the certified eigenvalues have infinite multiplicity).
    """
    return predict_spectrum(w, phi)


# --------------------------------------------------------------------------
# eigenvalue machinery for the time-domain operators
# --------------------------------------------------------------------------

def invariant_set(mu: float, delta: float, t: float) -> bool:
    """Membership in E = union of (mu^n, mu^n (1+delta)) over all integers n.

    E satisfies mu*E = E, which is what makes indicator-truncated
    eigenfunctions exhibit infinite multiplicity.
    """
    if not mu > 1:
        raise ParameterError(f"mu: invariant sets need mu > 1, got {mu}")
    if not 0 < delta < mu - 1:
        raise ParameterError(
            f"delta: need 0 < delta < mu - 1 = {mu - 1}, got {delta}")
    if not t > 0:
        raise ParameterError(f"t: need t > 0, got {t}")
    frac = (math.log(t) / math.log(mu)) % 1.0
    return 0.0 < frac < math.log1p(delta) / math.log(mu)


def residual_eigencheck(w: Weight, mu: float, x: float, alpha: complex,
                        side: str, grid) -> tuple[complex, float]:
    """Verify a predicted eigenvalue of the time-domain operator pair.

    The operator A f(t) = (1/mu) f(t/mu) exp(-x t/mu) realizes the
    composition operator; its adjoint in the weighted inner product is
    A* g(u) = g(mu u) exp(-x u) w(mu u)/w(u).  Candidate eigenfunctions:

      side A*, x = 0:  t^alpha / w(t)              eigenvalue mu^alpha
      side A,  x > 0:  t^alpha exp(-beta t)        eigenvalue mu^-(alpha+1)
                       with beta = x/(mu-1), requires mu > 1
      side A*, x > 0:  t^alpha exp(-beta t)/w(t)   eigenvalue mu^alpha
                       with beta = x/(1-mu), requires mu < 1

    The eigen-identities are exact pointwise, so the returned relative
    grid-norm residual measures floating-point consistency only.  Raises
    for inadmissible alpha (candidate outside the space) or an
    incompatible (mu, x, side) combination.
    """
    if not (mu > 0 and math.isfinite(mu)) or mu == 1.0:
        raise ParameterError(f"mu: eigencheck needs mu > 0, mu != 1, got {mu}")
    if not (x >= 0 and math.isfinite(x)):
        raise ParameterError(f"x: must be a real >= 0, got {x}")
    if side not in (SIDE_A, SIDE_A_STAR):
        raise ParameterError(f"side: must be 'A' or 'A*', got {side!r}")
    alpha = complex(alpha)
    a = alpha.real
    t = np.asarray(grid.nodes, dtype=float)
    qw = np.asarray(grid.quad_weights, dtype=float)
    wt = w(t)

    if x == 0:
        if side != SIDE_A_STAR:
            raise ParameterError(
                "side: with x = 0 only the adjoint-side check (side='A*') "
                "has a power eigenfunction")
        rng = eigen_admissible_alphas(w)
        if a not in rng:
            raise ParameterError(
                f"alpha: Re alpha = {a} outside the admissible open interval "
                f"({rng.lower}, {rng.upper})")

        def f(tt):
            return np.exp(alpha * np.log(tt)) / w(tt)
        eigenvalue = complex(mu) ** alpha
        op = f(mu * t) * (w(mu * t) / wt)
    elif side == SIDE_A:
        if not mu > 1:
            raise ParameterError(
                f"mu: side 'A' with x > 0 needs mu > 1 (beta = x/(mu-1) > 0), "
                f"got mu = {mu}")
        beta = x / (mu - 1.0)
        if not a > -(1.0 + w.e0) / 2.0:
            raise ParameterError(
                f"alpha: Re alpha = {a} must exceed {-(1.0 + w.e0) / 2.0} for "
                "square-integrability near 0")

        def f(tt):
            return np.exp(alpha * np.log(tt) - beta * tt)
        eigenvalue = complex(mu) ** (-(alpha + 1.0))
        op = (1.0 / mu) * f(t / mu) * np.exp(-x * t / mu)
    else:
        if not mu < 1:
            raise ParameterError(
                f"mu: side 'A*' with x > 0 needs mu < 1 (beta = x/(1-mu) > 0), "
                f"got mu = {mu}")
        beta = x / (1.0 - mu)
        if not a > (w.e0 - 1.0) / 2.0:
            raise ParameterError(
                f"alpha: Re alpha = {a} must exceed {(w.e0 - 1.0) / 2.0} for "
                "square-integrability near 0")

        def f(tt):
            return np.exp(alpha * np.log(tt) - beta * tt) / w(tt)
        eigenvalue = complex(mu) ** alpha
        op = f(mu * t) * np.exp(-x * t) * (w(mu * t) / wt)

    fv = f(t)
    norm_f = math.sqrt(float(np.sum(np.abs(fv) ** 2 * wt * qw)))
    if norm_f == 0.0:
        raise ParameterError("grid: candidate eigenfunction vanishes on the grid")
    resid = math.sqrt(float(np.sum(np.abs(op - eigenvalue * fv) ** 2 * wt * qw)))
    return eigenvalue, resid / norm_f
