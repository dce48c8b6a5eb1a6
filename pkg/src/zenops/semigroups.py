"""One-parameter flows of affine self-maps and their composition operators.

An affine generator G(z) = p*z + p*alpha (or the constant G(z) = alpha
when p = 0) integrates in closed form to the flow

    phi_t(s) = e^{pt} s + alpha (e^{pt} - 1)     (p != 0)
    phi_t(s) = s + alpha t                       (p = 0),

each phi_t an affine self-map of the right half-plane when the sign
constraints on (p, Re alpha) hold.  The angular limit delta of G(z)/z is
p, and the flow's angular derivative is L_t = e^{-delta t}, which reduces
semigroup norm bounds to the single-operator bounds.  Flows with purely
imaginary alpha extend to groups (negative times remain self-maps).  The
Berkson-Porta inequality x * d(Re G)/dx <= Re G on the right half-plane,
checked here by central finite differences, characterizes generators of
such self-map semigroups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError
from .norms import norm_bounds
from .spectra import SpectralSet, predict_spectrum
from .symbols import AffineSymbol
from .weights import Weight

GROUP = "group"
SEMIGROUP_ONLY = "semigroup-only"


@dataclass(frozen=True)
class AffineGenerator:
    """G(z) = p*z + p*alpha for p != 0, or the constant alpha for p = 0."""
    p: float
    alpha: complex

    def __post_init__(self) -> None:
        p = float(self.p)
        alpha = complex(self.alpha)
        if not math.isfinite(p):
            raise ParameterError(f"p: must be a finite real, got {self.p}")
        if p > 0 and alpha.real < 0:
            raise ParameterError(
                "alpha: p > 0 needs Re alpha >= 0 for the flow to stay in "
                "the half-plane")
        if p < 0 and alpha.real > 0:
            raise ParameterError(
                "alpha: p < 0 needs Re alpha <= 0 for the flow to stay in "
                "the half-plane")
        if p == 0 and alpha.real < 0:
            raise ParameterError(
                "alpha: p = 0 needs Re alpha >= 0 (translation flows move "
                "rightward)")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "alpha", alpha)

    def __call__(self, z: complex) -> complex:
        if self.p == 0:
            return self.alpha
        return self.p * z + self.p * self.alpha

    def to_dict(self) -> dict:
        return {"p": self.p, "alpha": [self.alpha.real, self.alpha.imag]}

    @classmethod
    def from_dict(cls, data: dict) -> "AffineGenerator":
        return cls(data["p"], complex(data["alpha"][0], data["alpha"][1]))


def flow(gen: AffineGenerator, t: float) -> AffineSymbol:
    """The time-t map of the flow; t = 0 gives the identity symbol."""
    if not (t >= 0 and math.isfinite(t)):
        raise ParameterError(f"t: flows are defined for t >= 0, got {t}")
    if gen.p == 0:
        return AffineSymbol(1.0, gen.alpha * t)
    growth = math.expm1(gen.p * t)  # e^{pt} - 1, exact near t = 0
    s_t = gen.alpha * growth
    if s_t.real < 0:
        # sign constraints make Re s_t >= 0; clip rounding noise
        s_t = complex(0.0, s_t.imag)
    return AffineSymbol(math.exp(gen.p * t), s_t, log_mu=gen.p * t)


def delta(gen: AffineGenerator) -> float:
    """Angular limit of G(z)/z at infinity: p, and 0 for constant G."""
    return gen.p


def classify_group(gen: AffineGenerator) -> str:
    """'group' when every flow map is invertible within the half-plane.

    That happens exactly when Re alpha = 0, i.e. G(z) = p*z + i*q with
    real p, q (or a purely imaginary translation when p = 0); then
    phi_{-t} is again a self-map.
    """
    return GROUP if gen.alpha.real == 0 else SEMIGROUP_ONLY


def inverse_generator(gen: AffineGenerator) -> AffineGenerator:
    """Generator of the time-reversed flow; valid only for groups."""
    if classify_group(gen) != GROUP:
        raise ParameterError(
            "alpha: only flows with Re alpha = 0 invert to flows; this one "
            "is semigroup-only")
    return AffineGenerator(-gen.p, gen.alpha)


def semigroup_norm_bounds(w: Weight, gen: AffineGenerator,
                          t: float) -> tuple[float, float]:
    """Bounds on the squared operator norm along the flow.

    The flow's angular derivative is L_t = e^{-delta t}, so this is the
    single-operator sandwich at L_t.  For the constant weight the two
    sides meet at e^{-delta t} (norm e^{-delta t/2}); for the Bergman
    weight 1/t they meet at e^{-2 delta t}.
    """
    if not (t >= 0 and math.isfinite(t)):
        raise ParameterError(f"t: need t >= 0, got {t}")
    return norm_bounds(w, math.exp(-delta(gen) * t))


def semigroup_spectrum(w: Weight, gen: AffineGenerator, t: float) -> SpectralSet:
    """Spectrum of the time-t composition operator.

    Delegates to the single-operator prediction on the flowed symbol,
    branching on (mu_t, Re s_t): dilation flows with Re alpha = 0 give
    annuli on the Hardy-Bergman weight, Re s_t > 0 gives discs, and
    translation flows give spiral closures.
    """
    if not t > 0:
        raise ParameterError(f"t: need t > 0, got {t}")
    return predict_spectrum(w, flow(gen, t))


def berkson_porta_check(G: Callable[[complex], complex],
                        grid: tuple[Sequence[float], Sequence[float]],
                        tol: float = 1e-9) -> tuple[bool, float, complex]:
    """Check x * d(Re G)/dx <= Re G on a rectangular half-plane grid.

    ``grid`` is a pair (xs, ys) of strictly positive abscissae and real
    ordinates.  The x-derivative is a central difference with step
    h = x * 1e-5, which keeps the stencil inside the half-plane and the
    cancellation error uniform across scales.  Returns (holds, worst
    margin, witness point); the condition holds when the margin
    Re G - x * d(Re G)/dx stays above -tol everywhere.
    """
    xs, ys = grid
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0 or ys.size == 0 or np.any(xs <= 0):
        raise ParameterError("grid: needs nonempty xs > 0 and ys")
    worst = math.inf
    witness = complex(xs[0], ys[0])
    for x in xs:
        h = x * 1e-5
        for y in ys:
            z = complex(x, y)
            try:
                g0 = complex(G(z)).real
                dre = (complex(G(z + h)).real - complex(G(z - h)).real) / (2 * h)
            except Exception as exc:
                raise ParameterError(f"G: sampler failed at {z}: {exc}")
            margin = g0 - x * dre
            if margin < worst:
                worst = margin
                witness = z
    return worst >= -tol, worst, witness
