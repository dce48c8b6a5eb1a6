"""Independent numerical verification on the Laplace-transform side.

Nothing in this module trusts the closed-form results elsewhere in the
package: operators are realized as dense matrices on geometric grids, norms
come from power iteration in the weighted inner product, reproducing-kernel
norms from adaptive quadrature, and the Laplace isometry from a tensor
quadrature over the frequency half-plane.  Agreement with the analytic
formulas is what the test suite certifies.

Grids are geometric (t_j = t_min * q^j) with quadrature weights
t_j * log q, the trapezoid rule in log t for integrands decaying at both
ends.  Uniform log-weights keep the discrete measure exactly
dilation-covariant, which is what makes the dilation matrices below
(scaled permutation) x (diagonal) with no interpolation error: grids are
built commensurately, q**k = mu, so t_j / mu is again a node.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from ._numerics import linexp_transform, linexp_transform_tensor
from .errors import ConvergenceFailure, ParameterError
from .symbols import AffineSymbol
from .weights import PowerDensity, TabulatedDensity, Weight, ZenMeasure

TAG_DILATION = "B_phi"
TAG_ADJOINT = "A_star"
TAG_MULTIPLICATION = "multiplication"


def _seed() -> int:
    try:
        return int(os.environ.get("ZENSPEC_SEED", "0"))
    except ValueError:
        return 0


# --------------------------------------------------------------------------
# grids and grid functions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LogGrid:
    """Geometric grid t_j = t_min * q^j with log-trapezoid weights.

    When built commensurately with a dilation factor mu, ``k`` records the
    exact integer with mu = q**k, so scaling by mu is an index shift.
    """
    q: float
    nodes: np.ndarray
    quad_weights: np.ndarray
    mu: Optional[float] = None
    k: Optional[int] = None

    @property
    def t_min(self) -> float:
        return float(self.nodes[0])

    @property
    def t_max(self) -> float:
        return float(self.nodes[-1])

    def __len__(self) -> int:
        return len(self.nodes)


def build_grid(t_min: float, t_max: float, mu: Optional[float] = None,
               points_per_octave: int = 8) -> LogGrid:
    """Build a geometric grid on [t_min, t_max].

    With ``mu`` given the ratio is q = mu^(1/k) for
    k = round(points_per_octave * log2(mu)), so the grid is closed under
    scaling by mu within its range (k < 0 simply means mu < 1).
    """
    if not (0 < t_min < t_max):
        raise ParameterError(
            f"grid: need 0 < t_min < t_max, got ({t_min}, {t_max})")
    if not points_per_octave >= 1:
        raise ParameterError(
            f"points_per_octave: must be >= 1, got {points_per_octave}")
    k = None
    if mu is not None:
        if not (mu > 0 and mu != 1.0):
            raise ParameterError(f"mu: commensurate grids need mu > 0, mu != 1, got {mu}")
        k = round(points_per_octave * math.log2(mu))
        if k == 0:
            raise ParameterError(
                "points_per_octave: too coarse for this mu (k rounded to 0)")
        log_q = math.log(mu) / k
    else:
        log_q = math.log(2.0) / points_per_octave
    steps = math.log(t_max / t_min) / log_q
    n_steps = int(math.ceil(steps - 1e-9))
    if n_steps < 1:
        raise ParameterError("grid: fewer than two nodes; widen the range")
    nodes = np.exp(math.log(t_min) + log_q * np.arange(n_steps + 1))
    weights = nodes * log_q
    return LogGrid(q=math.exp(log_q), nodes=nodes, quad_weights=weights,
                   mu=mu, k=k)


@dataclass(frozen=True)
class GridFunction:
    """Complex-valued samples on a LogGrid."""
    grid: LogGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.nodes.shape:
            raise ParameterError("values: length must match the grid")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: LogGrid, fn: Callable) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=complex))


def load_grid_function(path: str) -> GridFunction:
    """Read a grid function from CSV rows (t, re, im); t must be geometric."""
    ts, vals = [], []
    try:
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#") or row[0] == "t":
                    continue
                ts.append(float(row[0]))
                vals.append(complex(float(row[1]),
                                    float(row[2]) if len(row) > 2 else 0.0))
    except (OSError, ValueError, IndexError) as exc:
        raise ParameterError(f"grid function file {path!r}: {exc}")
    t = np.asarray(ts)
    if len(t) < 2 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ParameterError("grid function file: need increasing positive t")
    ratios = t[1:] / t[:-1]
    q = float(np.exp(np.mean(np.log(ratios))))
    if np.max(np.abs(ratios / q - 1.0)) > 1e-9:
        raise ParameterError("grid function file: t values are not geometric")
    grid = LogGrid(q=q, nodes=t, quad_weights=t * math.log(q))
    return GridFunction(grid, np.asarray(vals))


def grid_norm(f: GridFunction, w: Weight) -> float:
    """Weighted L2 norm of a grid function by the grid quadrature."""
    wt = w(f.grid.nodes)
    return math.sqrt(float(np.sum(np.abs(f.values) ** 2 * wt
                                  * f.grid.quad_weights)))


# --------------------------------------------------------------------------
# operator discretization
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorMatrix:
    """Dense matrix realization of a time-domain operator on a grid."""
    matrix: np.ndarray
    grid: LogGrid
    tag: str


def _check_weight_on_grid(w: Weight, grid: LogGrid) -> np.ndarray:
    wt = np.asarray(w(grid.nodes), dtype=float)
    if np.any(~np.isfinite(wt)) or np.any(wt <= 0):
        raise ParameterError("weight: evaluation failed on the grid")
    return wt


def _commensurate_k(phi: AffineSymbol, grid: LogGrid) -> int:
    if grid.mu is None or abs(grid.mu - phi.mu) > 1e-12 * phi.mu:
        raise ParameterError(
            "grid: not commensurate with mu; build it with build_grid(..., "
            f"mu={phi.mu})")
    return grid.k


def discretize(phi: AffineSymbol, w: Weight, grid: LogGrid) -> OperatorMatrix:
    """Matrix of the time-domain operator for the symbol mu*s + x.

    The operator acts by (M f)(t_j) = (1/mu) f(t_j/mu) exp(-x t_j/mu);
    on a mu-commensurate grid t_j/mu is the node k places down, so the
    matrix is a scaled permutation times a diagonal, with reads outside
    [t_min, t_max] truncated to 0.  The parabolic case mu = 1 is the
    diagonal multiplication by exp(-s0 t_j) and accepts complex s0;
    hyperbolic symbols must have real s0 (reduce them first).
    """
    _check_weight_on_grid(w, grid)
    n = len(grid)
    if phi.mu == 1.0:
        m = np.diag(np.exp(-phi.s0 * grid.nodes)).astype(complex)
        tag = TAG_MULTIPLICATION
        return OperatorMatrix(m, grid, tag)
    if phi.s0.imag != 0.0:
        raise ParameterError(
            "s0: discretization needs real s0 for mu != 1; strip the "
            "imaginary part with symbols.reduce first")
    k = _commensurate_k(phi, grid)
    x = phi.x
    m = np.zeros((n, n), dtype=complex)
    for j in range(n):
        i = j - k
        if 0 <= i < n:
            # t_j / mu is exactly the node i = j - k
            m[j, i] = (1.0 / phi.mu) * math.exp(-x * float(grid.nodes[i]))
    return OperatorMatrix(m, grid, TAG_DILATION)


def discretize_adjoint(phi: AffineSymbol, w: Weight, grid: LogGrid) -> OperatorMatrix:
    """Matrix of the adjoint action g(u) -> g(mu u) exp(-x u) w(mu u)/w(u)."""
    wt = _check_weight_on_grid(w, grid)
    n = len(grid)
    if phi.mu == 1.0:
        m = np.diag(np.exp(-np.conjugate(phi.s0) * grid.nodes)).astype(complex)
        return OperatorMatrix(m, grid, TAG_ADJOINT)
    if phi.s0.imag != 0.0:
        raise ParameterError(
            "s0: discretization needs real s0 for mu != 1; strip the "
            "imaginary part with symbols.reduce first")
    k = _commensurate_k(phi, grid)
    x = phi.x
    m = np.zeros((n, n), dtype=complex)
    for j in range(n):
        i = j + k
        if 0 <= i < n:
            m[j, i] = math.exp(-x * float(grid.nodes[j])) * wt[i] / wt[j]
    return OperatorMatrix(m, grid, TAG_ADJOINT)


def operator_norm(op: OperatorMatrix, w: Weight, *, rtol: float = 1e-8,
                  max_iter: int = 10000) -> float:
    """Largest singular value in the w-weighted discrete inner product.

    Power iteration on M*M, where the adjoint is taken with respect to
    <f, g> = sum f_j conj(g_j) w(t_j) quad_j.  The start vector is the
    coordinate direction with the largest Rayleigh quotient plus a small
    seeded perturbation (ZENSPEC_SEED), which makes the iteration converge
    immediately on the exactly-diagonal M*M produced by commensurate
    dilation grids.
    """
    m = op.matrix
    d = _check_weight_on_grid(w, op.grid) * np.asarray(op.grid.quad_weights)

    def apply_mstar_m(v: np.ndarray) -> np.ndarray:
        y = m @ v
        return (m.conj().T @ (d * y)) / d

    col_rayleigh = (np.abs(m) ** 2).T @ d / d
    j_star = int(np.argmax(col_rayleigh))
    rng = np.random.default_rng(_seed())
    v = 1e-6 * (rng.standard_normal(len(d)) + 1j * rng.standard_normal(len(d)))
    v[j_star] += 1.0
    v = v / math.sqrt(float(np.real(np.vdot(v, d * v))))
    sigma_prev = -1.0
    for _ in range(max_iter):
        y = m @ v
        num = float(np.real(np.vdot(y, d * y)))
        den = float(np.real(np.vdot(v, d * v)))
        sigma = math.sqrt(max(num, 0.0) / den)
        if sigma == 0.0:
            return 0.0
        if abs(sigma - sigma_prev) <= rtol * sigma:
            return sigma
        sigma_prev = sigma
        bv = apply_mstar_m(v)
        norm_bv = math.sqrt(float(np.real(np.vdot(bv, d * bv))))
        if norm_bv == 0.0:
            return sigma
        v = bv / norm_bv
    raise ConvergenceFailure(
        f"operator norm: power iteration did not reach rtol={rtol} in "
        f"{max_iter} iterations")


# --------------------------------------------------------------------------
# reproducing kernels
# --------------------------------------------------------------------------

def kernel_norm(lam: complex, w: Weight) -> float:
    """Norm of the reproducing kernel exp(-conj(lam) t)/w(t).

    Equals (integral_0^oo exp(-2 Re lam t)/w(t) dt)^(1/2); adaptive
    quadrature split at t = 1 with the tail beyond t = 50/Re lam handled
    by one more panel (its contribution is below e^-100 relatively).
    Requires Re lam > 0 and integrability of 1/w at 0, i.e. e0 < 1.
    """
    lam = complex(lam)
    x = lam.real
    if not x > 0:
        raise ParameterError(f"lam: kernel norms need Re lam > 0, got {lam}")
    if not w.e0 < 1.0:
        raise ParameterError(
            f"weight: kernel norm diverges at 0 for e0 = {w.e0} >= 1")

    def integrand(t: float) -> float:
        return math.exp(-2.0 * x * t) / w(t)

    cut = 50.0 / x
    pts = sorted({min(1.0, cut), cut, cut * 1.4})
    total = 0.0
    lo = 0.0
    for hi in pts:
        if hi > lo:
            val, _ = quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-10, limit=200)
            total += val
            lo = hi
    return math.sqrt(total)


def kernel_weak_null_check(w: Weight, n_list: Sequence[float],
                           g: GridFunction) -> list[float]:
    """|<k_n/|k_n|, g>| for kernels at real points n; should decay to 0.

    The weight cancels in the pairing: <k_n, g> = integral exp(-n t)
    conj(g(t)) dt, evaluated by the grid quadrature.
    """
    ns = list(n_list)
    if any(n <= 0 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ParameterError("n_list: need increasing positive values")
    t = g.grid.nodes
    qw = g.grid.quad_weights
    out = []
    for n in ns:
        pairing = complex(np.sum(np.exp(-n * t) * np.conjugate(g.values) * qw))
        out.append(abs(pairing) / kernel_norm(n, w))
    return out


# --------------------------------------------------------------------------
# Laplace transform and the isometry check
# --------------------------------------------------------------------------

def laplace_transform(f: GridFunction, s) -> np.ndarray:
    """(L f)(s) = integral f(t) exp(-s t) dt for the piecewise-linear f.

    Exact per segment, so the accuracy is uniform in Im s instead of
    degrading when the oscillation outruns the node spacing.  Accepts
    scalar or any-shape arrays of s with Re s >= 0.
    """
    s_in = np.asarray(s, dtype=complex)
    flat = s_in.reshape(-1)
    out = np.empty(flat.shape, dtype=complex)
    chunk = max(1, int(2e6 / max(len(f.grid) - 1, 1)))
    for i in range(0, len(flat), chunk):
        out[i:i + chunk] = linexp_transform(f.grid.nodes, f.values,
                                            flat[i:i + chunk])
    if s_in.ndim == 0:
        return complex(out[0])
    return out.reshape(s_in.shape)


@dataclass(frozen=True)
class IsometryResult:
    time_norm: float
    frequency_norm: float
    relative_error: float


def _freq_line_integrals(f: GridFunction, xs, *, dy: float, y_core: float,
                         y_ratio: float, rel_tail: float) -> np.ndarray:
    """integral over y of |Lf(x + i y)|^2 for a whole batch of x at once.

    Symmetric truncated rule: dense uniform core plus shared geometric
    extension blocks; the extension stops once the asymptotic tail
    estimate F(Y)*Y (valid for the O(1/y) decay of Lf) drops below
    rel_tail of the accumulated integral for every x, and that estimate
    is then added.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    nodes, vals_f = f.grid.nodes, f.values
    # resolution in y only has to resolve oscillations exp(-i y t) over the
    # t-range where |f(t)| exp(-x t) is non-negligible; at large x that
    # range shrinks and the y-grid can coarsen accordingly
    with np.errstate(under="ignore"):
        env = np.abs(vals_f)[None, :] * np.exp(-np.outer(xs, nodes))
    env_max = float(env.max())
    if env_max == 0.0:
        return np.zeros(len(xs))
    alive = np.any(env >= 1e-7 * env_max, axis=0)
    t_eff = float(nodes[alive].max())
    dy = min(max(dy, 0.35 / t_eff), y_core / 40.0)
    # real f gives |Lf(x-iy)| = |Lf(x+iy)|: integrate y >= 0 and double
    symmetric = bool(np.all(vals_f.imag == 0.0))
    if symmetric:
        core = np.linspace(0.0, y_core, int(round(y_core / dy)) + 1)
        vals = np.abs(linexp_transform_tensor(nodes, vals_f, xs, core)) ** 2
        acc = 2.0 * np.trapezoid(vals, core, axis=1)
        edge = 2.0 * vals[:, -1]
    else:
        core = np.linspace(-y_core, y_core, 2 * int(round(y_core / dy)) + 1)
        vals = np.abs(linexp_transform_tensor(nodes, vals_f, xs, core)) ** 2
        acc = np.trapezoid(vals, core, axis=1)
        edge = vals[:, -1] + vals[:, 0]
    y = y_core
    while True:
        tail = 0.5 * edge * y
        if np.all(tail <= rel_tail * np.maximum(acc, 1e-300)) or y > 1e9:
            return acc + tail
        block = np.concatenate([[y], y * y_ratio ** np.arange(1, 49)])
        plus = np.abs(linexp_transform_tensor(nodes, vals_f, xs, block)) ** 2
        if symmetric:
            acc = acc + 2.0 * np.trapezoid(plus, block, axis=1)
            edge = 2.0 * plus[:, -1]
        else:
            minus = np.abs(linexp_transform_tensor(nodes, vals_f, xs, -block)) ** 2
            acc = acc + np.trapezoid(plus + minus, block, axis=1)
            edge = plus[:, -1] + minus[:, -1]
        y = float(block[-1])


def laplace_isometry_check(f: GridFunction, measure: ZenMeasure, w: Weight,
                           *, dy: float = 0.025, y_core: float = 6.0,
                           y_ratio: float = 1.08, rel_tail: float = 1e-6,
                           x_per_octave: int = 10,
                           x_head: float = 1e-3) -> IsometryResult:
    """Cross-check the isometry between the time and frequency norms.

    time side:  |f|^2 integrated against w(t) dt on the grid, with w the
    synthesized weight of ``measure`` (2*pi convention included);
    frequency side: |Lf(x+iy)|^2 integrated in y along vertical lines and
    in x against the measure (atoms exactly, densities by log-grid
    quadrature with an analytic head below ``x_head`` and an adaptive
    tail).  Returns both norms and their relative difference.
    """
    t = f.grid.nodes
    qw = f.grid.quad_weights
    wt = np.asarray(w(t), dtype=float)
    summand = np.abs(f.values) ** 2 * wt * qw
    if not np.any(summand > 0):
        return IsometryResult(0.0, 0.0, 0.0)
    peak = float(np.max(summand))
    if summand[0] > 0.05 * peak or summand[-1] > 0.05 * peak:
        raise ParameterError(
            "f: |f|^2 w t does not decay within the grid range; the norms "
            "may diverge (widen the grid or check membership in the space)")
    time_sq = float(np.sum(summand))

    def lines(xs) -> np.ndarray:
        return _freq_line_integrals(f, xs, dy=dy, y_core=y_core,
                                    y_ratio=y_ratio, rel_tail=rel_tail)

    def log_tail_quad(u_start: float, integrand_at) -> float:
        """Accumulate integral of line(x)*density(x) dx from exp(u_start) on.

        Works in u = log x with batches of two octaves, stopping once a
        batch contributes less than rel_tail of the accumulated total.
        """
        log_step = math.log(2.0) / x_per_octave
        batch = 2 * x_per_octave
        acc = 0.0
        u_cur = u_start
        g_prev = float(integrand_at(np.array([math.exp(u_start)]))[0])
        while True:
            us = u_cur + log_step * np.arange(1, batch + 1)
            gs = integrand_at(np.exp(us))
            g_all = np.concatenate([[g_prev], gs])
            contrib = float(np.trapezoid(g_all, dx=log_step))
            acc += contrib
            g_prev = float(gs[-1])
            u_cur = float(us[-1])
            if contrib <= rel_tail * max(acc, 1e-300) or u_cur > math.log(1e9):
                return acc

    freq_sq = 0.0
    if measure.atoms:
        atom_lines = lines([r for r, _ in measure.atoms])
        freq_sq += float(sum(mass * atom_lines[i]
                             for i, (_, mass) in enumerate(measure.atoms)))
    density = measure.density
    if density is not None:
        if isinstance(density, PowerDensity):
            c, alpha = density.coeff, density.alpha
            head_line = float(lines([x_head])[0])
            # analytic head: line(x) is continuous at 0, freeze it below x_head
            freq_sq += head_line * c * x_head ** (alpha + 1.0) / (alpha + 1.0)
            freq_sq += log_tail_quad(
                math.log(x_head),
                lambda xs: lines(xs) * c * xs ** (alpha + 1.0))
        else:
            rs, vs = density.r, density.v
            keep = rs > 0
            xs, dens = rs[keep], vs[keep]
            if len(xs):
                sample_lines = lines(xs)
                if rs[0] == 0.0:
                    # panel [0, first positive sample], density from value at 0
                    lo_line = float(lines([xs[0] * 1e-3])[0])
                    freq_sq += 0.5 * (vs[0] * lo_line
                                      + dens[0] * sample_lines[0]) * xs[0]
                if len(xs) >= 2:
                    freq_sq += float(np.trapezoid(sample_lines * dens, xs))
                # power-law tail beyond the samples
                e = density.tail_exponent
                rmax, vmax = float(rs[-1]), float(vs[-1])
                if vmax > 0:
                    freq_sq += log_tail_quad(
                        math.log(rmax),
                        lambda z: lines(z) * vmax * (z / rmax) ** e * z)
    time_norm = math.sqrt(time_sq)
    freq_norm = math.sqrt(freq_sq)
    denom = max(time_norm, freq_norm)
    rel = abs(time_norm - freq_norm) / denom if denom > 0 else 0.0
    return IsometryResult(time_norm, freq_norm, rel)
