"""Shared low-level numerical kernels.

The piecewise-linear exponential transform here is the workhorse for both
weight synthesis from tabulated densities and the frequency-side Laplace
evaluation in the oracle: it integrates (linear interpolant) x exp(-s r)
segment by segment in closed form, so its accuracy does not degrade when
exp(-s r) oscillates faster than the node spacing.
"""

from __future__ import annotations

import numpy as np

# Below this |theta| the closed forms for phi1/phi2 lose digits to
# cancellation; a 5-term series is accurate to ~1e-12 there.
_SERIES_CUTOFF = 1e-2


def _phi12(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """phi1 = (1-e^-t)/t and phi2 = (1-(1+t)e^-t)/t^2, stable near t=0."""
    small = np.abs(theta) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, theta)
    with np.errstate(over="ignore", invalid="ignore"):
        et = np.exp(-safe)
        p1 = (1.0 - et) / safe
        p2 = (1.0 - (1.0 + safe) * et) / (safe * safe)
    t = theta
    s1 = 1.0 - t / 2.0 + t**2 / 6.0 - t**3 / 24.0 + t**4 / 120.0
    s2 = 0.5 - t / 3.0 + t**2 / 8.0 - t**3 / 30.0 + t**4 / 144.0
    return np.where(small, s1, p1), np.where(small, s2, p2)


def linexp_transform(r_nodes: np.ndarray, values: np.ndarray, s) -> np.ndarray:
    """Integrate the piecewise-linear interpolant of ``values`` against e^{-s r}.

    Parameters
    ----------
    r_nodes : increasing 1-D array of abscissae.
    values : function values at the nodes (real or complex).
    s : scalar or array of transform arguments with Re s >= 0.

    Returns
    -------
    Array of integrals over [r_nodes[0], r_nodes[-1]], one per entry of s.
    """
    r = np.asarray(r_nodes, dtype=float)
    f = np.asarray(values)
    s_arr = np.atleast_1d(np.asarray(s))
    h = np.diff(r)
    fa, fb = f[:-1], f[1:]
    theta = s_arr[..., None] * h
    p1, p2 = _phi12(theta)
    with np.errstate(over="ignore", under="ignore"):
        head = np.exp(-s_arr[..., None] * r[:-1])
    seg = head * h * (fa * p1 + (fb - fa) * p2)
    out = seg.sum(axis=-1)
    if np.isscalar(s) or np.asarray(s).ndim == 0:
        return out[0]
    return out


def geometric_nodes(lo: float, hi: float, per_decade: int = 32) -> np.ndarray:
    """Log-spaced nodes covering [lo, hi] at a fixed density per decade."""
    decades = np.log10(hi / lo)
    n = max(2, int(np.ceil(decades * per_decade)) + 1)
    return np.geomspace(lo, hi, n)


def linexp_transform_tensor(r_nodes: np.ndarray, values: np.ndarray,
                            x: np.ndarray, y: np.ndarray,
                            chunk_elems: float = 4e6) -> np.ndarray:
    """Same integral as :func:`linexp_transform` on the grid s = x + i y.

    Exploits exp(-(x+iy) r) = exp(-x r) * exp(-i y r): the expensive
    exponentials are computed on the two axes separately and combined by
    broadcasting, which makes large (x, y) tensors affordable.  Returns an
    (len(x), len(y)) complex array, chunked along y to bound memory.
    """
    r = np.asarray(r_nodes, dtype=float)
    f = np.asarray(values)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h = np.diff(r)
    fa, fb = f[:-1], f[1:]
    n_int = len(h)
    with np.errstate(under="ignore"):
        xr = np.exp(-np.outer(x, r[:-1]))
        xh = np.exp(-np.outer(x, h))
    out = np.empty((len(x), len(y)), dtype=complex)
    slab = max(1, int(chunk_elems / max(len(x) * n_int, 1)))
    for j0 in range(0, len(y), slab):
        ys = y[j0:j0 + slab]
        yr = np.exp(-1j * np.outer(ys, r[:-1]))
        yh = np.exp(-1j * np.outer(ys, h))
        theta = (x[:, None, None] + 1j * ys[None, :, None]) * h
        eth = xh[:, None, :] * yh[None, :, :]
        small = np.abs(theta) < _SERIES_CUTOFF
        safe = np.where(small, 1.0, theta)
        p1 = (1.0 - eth) / safe
        p2 = (1.0 - (1.0 + safe) * eth) / (safe * safe)
        if np.any(small):
            # series only on the (few) near-zero entries
            t = theta[small]
            p1[small] = 1.0 - t / 2.0 + t**2 / 6.0 - t**3 / 24.0 + t**4 / 120.0
            p2[small] = 0.5 - t / 3.0 + t**2 / 8.0 - t**3 / 30.0 + t**4 / 144.0
        head = xr[:, None, :] * yr[None, :, :]
        seg = head * (h * (fa * p1 + (fb - fa) * p2))
        out[:, j0:j0 + slab] = seg.sum(axis=-1)
    return out
