"""Monte Carlo for the limit objects of the likelihood ratio statistic.

Paths of ``X(t) = a W(t) + b t^2`` (two-sided Brownian motion ``W`` from
zero) are sampled on the grid ``-c, -c+h, ..., c``. Slope processes are
the left slopes of the greatest convex minorant of the path over the whole
grid and, for the constrained version, over ``[-c, 0]`` and ``[0, c]``
separately with slopes truncated at zero. The statistic ``D`` is the grid
integral of the difference of their squares; ``Z`` is the location of the
minimum of ``W(t) + t^2``.

Replicate ``r`` of a batch draws from its own substream
``SeedSequence(seed, spawn_key=(r,))``, so results do not depend on the
chunking or the number of threads.
"""

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryWarning, ValidationError
from .isotonic import monotone_slopes
from .kernels import d_statistic_batch

DEFAULT_GRID = {"D": (6.0, 0.01), "Z": (4.0, 0.005)}


@dataclass(frozen=True, eq=False)
class PathGrid:
    """A sampled path on the grid ``-c, -c+h, ..., c``; ``values[k] = 0``
    at the middle index when the parabola vanishes there."""

    half_width: float
    step: float
    values: np.ndarray
    a: float = 1.0
    b: float = 1.0

    @property
    def k(self):
        return (self.values.size - 1) // 2

    @property
    def t(self):
        return self.step * np.arange(-self.k, self.k + 1)


@dataclass(frozen=True, eq=False)
class SlopePair:
    """Unconstrained and constrained slopes per grid cell.

    ``cell_right[j]`` is the right end of cell j; the slope on that cell is
    the left slope of the minorant (or majorant) at ``cell_right[j]``.
    """

    cell_right: np.ndarray
    unconstrained_slopes: np.ndarray
    constrained_slopes: np.ndarray

    def statistic(self, step):
        g, g0 = self.unconstrained_slopes, self.constrained_slopes
        diff = g != g0
        return float(step * np.sum(g[diff] ** 2 - g0[diff] ** 2))


def _grid_size(c, h):
    if not (c > 0 and h > 0):
        raise ValidationError("grid half-width and step must be positive")
    k = round(c / h)
    if not math.isclose(k * h, c, rel_tol=1e-9):
        raise ValidationError(f"c/h must be an integer, got {c}/{h}")
    return int(k)


def path_rng(seed, r):
    """Generator for replicate ``r`` of a batch seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,)))


def _brownian(rng, k, h):
    # right and left halves from independent increments; W(0) = 0
    inc = rng.standard_normal(2 * k) * math.sqrt(h)
    right = np.cumsum(inc[:k])
    left = np.cumsum(inc[k:])[::-1]
    return np.concatenate([left, [0.0], right])


def sample_path(a=1.0, b=1.0, grid=DEFAULT_GRID["D"], seed=0, r=0):
    """Sample ``a W(t) + b t^2`` on the grid ``(c, h)``."""
    c, h = grid
    k = _grid_size(c, h)
    t = h * np.arange(-k, k + 1)
    w = _brownian(path_rng(seed, r), k, h)
    return PathGrid(float(c), float(h), a * w + b * t * t, float(a), float(b))


def _cell_split(path):
    dy = np.diff(path.values)
    return dy, np.full(dy.size, path.step), path.k


def slope_pair(path):
    """GCM slopes of the path and their constrained counterpart.

    The constrained slopes come from separate minorants left and right of
    zero, with ``min(., 0)`` applied on the left and ``max(., 0)`` on the
    right.
    """
    dy, dx, k = _cell_split(path)
    g = monotone_slopes(dy, dx)
    g0 = np.concatenate([np.minimum(monotone_slopes(dy[:k], dx[:k]), 0.0),
                         np.maximum(monotone_slopes(dy[k:], dx[k:]), 0.0)])
    return SlopePair(path.t[1:], g, g0)


def lcm_variants(path):
    """LCM slopes of a concave-type path ``a W - b t^2`` and the constrained
    version (``max(., 0)`` left of zero, ``min(., 0)`` right of it)."""
    dy, dx, k = _cell_split(path)
    g = monotone_slopes(dy, dx, decreasing=True)
    g0 = np.concatenate([
        np.maximum(monotone_slopes(dy[:k], dx[:k], decreasing=True), 0.0),
        np.minimum(monotone_slopes(dy[k:], dx[k:], decreasing=True), 0.0)])
    return SlopePair(path.t[1:], g, g0)


def statistic_D(path):
    """``h * sum (g^2 - g0^2)`` over grid cells where the slopes differ."""
    d, touches = d_statistic_batch(path.values[None, :], path.step)
    if touches[0]:
        warnings.warn("slope difference set reaches the grid edge; "
                      "increase the half-width", BoundaryWarning, stacklevel=2)
    return float(d[0])


def _argmin_sup(values):
    # largest index attaining the row minimum
    m = values.shape[-1]
    return m - 1 - np.argmin(values[..., ::-1], axis=-1)


def statistic_Z(path):
    """Grid location of the minimum of the path (largest minimizer)."""
    j = int(_argmin_sup(path.values))
    if j == 0 or j == path.values.size - 1:
        warnings.warn("argmin at the grid edge; increase the half-width",
                      BoundaryWarning, stacklevel=2)
    return float(path.t[j])


def thread_count(threads=None):
    if threads is None:
        threads = int(os.environ.get("MONOHAZ_THREADS", "0") or 0)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return max(1, int(threads))


def sample_paths(n_paths, grid=DEFAULT_GRID["D"], seed=0, a=1.0, b=1.0,
                 start=0):
    """Rows ``r = start .. start + n_paths - 1`` of ``a W(t) + b t^2``;
    row r equals ``sample_path(a, b, grid, seed, r).values``."""
    c, h = grid
    k = _grid_size(c, h)
    t = h * np.arange(-k, k + 1)
    out = np.empty((int(n_paths), 2 * k + 1))
    for i in range(int(n_paths)):
        out[i] = _brownian(path_rng(seed, start + i), k, h)
    if a != 1.0:
        out *= a
    out += b * t * t
    return out


def _paths_block(seed, start, stop, k, h):
    return sample_paths(stop - start, (k * h, h), seed, start=start)


def _run_chunks(fn, n_paths, chunk, threads):
    bounds = [(s, min(s + chunk, n_paths)) for s in range(0, n_paths, chunk)]
    if threads == 1 or len(bounds) == 1:
        parts = [fn(s, e) for s, e in bounds]
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    vals = np.concatenate([p[0] for p in parts])
    edge = int(sum(p[1] for p in parts))
    return vals, edge


def simulate_D(n_paths, c=6.0, h=0.01, seed=0, threads=None, chunk=2000):
    """Draws of D for paths ``0..n_paths-1``; returns ``(values, n_edge)``
    where ``n_edge`` counts paths whose difference set reached the edge."""
    k = _grid_size(c, h)

    def block(s, e):
        d, touches = d_statistic_batch(_paths_block(seed, s, e, k, h), h)
        return d, int(touches.sum())

    return _run_chunks(block, int(n_paths), chunk, thread_count(threads))


def simulate_Z(n_paths, c=4.0, h=0.005, seed=0, threads=None, chunk=2000):
    """Draws of Z; returns ``(values, n_edge)``."""
    k = _grid_size(c, h)

    def block(s, e):
        j = _argmin_sup(_paths_block(seed, s, e, k, h))
        edge = int(np.sum((j == 0) | (j == 2 * k)))
        return h * (j - k), edge

    return _run_chunks(block, int(n_paths), chunk, thread_count(threads))


@dataclass
class QuantileEstimate:
    target: str
    n_paths: int
    c: float
    h: float
    quantiles: dict
    batch_se: dict
    boundary_count: int = 0
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {"schema": "monohaz/1", "target": self.target,
                "n_paths": self.n_paths, "c": self.c, "h": self.h,
                "quantiles": {str(p): v for p, v in self.quantiles.items()},
                "batch_se": {str(p): v for p, v in self.batch_se.items()},
                "boundary_count": self.boundary_count, "seed": self.seed}

    @classmethod
    def from_dict(cls, d):
        return cls(d["target"], int(d["n_paths"]), float(d["c"]),
                   float(d["h"]),
                   {float(p): v for p, v in d["quantiles"].items()},
                   {float(p): v for p, v in d["batch_se"].items()},
                   int(d["boundary_count"]), d["seed"])


def batch_quantiles(values, probs, n_batches=100):
    """Linear-interpolation quantiles and their batch-means standard errors."""
    values = np.asarray(values, dtype=float)
    probs = [float(p) for p in probs]
    q = np.quantile(values, probs)
    batches = np.array_split(values, n_batches)
    per = np.array([np.quantile(b, probs) for b in batches if b.size])
    se = per.std(axis=0, ddof=1) / math.sqrt(per.shape[0]) \
        if per.shape[0] > 1 else np.full(len(probs), math.nan)
    return ({p: float(v) for p, v in zip(probs, q)},
            {p: float(v) for p, v in zip(probs, se)})


def estimate_quantiles(target, n_paths, probs=None, c=None, h=None, seed=0,
                       threads=None, n_batches=100):
    """Monte Carlo quantiles of D (default probability 0.95) or Z (0.975)."""
    if target not in DEFAULT_GRID:
        raise ValidationError(f"target must be 'D' or 'Z', got {target!r}")
    dc, dh = DEFAULT_GRID[target]
    c = dc if c is None else float(c)
    h = dh if h is None else float(h)
    if probs is None:
        probs = [0.95] if target == "D" else [0.975]
    if int(n_paths) < 2:
        raise ValidationError("need at least 2 paths")
    sim = simulate_D if target == "D" else simulate_Z
    vals, edge = sim(n_paths, c, h, seed, threads)
    if target == "D" and vals.min() < -1e-9:
        raise AssertionError(f"negative D draw {vals.min()}")
    if edge:
        warnings.warn(f"{edge} of {n_paths} paths reached the grid edge",
                      BoundaryWarning, stacklevel=2)
    q, se = batch_quantiles(vals, probs, n_batches)
    return QuantileEstimate(target, int(n_paths), c, h, q, se, edge, seed)
