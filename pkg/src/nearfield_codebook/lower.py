"""Lower-layer codebook: steering beams on equal-curvature distance rings.

Rings are indexed from 0. Ring 0 is the far field (``kappa = 0``); ring
``m >= 1`` sits at curvature ``m / delta`` in every column, i.e. at distance
``r = delta (1 - theta^2) / m``. Coverage cells are rectangles in
``(theta, kappa)`` bounded by midpoints to the neighbouring codewords.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .array import ArrayConfig, PolarPoint, steering_matrix
from .fresnel import steering_gain

logger = logging.getLogger(__name__)

SAME_TOL = 1e-9


@dataclass(frozen=True)
class LowerCodebookParams:
    rho: float
    delta: float
    n_theta: int
    n_r: int


@dataclass(frozen=True)
class CoverageRegion:
    theta_lo: float
    theta_hi: float
    kappa_lo: float
    kappa_hi: float

    @property
    def empty(self) -> bool:
        return not (self.theta_lo < self.theta_hi and self.kappa_lo < self.kappa_hi)

    def contains(self, theta: float, kappa: float) -> bool:
        return self.theta_lo <= theta <= self.theta_hi and self.kappa_lo <= kappa <= self.kappa_hi

    def corners(self) -> list[tuple[float, float]]:
        return [(t, k) for t in (self.theta_lo, self.theta_hi) for k in (self.kappa_lo, self.kappa_hi)]


def angle_grid(n_theta: int) -> np.ndarray:
    """``theta_l = -1 + (2l - 1) / n_theta`` for ``l = 1..n_theta``."""
    if n_theta < 1:
        raise ValueError(f"n_theta must be >= 1, got {n_theta}")
    return -1.0 + (2.0 * np.arange(1, n_theta + 1) - 1.0) / n_theta


def ring_curvatures(delta: float, n_r: int) -> np.ndarray:
    if n_r < 1:
        raise ValueError(f"n_r must be >= 1, got {n_r}")
    if n_r > 1 and not (delta > 0 and math.isfinite(delta)):
        raise ValueError(f"delta must be positive and finite for n_r > 1, got {delta!r}")
    return np.arange(n_r) / delta if n_r > 1 else np.zeros(1)


def sample_steering_points(cfg: ArrayConfig, n_theta: int, delta: float, n_r: int | None = None):
    """Steering grid ``(theta, ring_kappa, inside)``.

    ``n_r=None`` keeps every ring whose broadside distance is at least
    ``r_min``. ``inside[m, l]`` flags points that are not in the reactive zone.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    theta = angle_grid(n_theta)
    if n_r is None:
        n_r = 1 if math.isinf(delta) else int(math.floor(cfg.kappa_max * delta + 1e-12)) + 1
    kappa = ring_curvatures(delta, n_r)
    col_max = (1.0 - theta**2) / cfg.r_min
    inside = kappa[:, None] <= col_max[None, :]
    inside[0] = True
    return theta, kappa, inside


def boundary_theta(p1: PolarPoint, p2: PolarPoint) -> float:
    """Equal-gain boundary between two steering points on the same distance ring."""
    if abs(p1.kappa - p2.kappa) > SAME_TOL:
        raise ValueError("points are not on the same distance ring")
    return 0.5 * (p1.theta + p2.theta)


def boundary_kappa(p1: PolarPoint, p2: PolarPoint) -> float:
    """Equal-gain curvature between two steering points in the same direction."""
    if abs(p1.theta - p2.theta) > SAME_TOL:
        raise ValueError("points are not in the same direction")
    return 0.5 * (p1.kappa + p2.kappa)


class LowerCodebook:
    """``n_r x n_theta`` grid of quadratic-model steering codewords."""

    def __init__(self, cfg: ArrayConfig, params: LowerCodebookParams, truncate: bool = False):
        self.cfg = cfg
        self.params = params
        self.truncate = truncate
        self.theta = angle_grid(params.n_theta)
        self.ring_kappa = ring_curvatures(params.delta, params.n_r)
        self.column_kappa_max = (1.0 - self.theta**2) / cfg.r_min
        if truncate:
            active = self.ring_kappa[:, None] <= self.column_kappa_max[None, :]
            active[0] = True
        else:
            active = np.ones((params.n_r, params.n_theta), dtype=bool)
        self.active = active

    @property
    def shape(self) -> tuple[int, int]:
        return self.params.n_r, self.params.n_theta

    @property
    def size(self) -> int:
        return int(self.active.sum())

    @cached_property
    def weights(self) -> np.ndarray:
        """Codeword array of shape ``(n_r, n_theta, n_w)``; dropped cells are zero."""
        w = steering_matrix(self.cfg, self.theta[None, :], kappa=self.ring_kappa[:, None])
        w[~self.active] = 0
        return w

    @cached_property
    def indices(self) -> np.ndarray:
        """``(ring, angle)`` of every active codeword, ring-major order."""
        return np.argwhere(self.active)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Active codewords stacked as rows, in :attr:`indices` order."""
        return self.weights[self.active]

    def flat_index(self, ring: int, angle: int) -> int:
        pos = np.flatnonzero((self.indices[:, 0] == ring) & (self.indices[:, 1] == angle))
        if pos.size == 0:
            raise IndexError(f"no codeword at ring {ring}, angle {angle}")
        return int(pos[0])

    def point(self, ring: int, angle: int) -> PolarPoint:
        return PolarPoint.from_kappa(float(self.theta[angle]), float(self.ring_kappa[ring]))

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Steering ``(theta, r)`` arrays of shape ``(n_r, n_theta)``; ``r = inf`` on ring 0."""
        theta = np.broadcast_to(self.theta, self.shape).copy()
        with np.errstate(divide="ignore"):
            r = (1.0 - theta**2) / self.ring_kappa[:, None]
        r[0] = np.inf
        return theta, r

    @cached_property
    def theta_edges(self) -> np.ndarray:
        t = self.theta
        return np.concatenate(([-1.0], 0.5 * (t[:-1] + t[1:]), [1.0]))

    @cached_property
    def kappa_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-cell ``(kappa_lo, kappa_hi)``, each ``(n_r, n_theta)``; empty cells have ``lo >= hi``."""
        n_r, n_theta = self.shape
        lo = np.empty((n_r, n_theta))
        hi = np.empty((n_r, n_theta))
        for col in range(n_theta):
            kmax = self.column_kappa_max[col]
            rings = np.flatnonzero(self.active[:, col])
            ks = self.ring_kappa[rings]
            edges = np.concatenate(([0.0], 0.5 * (ks[:-1] + ks[1:]), [kmax]))
            edges = np.minimum(edges, kmax)
            lo[:, col] = kmax
            hi[:, col] = kmax
            lo[rings, col] = edges[:-1]
            hi[rings, col] = edges[1:]
        return lo, hi

    def coverage_region(self, ring: int, angle: int) -> CoverageRegion:
        lo, hi = self.kappa_bounds
        return CoverageRegion(
            float(self.theta_edges[angle]),
            float(self.theta_edges[angle + 1]),
            float(lo[ring, angle]),
            float(hi[ring, angle]),
        )

    def cell_of(self, theta, kappa) -> tuple[np.ndarray, np.ndarray]:
        """``(ring, angle)`` of the coverage cell holding each point (half-open cells)."""
        theta = np.asarray(theta, float)
        kappa = np.asarray(kappa, float)
        col = np.clip(np.searchsorted(self.theta_edges, theta, side="right") - 1, 0, self.params.n_theta - 1)
        lo, _ = self.kappa_bounds
        ring = np.zeros(theta.shape, dtype=int)
        for m in range(1, self.params.n_r):
            ok = self.active[m, col] & (kappa >= lo[m, col]) & (lo[m, col] < self.column_kappa_max[col])
            ring = np.where(ok, m, ring)
        return ring, col

    def min_gains(self, method: str = "closed") -> np.ndarray:
        """Minimum corner gain of every cell; ``nan`` where a cell is empty or dropped.

        ``method="sum"`` replaces the closed form with direct summation.
        """
        lo, hi = self.kappa_bounds
        n_r, n_theta = self.shape
        t_lo = np.broadcast_to(self.theta_edges[:-1], self.shape)
        t_hi = np.broadcast_to(self.theta_edges[1:], self.shape)
        st = np.broadcast_to(self.theta, self.shape)
        sk = np.broadcast_to(self.ring_kappa[:, None], self.shape)
        out = np.full(self.shape, np.inf)
        for ct in (t_lo, t_hi):
            for ck in (lo, hi):
                if method == "closed":
                    g = steering_gain(self.cfg, st, sk, ct, ck)
                elif method == "sum":
                    g = _direct_gain(self.cfg, st, sk, ct, ck)
                else:
                    raise ValueError(f"unknown method {method!r}")
                out = np.minimum(out, g)
        valid = self.active & (lo < hi)
        return np.where(valid, out, np.nan)

    def min_gain(self, ring: int | None = None, angle: int | None = None, method: str = "closed") -> float:
        """Corner minimum of one cell, or of the whole codebook when no index is given."""
        g = self.min_gains(method)
        if ring is None:
            return float(np.nanmin(g))
        return float(g[ring, angle])


def _direct_gain(cfg, st, sk, theta, kappa, chunk: int = 4096) -> np.ndarray:
    # |sum_n exp(j pi (a n^2 + b n))| / n_w evaluated term by term
    st, sk, theta, kappa = np.broadcast_arrays(st, sk, theta, kappa)
    flat = [x.ravel() for x in (st, sk, theta, kappa)]
    out = np.empty(flat[0].size)
    for s in range(0, out.size, chunk):
        sl = slice(s, s + chunk)
        a_p = steering_matrix(cfg, flat[0][sl], kappa=flat[1][sl])
        a_e = steering_matrix(cfg, flat[2][sl], kappa=flat[3][sl])
        out[sl] = np.abs(np.sum(np.conj(a_p) * a_e, axis=-1))
    return out.reshape(st.shape)


def lower_codebook(cfg: ArrayConfig, n_theta: int, n_r: int, rho: float = float("nan"), truncate: bool = False) -> LowerCodebook:
    """Codebook with ``n_r`` rings spaced so that every ring cell has the same curvature half-width.

    Ring spacing is ``kappa_max / (n_r - 1/2)``; the innermost ring then
    reaches ``kappa_max`` with the same offset as the inter-ring midpoints.
    """
    kmax = float(np.max((1.0 - angle_grid(n_theta) ** 2) / cfg.r_min))
    delta = math.inf if n_r == 1 else (n_r - 0.5) / kmax
    return LowerCodebook(cfg, LowerCodebookParams(rho, delta, n_theta, n_r), truncate=truncate)


def _half_spacing_limit(cfg: ArrayConfig, n_theta: int, rho: float, kmax: float) -> float:
    """Largest curvature offset keeping the cell-corner gain at ``rho``; ``inf`` if never crossed."""
    b_theta = 1.0 / n_theta
    gain = lambda off: float(steering_gain(cfg, 0.0, 0.0, b_theta, off))
    grid = np.linspace(0.0, kmax, 257)[1:]
    vals = steering_gain(cfg, 0.0, 0.0, b_theta, grid)
    below = np.flatnonzero(vals < rho)
    if below.size == 0:
        return math.inf
    hi = grid[below[0]]
    lo = grid[below[0] - 1] if below[0] > 0 else 0.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if gain(mid) >= rho:
            lo = mid
        else:
            hi = mid
    return lo


def build_lower_codebook(
    cfg: ArrayConfig,
    rho: float,
    n_theta_schedule=None,
    max_rings: int = 64,
    truncate: bool = False,
) -> LowerCodebook:
    """Smallest codebook (lexicographic in ``(n_theta, n_r)``) whose cell-corner gains all reach ``rho``."""
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho!r}")
    if n_theta_schedule is None:
        n_theta_schedule = [cfg.n_w * 2**k for k in range(6)]
    tried = []
    for n_theta in n_theta_schedule:
        b_theta = 1.0 / n_theta
        if float(steering_gain(cfg, 0.0, 0.0, b_theta, 0.0)) < rho:
            tried.append(f"n_theta={n_theta}: angular corner alone below rho")
            continue
        kmax = float(np.max((1.0 - angle_grid(n_theta) ** 2) / cfg.r_min))
        half = _half_spacing_limit(cfg, n_theta, rho, kmax)
        first = 1 if math.isinf(half) else max(1, math.ceil(kmax / (2 * half) + 0.5 - 1e-12))
        for n_r in range(first, max_rings + 1):
            cb = lower_codebook(cfg, n_theta, n_r, rho, truncate=truncate)
            g = cb.min_gain()
            if g >= rho:
                logger.info("lower codebook: n_theta=%d n_r=%d min gain %.4f", n_theta, n_r, g)
                return cb
        tried.append(f"n_theta={n_theta}: no ring count up to {max_rings} reaches rho")
    raise ValueError(f"no codebook in the schedule reaches rho={rho}: " + "; ".join(tried))
