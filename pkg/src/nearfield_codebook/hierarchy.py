"""Upper codebook levels and the hierarchical codebook.

Every upper level is one initial wide pattern, relocated onto a schedule of
distance rings and then rotated to ``n_theta`` evenly spaced directions. A
codeword's coverage descriptor is the rectangle ``[theta_lo, theta_hi) x
[kappa_lo, kappa_hi)`` it is responsible for; parents link to next-level
codewords whose descriptors overlap theirs.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .array import ArrayConfig, BeamVector, gain_map
from .lower import LowerCodebook
from .patterns import PATTERNS, initial_pattern
from .transforms import curvature_ramp, rotation_ramp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HierarchyConfig:
    """``n_lv`` counts the lower codebook as the last level."""

    n_lv: int = 9
    pattern: str = "deact"
    half_gain: float = 0.5
    ring_probe: str = "sector"
    n_theta_levels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n_lv < 1:
            raise ValueError(f"n_lv must be >= 1, got {self.n_lv}")
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}; expected one of {sorted(PATTERNS)}")
        if self.ring_probe not in ("sector", "broadside"):
            raise ValueError(f"ring_probe must be 'sector' or 'broadside', got {self.ring_probe!r}")
        if not 0 < self.half_gain < 1:
            raise ValueError("half_gain must lie in (0, 1)")
        if self.n_theta_levels is not None and len(self.n_theta_levels) != self.n_lv - 1:
            raise ValueError("n_theta_levels needs one entry per upper level")

    def n_theta(self, level: int) -> int:
        if self.n_theta_levels is not None:
            return int(self.n_theta_levels[level - 1])
        return 2**level


def ring_schedule(cfg: ArrayConfig, w_ori: BeamVector, fraction: float = 0.5, kappa_max: float | None = None,
                  half_width: float = 0.0, n_scan: int = 1024, n_probe: int = 33) -> np.ndarray:
    """Ring curvatures ``[0, dk, 2 dk, ...]`` below ``kappa_max``.

    ``dk`` is the first curvature offset at which the probed gain of
    ``w_ori`` falls to ``fraction`` of its far-field value (dense scan, then
    bisection). With ``half_width=0`` the probe is the broadside gain;
    otherwise it is the mean gain over ``|theta| <= half_width``. If the
    drop never happens inside ``kappa_max`` only the far-field ring is
    returned.
    """
    kmax = cfg.kappa_max if kappa_max is None else kappa_max
    thetas = np.linspace(-half_width, half_width, n_probe) if half_width > 0 else np.zeros(1)

    def probe(kappa):
        kappa = np.atleast_1d(kappa)
        return gain_map(cfg, w_ori, thetas[:, None], kappa[None, :]).mean(axis=0)

    g0 = float(probe(0.0)[0])
    if g0 <= 0:
        raise ValueError("initial pattern has no gain at the probe directions")
    target = fraction * g0
    grid = np.linspace(0.0, kmax, n_scan + 1)[1:]
    below = np.flatnonzero(probe(grid) <= target)
    if below.size == 0:
        return np.zeros(1)
    hi = grid[below[0]]
    lo = grid[below[0] - 1] if below[0] > 0 else 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(probe(mid)[0]) > target:
            lo = mid
        else:
            hi = mid
    step = 0.5 * (lo + hi)
    count = int(np.ceil(kmax / step))
    rings = step * np.arange(count)
    return rings[rings < kmax]


@dataclass
class UpperLevel:
    level: int
    n_theta: int
    ring_kappa: np.ndarray
    weights: np.ndarray  # (n_rings, n_theta, n_w)
    kappa_max: float

    @property
    def n_rings(self) -> int:
        return self.ring_kappa.size

    @property
    def size(self) -> int:
        return self.n_rings * self.n_theta

    @cached_property
    def directions(self) -> np.ndarray:
        return -1.0 + (2.0 * np.arange(1, self.n_theta + 1) - 1.0) / self.n_theta

    @cached_property
    def theta_edges(self) -> np.ndarray:
        return -1.0 + 2.0 * np.arange(self.n_theta + 1) / self.n_theta

    @cached_property
    def kappa_edges(self) -> np.ndarray:
        k = self.ring_kappa
        return np.concatenate(([0.0], 0.5 * (k[:-1] + k[1:]), [self.kappa_max]))

    @cached_property
    def matrix(self) -> np.ndarray:
        """Codewords as rows, ring-major."""
        return self.weights.reshape(-1, self.weights.shape[-1])

    def unflatten(self, flat: int) -> tuple[int, int]:
        return divmod(int(flat), self.n_theta)

    def descriptor(self, flat: int) -> tuple[float, float, float, float]:
        ring, angle = self.unflatten(flat)
        return (float(self.theta_edges[angle]), float(self.theta_edges[angle + 1]),
                float(self.kappa_edges[ring]), float(self.kappa_edges[ring + 1]))


@dataclass
class HierarchicalCodebook:
    cfg: ArrayConfig
    hcfg: HierarchyConfig
    lower: LowerCodebook
    levels: list[UpperLevel]
    # children[i][p] -> flat indices into level i+1 (into lower.matrix for the last entry)
    children: list[list[np.ndarray]] = field(default_factory=list)

    @property
    def n_lv(self) -> int:
        return len(self.levels) + 1

    def level_matrix(self, i: int) -> np.ndarray:
        """Codeword rows of level ``i + 1`` (0-based list position; the last is the lower codebook)."""
        return self.levels[i].matrix if i < len(self.levels) else self.lower.matrix

    def level_sizes(self) -> list[int]:
        return [lv.size for lv in self.levels] + [self.lower.size]


def build_level(cfg: ArrayConfig, level: int, n_theta: int, w_ori: BeamVector, fraction: float = 0.5,
                probe: str = "sector") -> UpperLevel:
    half_width = 1.0 / n_theta if probe == "sector" else 0.0
    rings = ring_schedule(cfg, w_ori, fraction, half_width=half_width)
    curv = np.stack([curvature_ramp(cfg, k) for k in rings])
    rot = np.stack([rotation_ramp(cfg, t) for t in -1.0 + (2.0 * np.arange(1, n_theta + 1) - 1.0) / n_theta])
    weights = w_ori.weights[None, None, :] * curv[:, None, :] * rot[None, :, :]
    return UpperLevel(level, n_theta, rings, weights, cfg.kappa_max)


OVERLAP_TOL = 1e-12


def _overlap(lo_a, hi_a, lo_b, hi_b, tol=0.0):
    return (np.minimum(hi_a, hi_b) - np.maximum(lo_a, lo_b)) > tol


def _link_upper(parent: UpperLevel, child: UpperLevel) -> list[np.ndarray]:
    out = []
    for flat in range(parent.size):
        t0, t1, k0, k1 = parent.descriptor(flat)
        angles = np.flatnonzero(_overlap(t0, t1, child.theta_edges[:-1], child.theta_edges[1:]))
        rings = np.flatnonzero(_overlap(k0, k1, child.kappa_edges[:-1], child.kappa_edges[1:]))
        kids = (rings[:, None] * child.n_theta + angles[None, :]).ravel()
        out.append(np.sort(kids))
    return out


def _link_bottom(parent: UpperLevel, lower: LowerCodebook) -> list[np.ndarray]:
    """Lower codewords whose steering point lies in the parent's descriptor.

    A parent that contains no steering point (its rings are denser than the
    lower rings) falls back to every lower cell overlapping its descriptor.
    A parent lying wholly beyond the near-field limit of its columns gets the
    outermost active codeword of each overlapped column.
    """
    idx = lower.indices
    theta = lower.theta[idx[:, 1]]
    kappa = lower.ring_kappa[idx[:, 0]]
    angle = np.clip(np.searchsorted(parent.theta_edges, theta, side="right") - 1, 0, parent.n_theta - 1)
    ring = np.clip(np.searchsorted(parent.kappa_edges, kappa, side="right") - 1, 0, parent.n_rings - 1)
    owner = ring * parent.n_theta + angle
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(parent.size + 1))
    links = [order[bounds[p]:bounds[p + 1]] for p in range(parent.size)]

    k_lo, k_hi = lower.kappa_bounds
    t_lo = lower.theta_edges[idx[:, 1]]
    t_hi = lower.theta_edges[idx[:, 1] + 1]
    c_lo = k_lo[idx[:, 0], idx[:, 1]]
    c_hi = k_hi[idx[:, 0], idx[:, 1]]
    for p, kids in enumerate(links):
        if kids.size:
            continue
        t0, t1, k0, k1 = parent.descriptor(p)
        hit = _overlap(t0, t1, t_lo, t_hi, OVERLAP_TOL) & _overlap(k0, k1, c_lo, c_hi, OVERLAP_TOL)
        if not hit.any():
            cols = _overlap(t0, t1, t_lo, t_hi, OVERLAP_TOL)
            top = np.full(lower.shape[1], -1)
            np.maximum.at(top, idx[cols, 1], idx[cols, 0])
            hit = cols & (idx[:, 0] == top[idx[:, 1]])
        links[p] = np.flatnonzero(hit)
    return links


def build_hierarchy(cfg: ArrayConfig, hcfg: HierarchyConfig, lower: LowerCodebook) -> HierarchicalCodebook:
    """Construct upper levels ``1..n_lv-1`` and link every level to the next."""
    if lower.cfg != cfg:
        raise ValueError("lower codebook was built for a different array")
    levels = []
    for level in range(1, hcfg.n_lv):
        w_ori = initial_pattern(cfg, hcfg.pattern, level)
        lv = build_level(cfg, level, hcfg.n_theta(level), w_ori, hcfg.half_gain, hcfg.ring_probe)
        logger.debug("level %d: %d rings x %d directions", level, lv.n_rings, lv.n_theta)
        levels.append(lv)

    children = []
    for i, lv in enumerate(levels):
        links = _link_upper(lv, levels[i + 1]) if i + 1 < len(levels) else _link_bottom(lv, lower)
        empty = [p for p, kids in enumerate(links) if kids.size == 0]
        if empty:
            raise ValueError(f"level {lv.level}: codewords {empty[:5]} have no children")
        children.append(links)

    if levels:
        orphans = np.setdiff1d(np.arange(lower.size), np.concatenate(children[-1]))
        if orphans.size:
            raise ValueError(f"{orphans.size} lower codewords have no parent")
    return HierarchicalCodebook(cfg, hcfg, lower, levels, children)
