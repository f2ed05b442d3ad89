"""Wide initial beam patterns for the upper codebook levels.

Each pattern at level ``l`` targets a broadside far-field sector of
directional-cosine width ``2 / 2**l``.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .array import ArrayConfig, BeamVector, element_offsets


def _check_level(cfg: ArrayConfig, level: int) -> int:
    if level < 0:
        raise ValueError(f"level must be non-negative, got {level}")
    width = 2**level
    if width > cfg.n_w:
        raise ValueError(f"level {level} needs 2**{level} = {width} elements, array has {cfg.n_w}")
    return width


def deact_pattern(cfg: ArrayConfig, level: int, normalization: str = "active") -> BeamVector:
    """Broadside beam from ``2**level`` centered contiguous active elements."""
    m = _check_level(cfg, level)
    start = (cfg.n_w - m) // 2
    mask = np.zeros(cfg.n_w, dtype=bool)
    mask[start:start + m] = True
    count = m if normalization == "active" else cfg.n_w
    w = np.where(mask, 1.0 / math.sqrt(count), 0.0).astype(complex)
    return BeamVector(w, mask)


def quadric_pattern(cfg: ArrayConfig, level: int) -> BeamVector:
    """Full-array chirp ``exp(j pi a_q n^2) / sqrt(n_w)`` whose stationary-phase image spans the sector."""
    width = 2.0 / _check_level(cfg, level)
    a_q = quadric_coefficient(cfg, width)
    n = element_offsets(cfg)
    w = np.exp(1j * np.pi * a_q * n * n) / math.sqrt(cfg.n_w)
    return BeamVector(w, np.ones(cfg.n_w, dtype=bool))


def quadric_coefficient(cfg: ArrayConfig, width: float) -> float:
    # instantaneous direction 2 a_q n / spacing_ratio sweeps +-width/2 over the aperture
    return cfg.spacing_ratio * width / (2.0 * cfg.n_w)


def _subarray_beam(cfg, n_sub, n_active, spread, order, width):
    """Stitched sub-array beam whose phase is continuous across sub-array boundaries."""
    n = element_offsets(cfg)
    size = cfg.n_w // n_sub
    phase = np.zeros(cfg.n_w)
    mask = np.zeros(cfg.n_w, dtype=bool)
    offset = 0.0
    for s in range(n_sub):
        k = s if order == "asc" else n_sub - 1 - s
        psi = spread * (-width / 2 + (k + 0.5) * width / n_sub)
        block = slice(s * size, (s + 1) * size)
        slope = np.pi * cfg.spacing_ratio * psi
        if s > 0:
            # continue the previous segment's phase at the shared boundary
            edge = n[s * size] - 0.5
            offset = prev_slope * edge + prev_offset - slope * edge
        phase[block] = slope * n[block] + offset
        prev_slope, prev_offset = slope, offset
        lo = s * size + (size - n_active) // 2
        mask[lo:lo + n_active] = True
    w = np.where(mask, np.exp(1j * phase), 0)
    return w / math.sqrt(n_sub * n_active), mask


@lru_cache(maxsize=64)
def _bmwss_search(n_w: int, f_c: float, d: float, level: int):
    cfg = ArrayConfig(n_w, f_c, d)
    width = 2.0 / 2**level
    thetas = np.linspace(-width / 2, width / 2, max(65, int(8 * n_w * width) + 1))
    n = element_offsets(cfg)
    A = np.exp(1j * np.pi * cfg.spacing_ratio * thetas[:, None] * n[None, :]) / math.sqrt(n_w)

    deact = deact_pattern(cfg, level)
    best = (float(np.abs(A @ np.conj(deact.weights)).min()), None)
    n_sub = 2
    while n_sub * n_sub * 2**level <= n_w:
        for n_active in sorted({n_sub * 2**level, n_w // n_sub}):
            for order in ("asc", "desc"):
                for spread in (1.0, 1.1, 1.2, 1.3, 1.4):
                    w, _ = _subarray_beam(cfg, n_sub, n_active, spread, order, width)
                    score = float(np.abs(A @ np.conj(w)).min())
                    if score > best[0] + 1e-12:
                        best = (score, (n_sub, n_active, spread, order))
        n_sub *= 2
    return best


def bmwss_pattern(cfg: ArrayConfig, level: int) -> BeamVector:
    """Wide beam from jointly deactivated and stitched sub-arrays.

    ``S`` sub-arrays (``S**2 * 2**level <= n_w``) point at evenly spread
    directions across the sector, with phase offsets that keep the phase
    continuous from one sub-array to the next. ``S``, the number of active
    elements per sub-array, the sweep order and the spread are picked by a
    deterministic grid search on the minimum in-sector gain; centered
    deactivation is kept whenever it covers the sector better.
    """
    m = _check_level(cfg, level)
    _, design = _bmwss_search(cfg.n_w, cfg.f_c, cfg.d, level)
    if design is None:
        return deact_pattern(cfg, level)
    n_sub, n_active, spread, order = design
    w, mask = _subarray_beam(cfg, n_sub, n_active, spread, order, 2.0 / m)
    return BeamVector(w, mask)


def bmwss_design(cfg: ArrayConfig, level: int) -> dict:
    """Chosen BMW-SS parameters and the achieved minimum in-sector gain."""
    score, design = _bmwss_search(cfg.n_w, cfg.f_c, cfg.d, level)
    if design is None:
        return {"n_sub": 1, "n_active": 2**level, "spread": 1.0, "order": "asc", "min_gain": score}
    n_sub, n_active, spread, order = design
    return {"n_sub": n_sub, "n_active": n_active, "spread": spread, "order": order, "min_gain": score}


PATTERNS = {
    "deact": deact_pattern,
    "bmwss": bmwss_pattern,
    "quadric": quadric_pattern,
}


def initial_pattern(cfg: ArrayConfig, kind: str, level: int) -> BeamVector:
    try:
        fn = PATTERNS[kind]
    except KeyError:
        raise ValueError(f"unknown pattern {kind!r}; expected one of {sorted(PATTERNS)}") from None
    return fn(cfg, level)
