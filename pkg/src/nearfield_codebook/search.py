"""Exhaustive and hierarchical codeword selection with step accounting."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .hierarchy import HierarchicalCodebook
from .lower import LowerCodebook

Measure = Callable[[np.ndarray, np.ndarray], np.ndarray]


def measure_gains(rows: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``|w^H h|`` for every codeword row of ``rows``."""
    return np.abs(np.conj(rows) @ h)


@dataclass(frozen=True)
class SearchResult:
    """Outcome of one search.

    ``selected`` is the bottom-level ``(ring, angle)``; ``flat`` the same
    codeword as a row of the lower codebook matrix. ``trace`` holds the
    winning flat index at every level searched. ``upper_steps`` counts the
    evaluations spent above the bottom level. ``gains`` is only kept by the
    exhaustive search (the full bottom-level gain vector, used as a Top-k
    oracle).
    """

    selected: tuple[int, int]
    flat: int
    steps: int
    trace: tuple[int, ...]
    achieved_gain: float
    upper_steps: int = 0
    gains: np.ndarray | None = None

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("a search evaluates at least one codeword")


def _check_channel(h, n_w: int) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim != 1 or h.shape[0] != n_w:
        raise ValueError(f"channel must be a vector of length {n_w}, got shape {h.shape}")
    return h.astype(complex, copy=False)


def _argmax(g: np.ndarray) -> int:
    # np.argmax returns the first maximum: lowest index wins ties
    return int(np.argmax(g))


def exhaustive_search(lower: LowerCodebook, h, measure: Measure = measure_gains) -> SearchResult:
    """Evaluate every bottom-level codeword and keep the best one."""
    h = _check_channel(h, lower.cfg.n_w)
    gains = np.asarray(measure(lower.matrix, h), dtype=float)
    k = _argmax(gains)
    ring, angle = lower.indices[k]
    return SearchResult((int(ring), int(angle)), k, int(gains.size), (k,), float(gains[k]), 0, gains)


def exhaustive_gains(lower: LowerCodebook, channels: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """Bottom-level gain matrix ``(n_users, size)`` for a batch of channels."""
    channels = np.atleast_2d(np.asarray(channels, dtype=complex))
    if channels.shape[1] != lower.cfg.n_w:
        raise ValueError(f"channels must have {lower.cfg.n_w} columns, got {channels.shape[1]}")
    wc = np.conj(lower.matrix).T
    out = np.empty((channels.shape[0], lower.size))
    for s in range(0, channels.shape[0], chunk):
        out[s:s + chunk] = np.abs(channels[s:s + chunk] @ wc)
    return out


def hierarchical_search(hier: HierarchicalCodebook, h, measure: Measure = measure_gains) -> SearchResult:
    """Level-by-level descent: all level-1 codewords, then only the winner's children."""
    lower = hier.lower
    h = _check_channel(h, hier.cfg.n_w)
    if not hier.levels:
        res = exhaustive_search(lower, h, measure)
        return SearchResult(res.selected, res.flat, res.steps, res.trace, res.achieved_gain)
    if len(hier.children) != len(hier.levels):
        raise ValueError("children map must have one entry per upper level")

    trace = []
    steps = 0
    candidates = np.arange(hier.levels[0].size)
    for i in range(len(hier.levels) + 1):
        rows = hier.level_matrix(i)
        if candidates.size == 0:
            raise ValueError(f"level {i + 1}: empty candidate set")
        if candidates.min() < 0 or candidates.max() >= rows.shape[0]:
            raise ValueError(f"level {i + 1}: child index out of range")
        gains = np.asarray(measure(rows[candidates], h), dtype=float)
        steps += candidates.size
        win = int(candidates[_argmax(gains)])
        trace.append(win)
        if i == len(hier.levels):
            best = float(gains.max())
            break
        if i == len(hier.levels) - 1:
            upper_steps = steps
        candidates = np.asarray(hier.children[i][win])

    ring, angle = lower.indices[win]
    return SearchResult((int(ring), int(angle)), win, steps, tuple(trace), best, upper_steps)


def topk_hit(gains: np.ndarray, flat: int, k: int) -> bool:
    """Whether codeword ``flat`` is among the ``k`` best of ``gains``, ties included."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k >= gains.size:
        return True
    kth = np.partition(gains, gains.size - k)[gains.size - k]
    return bool(gains[flat] >= kth)


def topk_agreement(results: Sequence[SearchResult], oracle: Sequence[SearchResult], k: int) -> float:
    """Fraction of trials whose selection is among the oracle's ``k`` best bottom-level codewords."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(results) != len(oracle):
        raise ValueError(f"{len(results)} results against {len(oracle)} oracle runs")
    if not results:
        raise ValueError("no trials")
    hits = 0
    for res, ref in zip(results, oracle):
        if ref.gains is None:
            raise ValueError("oracle results must come from exhaustive_search")
        hits += topk_hit(ref.gains, res.flat, k)
    return hits / len(results)
