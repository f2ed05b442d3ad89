"""scikit-learn style wrapper around codebook construction and beam search."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .array import ArrayConfig
from .hierarchy import HierarchyConfig, build_hierarchy
from .lower import build_lower_codebook, lower_codebook
from .patterns import PATTERNS
from .search import exhaustive_gains, hierarchical_search


def check_channels(H, n_w: int | None = None) -> np.ndarray:
    """Validate a batch of channel vectors.

    ``check_array`` rejects complex input, so this is the complex counterpart:
    returns a C-contiguous ``complex128`` array of shape ``(n_samples, n_w)``.
    """
    H = np.asarray(H)
    if H.ndim == 1:
        raise ValueError("expected a 2-D array of channels; reshape a single channel with h[None, :]")
    if H.ndim != 2:
        raise ValueError(f"expected a 2-D array, got {H.ndim} dimensions")
    if H.shape[0] < 1:
        raise ValueError("need at least one channel")
    if not (np.issubdtype(H.dtype, np.complexfloating) or np.issubdtype(H.dtype, np.number)):
        raise ValueError(f"channels must be numeric, got dtype {H.dtype}")
    H = np.ascontiguousarray(H, dtype=complex)
    if not np.all(np.isfinite(H)):
        raise ValueError("channels contain NaN or infinity")
    if n_w is not None and H.shape[1] != n_w:
        raise ValueError(f"channels have {H.shape[1]} elements, the array has {n_w}")
    return H


class BeamSelector(BaseEstimator):
    """Pick the best lower-codebook beam for each channel.

    ``fit`` builds the codebook (and the hierarchy when ``pattern`` is set);
    the training channels are only validated. ``predict`` returns the flat
    index of the chosen codeword; ``transform`` the gain of every lower
    codeword; ``score`` the mean ratio of achieved to best possible gain.

    ``n_theta=None`` lets the builder pick the smallest grid meeting ``rho``.
    """

    def __init__(self, n_w=256, f_c=40e9, rho=0.64, n_theta=512, n_r=5, pattern=None, n_lv=9):
        self.n_w = n_w
        self.f_c = f_c
        self.rho = rho
        self.n_theta = n_theta
        self.n_r = n_r
        self.pattern = pattern
        self.n_lv = n_lv

    def fit(self, X=None, y=None):
        cfg = ArrayConfig(self.n_w, self.f_c)
        if X is not None:
            check_channels(X, cfg.n_w)
        if self.pattern is not None and self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}")
        if self.n_theta is None:
            self.codebook_ = build_lower_codebook(cfg, self.rho)
        else:
            self.codebook_ = lower_codebook(cfg, self.n_theta, self.n_r, self.rho)
        self.hierarchy_ = None
        if self.pattern is not None:
            self.hierarchy_ = build_hierarchy(cfg, HierarchyConfig(self.n_lv, self.pattern), self.codebook_)
        self.n_features_in_ = cfg.n_w
        return self

    def _select(self, H):
        check_is_fitted(self, "codebook_")
        H = check_channels(H, self.n_features_in_)
        if self.hierarchy_ is None:
            G = exhaustive_gains(self.codebook_, H)
            return np.argmax(G, axis=1), G.max(axis=1), np.full(H.shape[0], self.codebook_.size)
        res = [hierarchical_search(self.hierarchy_, h) for h in H]
        return (np.array([r.flat for r in res]), np.array([r.achieved_gain for r in res]),
                np.array([r.steps for r in res]))

    def predict(self, H) -> np.ndarray:
        return self._select(H)[0]

    def predict_polar(self, H) -> np.ndarray:
        """``(ring, angle)`` pairs of the selections."""
        return self.codebook_.indices[self.predict(H)]

    def search_steps(self, H) -> np.ndarray:
        return self._select(H)[2]

    def transform(self, H) -> np.ndarray:
        check_is_fitted(self, "codebook_")
        return exhaustive_gains(self.codebook_, check_channels(H, self.n_features_in_))

    def score(self, H, y=None) -> float:
        _, achieved, _ = self._select(H)
        best = self.transform(H).max(axis=1)
        return float(np.mean(achieved / best))
