"""Codebook containers.

Binary container: a NumPy ``.npz`` archive (no pickled objects) holding the
codeword arrays plus a JSON ``meta`` string. CSV export: one row per
codeword with columns ``level, ring, angle, theta, r`` followed by ``n_w``
interleaved ``re, im`` pairs. Floats are written with ``repr`` so that
parsing them back reproduces every bit. The first CSV line is a ``#``
comment carrying the same JSON metadata.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .array import ArrayConfig
from .hierarchy import HierarchicalCodebook, HierarchyConfig, UpperLevel
from .lower import LowerCodebook, LowerCodebookParams

FORMAT_VERSION = 1


def _cfg_from(meta: dict) -> ArrayConfig:
    a = meta["array"]
    return ArrayConfig(int(a["n_w"]), float(a["f_c"]), float(a["d"]))


def _lower_meta(lower: LowerCodebook) -> dict:
    p = lower.params
    return {
        "format": FORMAT_VERSION,
        "array": lower.cfg.to_dict(),
        "lower": {"rho": p.rho, "delta": p.delta, "n_theta": p.n_theta, "n_r": p.n_r, "truncate": lower.truncate},
    }


def _json(meta: dict) -> str:
    # inf/nan are legal in Python's json dialect and survive the round trip
    return json.dumps(meta, sort_keys=True)


def _lower_from(meta: dict, weights: np.ndarray) -> LowerCodebook:
    m = meta["lower"]
    params = LowerCodebookParams(float(m["rho"]), float(m["delta"]), int(m["n_theta"]), int(m["n_r"]))
    lower = LowerCodebook(_cfg_from(meta), params, truncate=bool(m["truncate"]))
    if weights.shape != lower.shape + (lower.cfg.n_w,):
        raise ValueError(f"weights shape {weights.shape} does not match codebook {lower.shape}")
    lower.__dict__["weights"] = weights
    return lower


def _open_error(path, exc) -> OSError:
    return OSError(f"{path}: {exc}")


def save_lower(lower: LowerCodebook, path) -> Path:
    path = Path(path)
    try:
        with path.open("wb") as fh:
            np.savez(fh, meta=np.array(_json(_lower_meta(lower))), weights=lower.weights)
    except OSError as exc:
        raise _open_error(path, exc) from exc
    return path


def load_lower(path) -> LowerCodebook:
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            weights = z["weights"]
    except (OSError, KeyError, ValueError) as exc:
        raise _open_error(path, exc) from exc
    if meta.get("format") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported container version {meta.get('format')!r}")
    return _lower_from(meta, weights)


def _hier_meta(hier: HierarchicalCodebook) -> dict:
    meta = _lower_meta(hier.lower)
    h = hier.hcfg
    meta["hierarchy"] = {
        "n_lv": h.n_lv,
        "pattern": h.pattern,
        "half_gain": h.half_gain,
        "ring_probe": h.ring_probe,
        "n_theta_levels": None if h.n_theta_levels is None else list(h.n_theta_levels),
        "levels": [{"level": lv.level, "n_theta": lv.n_theta, "kappa_max": lv.kappa_max} for lv in hier.levels],
    }
    return meta


def _pack_children(links: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(links) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(k) for k in links])
    idx = np.concatenate(links).astype(np.int64) if links else np.zeros(0, dtype=np.int64)
    return ptr, idx


def save_hierarchy(hier: HierarchicalCodebook, path) -> Path:
    path = Path(path)
    arrays = {"meta": np.array(_json(_hier_meta(hier))), "weights": hier.lower.weights}
    for i, lv in enumerate(hier.levels):
        arrays[f"level{i}_weights"] = lv.weights
        arrays[f"level{i}_rings"] = lv.ring_kappa
        ptr, idx = _pack_children(hier.children[i])
        arrays[f"children{i}_ptr"] = ptr
        arrays[f"children{i}_idx"] = idx
    try:
        with path.open("wb") as fh:
            np.savez(fh, **arrays)
    except OSError as exc:
        raise _open_error(path, exc) from exc
    return path


def load_hierarchy(path) -> HierarchicalCodebook:
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            lower = _lower_from(meta, z["weights"])
            h = meta["hierarchy"]
            levels, children = [], []
            for i, info in enumerate(h["levels"]):
                levels.append(UpperLevel(int(info["level"]), int(info["n_theta"]), z[f"level{i}_rings"],
                                         z[f"level{i}_weights"], float(info["kappa_max"])))
                ptr, idx = z[f"children{i}_ptr"], z[f"children{i}_idx"]
                children.append([idx[ptr[p]:ptr[p + 1]] for p in range(ptr.size - 1)])
    except (OSError, KeyError, ValueError) as exc:
        raise _open_error(path, exc) from exc
    ntl = h["n_theta_levels"]
    hcfg = HierarchyConfig(int(h["n_lv"]), h["pattern"], float(h["half_gain"]), h["ring_probe"],
                           None if ntl is None else tuple(ntl))
    return HierarchicalCodebook(lower.cfg, hcfg, lower, levels, children)


def _header(n_w: int) -> list[str]:
    cols = ["level", "ring", "angle", "theta", "r"]
    for i in range(n_w):
        cols += [f"re{i}", f"im{i}"]
    return cols


def _distance(theta: float, kappa: float) -> float:
    return math.inf if kappa == 0 else (1.0 - theta * theta) / kappa


def _rows(level: int, rings: np.ndarray, angles: np.ndarray, theta: np.ndarray, kappa: np.ndarray, W: np.ndarray):
    for m, l, t, k, w in zip(rings, angles, theta, kappa, W):
        row = [str(level), str(int(m)), str(int(l)), repr(float(t)), repr(_distance(float(t), float(k)))]
        for z in w:
            row += [repr(float(z.real)), repr(float(z.imag))]
        yield row


def _write_csv(path: Path, meta: dict, header: list[str], rows) -> Path:
    try:
        with path.open("w", newline="") as fh:
            fh.write("# " + _json(meta) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise _open_error(path, exc) from exc
    return path


def export_lower_csv(lower: LowerCodebook, path, level: int = 1) -> Path:
    idx = lower.indices
    rows = _rows(level, idx[:, 0], idx[:, 1], lower.theta[idx[:, 1]], lower.ring_kappa[idx[:, 0]], lower.matrix)
    return _write_csv(Path(path), _lower_meta(lower), _header(lower.cfg.n_w), rows)


def export_hierarchy_csv(hier: HierarchicalCodebook, path) -> tuple[Path, Path]:
    """Codeword CSV at ``path`` plus a ``<stem>_children.csv`` table of ``level, parent, child``."""
    path = Path(path)

    def every_level():
        for lv in hier.levels:
            ring, angle = np.divmod(np.arange(lv.size), lv.n_theta)
            yield from _rows(lv.level, ring, angle, lv.directions[angle], lv.ring_kappa[ring], lv.matrix)
        lower = hier.lower
        idx = lower.indices
        yield from _rows(hier.n_lv, idx[:, 0], idx[:, 1], lower.theta[idx[:, 1]], lower.ring_kappa[idx[:, 0]],
                         lower.matrix)

    _write_csv(path, _hier_meta(hier), _header(hier.cfg.n_w), every_level())
    kids_path = path.with_name(path.stem + "_children.csv")
    kid_rows = ([str(lv.level), str(p), str(int(c))]
                for lv, links in zip(hier.levels, hier.children) for p, kids in enumerate(links) for c in kids)
    _write_csv(kids_path, {"format": FORMAT_VERSION}, ["level", "parent", "child"], kid_rows)
    return path, kids_path


def read_codebook_csv(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Parse an exported codebook CSV into ``(meta, columns)``; ``columns["weights"]`` is complex."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            first = fh.readline()
            if not first.startswith("# "):
                raise ValueError("missing metadata line")
            meta = json.loads(first[2:])
            reader = csv.reader(fh)
            header = next(reader)
            body = list(reader)
    except (OSError, ValueError, StopIteration) as exc:
        raise _open_error(path, exc) from exc
    if header[:5] != ["level", "ring", "angle", "theta", "r"]:
        raise ValueError(f"{path}: unexpected header {header[:5]}")
    n_w = (len(header) - 5) // 2
    cols = {
        "level": np.array([int(r[0]) for r in body], dtype=int),
        "ring": np.array([int(r[1]) for r in body], dtype=int),
        "angle": np.array([int(r[2]) for r in body], dtype=int),
        "theta": np.array([float(r[3]) for r in body]),
        "r": np.array([float(r[4]) for r in body]),
    }
    vals = np.array([[float(v) for v in r[5:]] for r in body]).reshape(len(body), n_w, 2)
    w = np.empty((len(body), n_w), dtype=complex)
    # assign parts separately: re + 1j*im would turn -0.0 into 0.0
    w.real = vals[..., 0]
    w.imag = vals[..., 1]
    cols["weights"] = w
    return meta, cols
