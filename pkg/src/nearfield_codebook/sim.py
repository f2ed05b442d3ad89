"""Monte-Carlo experiments: coverage gain and beam-search cost.

Users are drawn once from a single seeded stream and then processed in
fixed-size chunks. Every chunk produces per-user values that are written back
by position, so the reported numbers do not depend on how many workers ran
the chunks.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .array import ArrayConfig, PolarPoint, steering_matrix
from .hierarchy import HierarchicalCodebook, HierarchyConfig, build_hierarchy
from .lower import LowerCodebook, build_lower_codebook, lower_codebook
from .patterns import PATTERNS
from .search import exhaustive_gains, hierarchical_search, topk_hit

R_KINDS = ("uniform",)


@dataclass(frozen=True)
class SimConfig:
    """Experiment settings. ``r_max=None`` means ``10 * r_min``."""

    n_w: int = 256
    f_c: float = 40e9
    bandwidth: float = 1e9  # recorded only; the array model is narrowband
    n_u: int = 100_000
    rho: float = 0.64
    r_kind: str = "uniform"
    r_max: float | None = None
    snr_db: float = 20.0
    seed: int = 0
    chunk_size: int = 1000
    proposed: tuple[int, int] | None = (512, 5)
    undersampled: tuple[int, int] = (256, 4)
    farfield_n_theta: int = 512
    farfield_dft: bool = False
    n_lv: int = 9
    patterns: tuple[str, ...] = ("deact", "bmwss", "quadric")
    topk: tuple[int, ...] = (1, 3)

    def __post_init__(self):
        if int(self.n_u) != self.n_u or self.n_u < 1:
            raise ValueError(f"n_u must be a positive integer, got {self.n_u!r}")
        if not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.r_kind not in R_KINDS:
            raise ValueError(f"unknown r_kind {self.r_kind!r}; expected one of {R_KINDS}")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")
        for p in self.patterns:
            if p not in PATTERNS:
                raise ValueError(f"unknown pattern {p!r}")
        if any(k < 1 for k in self.topk):
            raise ValueError("top-k values must be >= 1")
        for name in ("proposed", "undersampled", "patterns", "topk"):
            val = getattr(self, name)
            if isinstance(val, list):
                object.__setattr__(self, name, tuple(val))
        if self.r_max is not None and not self.r_max > self.array.r_min:
            raise ValueError(f"r_max must exceed r_min = {self.array.r_min:.6g} m, got {self.r_max!r}")

    @property
    def array(self) -> ArrayConfig:
        return ArrayConfig(self.n_w, self.f_c)

    @property
    def resolved_r_max(self) -> float:
        return 10.0 * self.array.r_min if self.r_max is None else float(self.r_max)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["r_max"] = self.resolved_r_max
        d["r_min"] = self.array.r_min
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names - {"r_min"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    codebooks: dict[str, dict] = field(default_factory=dict)
    hashes: dict[str, str] = field(default_factory=dict)
    elapsed: float = 0.0  # wall time, kept out of the serialized report

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "config": self.config, "codebooks": self.codebooks,
                "hashes": self.hashes}


def sample_users(sim: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """``(theta, r)`` arrays of length ``n_u``: ``theta ~ U[-1, 1)``, ``r ~ U(r_min, r_max]``."""
    rng = np.random.default_rng(int(sim.seed))
    u = rng.random((2, sim.n_u))
    theta = -1.0 + 2.0 * u[0]
    r_min, r_max = sim.array.r_min, sim.resolved_r_max
    r = r_max - (r_max - r_min) * u[1]
    return theta, r


def sample_user_points(sim: SimConfig) -> list[PolarPoint]:
    theta, r = sample_users(sim)
    return [PolarPoint(float(t), float(d)) for t, d in zip(theta, r)]


def user_channels(cfg: ArrayConfig, theta: np.ndarray, r: np.ndarray) -> np.ndarray:
    """LOS channels with unit path gain, exact spherical-wave model."""
    return steering_matrix(cfg, theta, r, model="exact")


def _run_chunks(n: int, chunk: int, fn: Callable[[slice], None], workers: int) -> None:
    slices = [slice(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    if workers <= 1:
        for sl in slices:
            fn(sl)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fn, slices))


def codebook_hash(*arrays: np.ndarray, meta: dict | None = None) -> str:
    """Git-blob-style SHA-1 over the metadata JSON and raw little-endian array bytes."""
    parts = [json.dumps(meta or {}, sort_keys=True).encode()]
    for a in arrays:
        a = np.ascontiguousarray(a)
        parts.append(a.astype(a.dtype.newbyteorder("<"), copy=False).tobytes())
    data = b"\n".join(parts)
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _lower_hash(lower: LowerCodebook) -> str:
    p = lower.params
    return codebook_hash(lower.weights, lower.active,
                         meta={"n_theta": p.n_theta, "n_r": p.n_r, "delta": p.delta, "n_w": lower.cfg.n_w})


def _hier_hash(hier: HierarchicalCodebook) -> str:
    arrays = [hier.lower.weights]
    for lv, links in zip(hier.levels, hier.children):
        arrays += [lv.weights, np.concatenate(links), np.array([len(k) for k in links])]
    return codebook_hash(*arrays, meta={"pattern": hier.hcfg.pattern, "n_lv": hier.hcfg.n_lv})


def proposed_codebook(sim: SimConfig) -> LowerCodebook:
    if sim.proposed is None:
        return build_lower_codebook(sim.array, sim.rho)
    n_theta, n_r = sim.proposed
    return lower_codebook(sim.array, n_theta, n_r, sim.rho)


def baseline_codebooks(sim: SimConfig) -> dict[str, LowerCodebook]:
    cfg = sim.array
    ff_n = cfg.n_w if sim.farfield_dft else sim.farfield_n_theta
    return {
        "proposed": proposed_codebook(sim),
        "undersampled": lower_codebook(cfg, *sim.undersampled),
        "farfield": lower_codebook(cfg, ff_n, 1),
    }


def _gain_stats(g: np.ndarray) -> dict:
    return {
        "avg_gain": float(np.mean(g)),
        "min_gain": float(np.min(g)),
        "std_err": float(np.std(g, ddof=1) / math.sqrt(g.size)) if g.size > 1 else 0.0,
        "n_trials": int(g.size),
    }


def run_gain_experiment(sim: SimConfig, workers: int = 1) -> ExperimentReport:
    """Best achievable codeword gain per user for the proposed codebook and two baselines."""
    start = time.perf_counter()
    cfg = sim.array
    theta, r = sample_users(sim)
    books = baseline_codebooks(sim)
    for cb in books.values():
        cb.matrix  # build cached arrays before threads share them
    gains = {name: np.empty(sim.n_u) for name in books}

    def work(sl):
        h = user_channels(cfg, theta[sl], r[sl])
        for name, cb in books.items():
            gains[name][sl] = exhaustive_gains(cb, h).max(axis=1)

    _run_chunks(sim.n_u, sim.chunk_size, work, workers)
    report = ExperimentReport("gain", sim.to_dict())
    for name, cb in books.items():
        stats = _gain_stats(gains[name])
        stats.update({"n_theta": cb.params.n_theta, "n_r": cb.params.n_r, "size": cb.size})
        report.codebooks[name] = stats
        report.hashes[name] = _lower_hash(cb)
    prop = report.codebooks["proposed"]
    for name in ("undersampled", "farfield"):
        base = report.codebooks[name]
        prop[f"avg_gain_vs_{name}_pct"] = 100.0 * (prop["avg_gain"] / base["avg_gain"] - 1.0)
        prop[f"min_gain_vs_{name}_pct"] = 100.0 * (prop["min_gain"] / base["min_gain"] - 1.0)
    report.elapsed = time.perf_counter() - start
    return report


def build_hierarchies(sim: SimConfig, lower: LowerCodebook) -> dict[str, HierarchicalCodebook]:
    return {p: build_hierarchy(sim.array, HierarchyConfig(n_lv=sim.n_lv, pattern=p), lower) for p in sim.patterns}


def run_search_experiment(sim: SimConfig, workers: int = 1) -> ExperimentReport:
    """Hierarchical search cost and Top-k agreement against the exhaustive oracle."""
    start = time.perf_counter()
    cfg = sim.array
    theta, r = sample_users(sim)
    lower = proposed_codebook(sim)
    hiers = build_hierarchies(sim, lower)
    for hier in hiers.values():
        for i in range(hier.n_lv):
            hier.level_matrix(i)
    n = sim.n_u
    oracle_gain = np.empty(n)
    per = {p: {"steps": np.empty(n, dtype=np.int64), "upper": np.empty(n, dtype=np.int64),
               "gain": np.empty(n), **{f"top{k}": np.empty(n, dtype=bool) for k in sim.topk}}
           for p in hiers}

    def work(sl):
        h = user_channels(cfg, theta[sl], r[sl])
        G = exhaustive_gains(lower, h)
        oracle_gain[sl] = G.max(axis=1)
        for p, hier in hiers.items():
            rec = per[p]
            for j, u in enumerate(range(sl.start, sl.stop)):
                res = hierarchical_search(hier, h[j])
                rec["steps"][u] = res.steps
                rec["upper"][u] = res.upper_steps
                rec["gain"][u] = res.achieved_gain
                for k in sim.topk:
                    rec[f"top{k}"][u] = topk_hit(G[j], res.flat, k)

    _run_chunks(n, sim.chunk_size, work, workers)
    report = ExperimentReport("search", sim.to_dict())
    ex = _gain_stats(oracle_gain)
    ex.update({"mean_steps": float(lower.size), "mean_upper_steps": 0.0,
               **{f"top{k}": 1.0 for k in sim.topk}})
    report.codebooks["exhaustive"] = ex
    report.hashes["exhaustive"] = _lower_hash(lower)
    for p, rec in per.items():
        stats = _gain_stats(rec["gain"])
        stats["mean_steps"] = float(np.mean(rec["steps"]))
        stats["mean_upper_steps"] = float(np.mean(rec["upper"]))
        stats["max_steps"] = int(rec["steps"].max())
        for k in sim.topk:
            stats[f"top{k}"] = float(np.mean(rec[f"top{k}"]))
        stats["ring_counts"] = [int(lv.n_rings) for lv in hiers[p].levels]
        report.codebooks[p] = stats
        report.hashes[p] = _hier_hash(hiers[p])
    report.elapsed = time.perf_counter() - start
    return report


# ---- serialization -----------------------------------------------------------

def _num(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    # keep floats recognizable as floats when parsed back
    return s if any(c in s for c in ".eEn") else s + ".0"


def to_json(obj, indent: int = 0) -> str:
    """JSON with every float printed to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(to_json(v, indent + 1) for v in obj) + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, int, float, np.integer, np.floating, np.bool_)):
        return _num(bool(obj) if isinstance(obj, np.bool_) else obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


CSV_COLUMNS = ("codebook", "metric", "value")


def report_rows(report: ExperimentReport) -> list[tuple[str, str, str]]:
    rows = []
    for name, metrics in report.codebooks.items():
        for metric, value in metrics.items():
            if isinstance(value, (list, tuple)):
                value = ";".join(_num(v) for v in value)
            else:
                value = _num(value)
            rows.append((name, metric, value))
    return rows


def emit_report(report: ExperimentReport, fmt: str, path) -> Path:
    """Write the report as ``csv`` (one row per codebook and metric) or ``json``."""
    path = Path(path)
    if fmt == "json":
        text = to_json(report.to_dict()) + "\n"
    elif fmt == "csv":
        lines = [",".join(CSV_COLUMNS)] + [",".join(row) for row in report_rows(report)]
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}; expected 'csv' or 'json'")
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def load_report(path) -> ExperimentReport:
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise OSError(f"cannot read report {path}: {exc}") from exc
    return ExperimentReport(d["experiment"], d["config"], d["codebooks"], d["hashes"])
