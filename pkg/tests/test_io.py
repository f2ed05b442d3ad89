import json

import numpy as np
import pytest

from nearfield_codebook import HierarchyConfig, build_hierarchy, lower_codebook
from nearfield_codebook.io import (
    export_hierarchy_csv,
    export_lower_csv,
    load_hierarchy,
    load_lower,
    read_codebook_csv,
    save_hierarchy,
    save_lower,
)


@pytest.fixture(scope="module")
def toy_hier(toy_cfg):
    return build_hierarchy(toy_cfg, HierarchyConfig(n_lv=6, pattern="bmwss"), lower_codebook(toy_cfg, 64, 2))


def _same_bits(a, b):
    return a.shape == b.shape and a.tobytes() == b.tobytes()


def test_lower_npz_roundtrip(tmp_path, lower512):
    p = save_lower(lower512, tmp_path / "lower.npz")
    back = load_lower(p)
    assert back.cfg == lower512.cfg
    assert repr(back.params) == repr(lower512.params)  # rho is nan for a fixed-size build
    assert _same_bits(back.weights, lower512.weights)
    assert _same_bits(back.ring_kappa, lower512.ring_kappa)


def test_hierarchy_npz_roundtrip(tmp_path, toy_hier):
    back = load_hierarchy(save_hierarchy(toy_hier, tmp_path / "h.npz"))
    assert back.hcfg == toy_hier.hcfg and back.level_sizes() == toy_hier.level_sizes()
    for a, b in zip(back.levels, toy_hier.levels):
        assert _same_bits(a.weights, b.weights) and _same_bits(a.ring_kappa, b.ring_kappa)
    for la, lb in zip(back.children, toy_hier.children):
        assert all(np.array_equal(x, y) for x, y in zip(la, lb))


def test_csv_roundtrip_is_bit_exact(tmp_path, toy_hier):
    lower = toy_hier.lower
    meta, cols = read_codebook_csv(export_lower_csv(lower, tmp_path / "lower.csv"))
    assert meta["lower"]["n_theta"] == 64
    assert _same_bits(cols["weights"], np.ascontiguousarray(lower.matrix))
    assert np.array_equal(cols["ring"], lower.indices[:, 0])
    assert np.all(np.isinf(cols["r"][cols["ring"] == 0]))
    # negative zero survives the text form
    assert np.array_equal(np.signbit(cols["weights"].imag), np.signbit(lower.matrix.imag))


def test_hierarchy_csv_and_children_table(tmp_path, toy_hier):
    path, kids = export_hierarchy_csv(toy_hier, tmp_path / "hier.csv")
    meta, cols = read_codebook_csv(path)
    assert cols["weights"].shape[0] == sum(toy_hier.level_sizes())
    assert sorted(set(cols["level"])) == list(range(1, 7))
    lines = kids.read_text().splitlines()
    assert lines[1] == "level,parent,child"
    assert len(lines) - 2 == sum(k.size for links in toy_hier.children for k in links)
    assert json.loads(lines[0][2:])["format"] == 1


def test_read_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("level,ring\n")
    with pytest.raises(OSError):
        read_codebook_csv(bad)
    with pytest.raises(OSError):
        read_codebook_csv(tmp_path / "missing.csv")
    with pytest.raises(OSError):
        load_lower(tmp_path / "missing.npz")
