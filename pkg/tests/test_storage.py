import numpy as np

from radnls.grid import GridSpec, RadialField
from radnls.storage import (load_field, load_field_csv, load_table_csv,
                            save_field, save_field_csv, save_table_csv)

from conftest import random_field


def test_field_binary_roundtrip_bit_exact(tmp_path):
    g = GridSpec(5, 37.5, 300)
    f = random_field(g, seed=5)
    p = tmp_path / "field.npz"
    save_field(p, f)
    back = load_field(p)
    assert back.grid == g
    assert np.array_equal(back.values, f.values)   # bit-exact


def test_field_csv_roundtrip(tmp_path):
    g = GridSpec(4, 12.0, 64)
    f = random_field(g, seed=6)
    p = tmp_path / "field.csv"
    save_field_csv(p, f)
    back = load_field_csv(p)
    assert back.grid == g
    assert np.array_equal(back.values, f.values)   # repr round-trips doubles


def test_table_roundtrip(tmp_path):
    cols = {"t": np.linspace(0, 1, 11), "v": np.geomspace(1, 2, 11)}
    p = tmp_path / "table.csv"
    save_table_csv(p, cols)
    back = load_table_csv(p)
    assert set(back) == {"t", "v"}
    assert np.array_equal(back["t"], cols["t"])
    assert np.array_equal(back["v"], cols["v"])
