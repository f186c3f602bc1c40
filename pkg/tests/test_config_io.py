"""Config parsing (full error collection) and binary/CSV round trips."""

import numpy as np
import pytest

from oldb2d.config import (ConfigError, build_initial, parse_config,
                           perturb_state, smooth_noise)
from oldb2d.snapshot_io import (BASE_COLUMNS, COMPARE_COLUMNS, MAGIC,
                                SnapshotFormatError, read_snapshot,
                                write_snapshot, write_timeseries)
from oldb2d.state import State

from conftest import periodic_grid, random_smooth_state


MINIMAL = """
[grid]
nx = 16
ny = 16
"""


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.grid.nx == 16 and cfg.grid.boundary_mode == "periodic"
    assert cfg.params.gamma == 2.0
    assert cfg.preset == "uniform"
    assert cfg.cfl == 0.4 and cfg.dt is None
    assert cfg.sup_rho_threshold is None  # "auto"
    assert cfg.formats == ("csv", "snapshots")


def test_missing_mandatory_keys():
    with pytest.raises(ConfigError) as ei:
        parse_config("[grid]\nlx = 1.0\n")
    msg = str(ei.value)
    assert "'nx'" in msg and "'ny'" in msg


def test_error_collection_reports_everything_at_once():
    text = """
[grid]
nx = 16
ny = 16
[params]
gamma = 1.0
mu_s = -2.0
[time]
cfl = 1.5
[diagnostics]
alpha = 5.0
[initial]
preset = vortex
[nosuchsection]
x = 1
"""
    with pytest.raises(ConfigError) as ei:
        parse_config(text)
    errs = ei.value.errors
    joined = "; ".join(errs)
    assert "gamma must exceed 1" in joined
    assert "mu_s must be positive" in joined
    assert "cfl" in joined
    assert "alpha" in joined
    assert "preset 'vortex'" in joined
    assert "unknown section [nosuchsection]" in joined
    assert len(errs) >= 6


def test_strict_flag_controls_unknown_keys():
    text = MINIMAL + "[time]\nbogus = 1\n"
    with pytest.raises(ConfigError):
        parse_config(text, strict=True)
    cfg = parse_config(text, strict=False)
    assert cfg.t_end == 0.1


def test_invalid_values_are_named():
    text = MINIMAL + "[time]\nt_end = soon\n[diagnostics]\nsup_rho_threshold = big\n"
    with pytest.raises(ConfigError) as ei:
        parse_config(text)
    msg = str(ei.value)
    assert "'soon'" in msg and "'big'" in msg


def test_threshold_variants():
    assert parse_config(MINIMAL + "[diagnostics]\nsup_rho_threshold = auto\n") \
        .sup_rho_threshold is None
    assert parse_config(MINIMAL + "[diagnostics]\nsup_rho_threshold = inf\n") \
        .sup_rho_threshold == np.inf
    assert parse_config(MINIMAL + "[diagnostics]\nsup_rho_threshold = 50\n") \
        .sup_rho_threshold == 50.0
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "[diagnostics]\nsup_rho_threshold = -1\n")


def test_build_initial_presets(prm):
    for preset in ("uniform", "gaussian-bump", "shear-layer"):
        cfg = parse_config(MINIMAL + f"[initial]\npreset = {preset}\n")
        state, ms = build_initial(cfg)
        assert ms is None
        assert np.min(state.rho) > 0
        assert state.t11.shape == cfg.grid.shape
    cfg = parse_config(MINIMAL + "[initial]\npreset = mms:periodic-smooth\n")
    state, ms = build_initial(cfg)
    assert ms is not None and ms.name == "periodic-smooth"


def test_perturbation_deterministic_and_scaled(prm):
    g = periodic_grid(16)
    base = State.uniform(g, 1.0, 1.0, k=prm.k)
    a = perturb_state(base, 1e-3, seed=5, k=prm.k)
    b = perturb_state(base, 1e-3, seed=5, k=prm.k)
    for x, y in zip(a.arrays(), b.arrays()):
        assert np.array_equal(x, y)
    c = perturb_state(base, 1e-4, seed=5, k=prm.k)
    da = np.max(np.abs(a.rho - base.rho))
    dc = np.max(np.abs(c.rho - base.rho))
    assert da == pytest.approx(10.0 * dc, rel=1e-10)


def test_smooth_noise_normalized(prm):
    g = periodic_grid(32)
    n = smooth_noise(g, np.random.default_rng(9))
    assert np.max(np.abs(n)) == pytest.approx(1.0)


def test_snapshot_round_trip_bitwise(tmp_path, prm):
    g = periodic_grid(12)
    s = random_smooth_state(g, prm, np.random.default_rng(21))
    s.t = 0.375
    p = tmp_path / "snap.bin"
    write_snapshot(p, s)
    r = read_snapshot(p)
    assert r.t == s.t
    assert r.grid.nx == g.nx and r.grid.dx == g.dx
    for a, b in zip(r.arrays(), s.arrays()):
        assert np.array_equal(a, b)
    # writing the read-back state reproduces the file byte for byte
    p2 = tmp_path / "snap2.bin"
    write_snapshot(p2, r)
    assert p.read_bytes() == p2.read_bytes()


def test_snapshot_bad_magic(tmp_path, prm):
    g = periodic_grid(8)
    s = State.uniform(g, 1.0, 1.0, k=prm.k)
    p = tmp_path / "snap.bin"
    write_snapshot(p, s)
    data = bytearray(p.read_bytes())
    data[:4] = b"JUNK"
    p.write_bytes(bytes(data))
    with pytest.raises(SnapshotFormatError, match="magic"):
        read_snapshot(p)


def test_snapshot_unknown_version(tmp_path, prm):
    g = periodic_grid(8)
    s = State.uniform(g, 1.0, 1.0, k=prm.k)
    p = tmp_path / "snap.bin"
    write_snapshot(p, s)
    data = bytearray(p.read_bytes())
    data[7] = 99  # version field follows the 7-byte magic
    p.write_bytes(bytes(data))
    with pytest.raises(SnapshotFormatError, match="version"):
        read_snapshot(p)


def test_snapshot_truncation_reports_byte_counts(tmp_path, prm):
    g = periodic_grid(8)
    s = State.uniform(g, 1.0, 1.0, k=prm.k)
    p = tmp_path / "snap.bin"
    write_snapshot(p, s)
    data = p.read_bytes()
    p.write_bytes(data[:-17])
    with pytest.raises(SnapshotFormatError) as ei:
        read_snapshot(p)
    msg = str(ei.value)
    assert "expected" in msg and "got" in msg
    p.write_bytes(data[:10])
    with pytest.raises(SnapshotFormatError, match="header"):
        read_snapshot(p)
    p.write_bytes(data + b"\x00")
    with pytest.raises(SnapshotFormatError, match="trailing"):
        read_snapshot(p)


def test_timeseries_columns_and_determinism(tmp_path):
    row = {c: 0.1 * i for i, c in enumerate(BASE_COLUMNS)}
    p = tmp_path / "run.csv"
    write_timeseries(p, [row])
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(BASE_COLUMNS)
    assert len(lines) == 2
    p2 = tmp_path / "run2.csv"
    write_timeseries(p2, [row])
    assert p.read_bytes() == p2.read_bytes()
    # empty rows still produce the header
    p3 = tmp_path / "empty.csv"
    write_timeseries(p3, [], compare=True)
    assert p3.read_text().splitlines() == [",".join(COMPARE_COLUMNS)]


def test_timeseries_missing_column(tmp_path):
    row = {c: 0.0 for c in BASE_COLUMNS[:-1]}
    with pytest.raises(ValueError, match="min_eig_tau"):
        write_timeseries(tmp_path / "bad.csv", [row])


def test_csv_values_round_trip_exactly(tmp_path):
    vals = [0.1, 1.0 / 3.0, 1e-300, np.pi]
    row = {c: v for c, v in zip(BASE_COLUMNS, vals + [0.0] * 13)}
    p = tmp_path / "run.csv"
    write_timeseries(p, [row])
    fields = p.read_text().splitlines()[1].split(",")
    for raw, v in zip(fields[:4], vals):
        assert float(raw) == v
