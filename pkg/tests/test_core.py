import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsct.core import (ChirpGrid, FreqGrid, InvalidArgument, InvalidData, Signal, TFCVolume,
                       TimeGrid, VolumeWriter, make_grids, project_volume, read_signal_csv,
                       read_volume, write_plane_csv, write_signal_csv, write_volume)


def test_grid_formulas():
    g = make_grids(100, 600, 100)
    assert g.freq.df == 1.0
    assert g.chirp.dc == 2.0


def test_grid_small_example():
    g = make_grids(64, 10, 128, alpha=1)
    assert g.freq.df == 0.5
    assert g.chirp.dc == 0.5
    assert np.array_equal(g.freq.ticks[:3], [0, 0.5, 1.0])
    assert np.all(g.freq.ticks >= 0)


@pytest.mark.parametrize("kw", [dict(alpha=0), dict(alpha=-1), dict(alpha=1.5)])
def test_grid_bad_alpha(kw):
    with pytest.raises(InvalidArgument):
        make_grids(100, 10, 64, **kw)


@pytest.mark.parametrize("fs,N", [(0, 64), (-1, 64), (100, 0), (100, -4)])
def test_grid_bad_fs_or_N(fs, N):
    with pytest.raises(InvalidArgument):
        make_grids(fs, 10, N)


def test_default_profile_grids():
    g = make_grids(100, 600, 512)
    assert g.freq.count == 256
    assert g.chirp.count == 513 and g.chirp.ticks[g.chirp.half] == 0.0
    assert g.chirp.c_max == pytest.approx(100 ** 2 / 512)
    # squeeze bins of 1 Hz and 1 Hz/s covering [0, f_max] and [-c_max, c_max]
    assert g.sq_freq.df == 1.0 and g.sq_freq.count == 51
    assert g.sq_chirp.count == 41 and g.sq_chirp.ticks[20] == 0.0


def test_cmax_override():
    g = make_grids(100, 600, 512, c_max=25)
    assert g.chirp.c_max >= 25
    assert g.chirp.c_max - 25 < g.chirp.dc


@given(st.integers(0, 400), st.floats(0.01, 3.0))
def test_freq_round_trip(k, df):
    grid = FreqGrid(df, 401)
    assert grid.index_of(grid.ticks[k]) == k


@given(st.integers(0, 200), st.floats(0.01, 3.0))
def test_chirp_round_trip(k, dc):
    grid = ChirpGrid(dc, 100)
    assert grid.index_of(grid.ticks[k]) == k


def test_signal_invariants():
    s = Signal([1, 2, 3], fs=4.0, t0=0.5)
    assert np.array_equal(s.times, 0.5 + np.arange(3) / 4.0)
    with pytest.raises(InvalidArgument):
        Signal([], fs=1)
    with pytest.raises(InvalidArgument):
        Signal([1], fs=0)
    with pytest.raises(ValueError):
        s.samples[0] = 5


def _vol(data, kind="CT", dc=0.5):
    n, F, C = data.shape
    return TFCVolume(data, TimeGrid(n, 0.01), FreqGrid(1.0, F), ChirpGrid(dc, (C - 1) // 2), kind)


def test_project_single_entry():
    d = np.zeros((3, 4, 5), complex)
    d[1, 2, 3] = 3 - 4j
    p = project_volume(_vol(d))
    expect = np.zeros((3, 4))
    expect[1, 2] = 5 * 0.5
    assert np.array_equal(p.data, expect)


def test_project_zero():
    assert not project_volume(_vol(np.zeros((2, 3, 3)))).data.any()


def test_project_matches_naive_sum():
    rng = np.random.default_rng(1)
    d = rng.normal(size=(4, 4, 5)) + 1j * rng.normal(size=(4, 4, 5))
    p = project_volume(_vol(d, dc=0.3)).data
    naive = np.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            for k in range(5):
                naive[i, j] += abs(d[i, j, k]) * 0.3
    assert np.max(np.abs(p - naive)) < 1e-12


def test_project_nan():
    d = np.zeros((1, 2, 3))
    d[0, 0, 0] = np.nan
    with pytest.raises(InvalidData):
        project_volume(_vol(d))


@settings(max_examples=30)
@given(st.floats(0.1, 10))
def test_project_scaling(c):
    d = np.random.default_rng(7).normal(size=(2, 3, 3))
    a = project_volume(_vol(c * d)).data
    b = c * project_volume(_vol(d)).data
    assert np.allclose(a, b, rtol=1e-13, atol=0)


def test_ideal_kind_rejects_negative():
    with pytest.raises(InvalidData):
        _vol(-np.ones((1, 1, 1)), kind="IDEAL")


def test_volume_shape_checked():
    with pytest.raises(InvalidArgument):
        TFCVolume(np.zeros((2, 2, 2)), TimeGrid(2, 1), FreqGrid(1, 2), ChirpGrid(1, 1), "CT")


def test_volume_file_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    d = rng.normal(size=(3, 4, 5)) + 1j * rng.normal(size=(3, 4, 5))
    v = _vol(d, kind="HSCT")
    path = tmp_path / "v.bin"
    write_volume(path, v)
    raw = path.read_bytes()
    header, _, _ = raw.partition(b"\n")
    head = json.loads(header)
    assert head == {"kind": "HSCT", "n": 3, "F": 4, "C": 5, "dt": 0.01, "df": 1.0, "dc": 0.5,
                    "t0": 0.0}
    assert (len(header) + 1) % 8 == 0
    assert len(raw) == len(header) + 1 + 3 * 4 * 5 * 8
    back = read_volume(path)
    assert back.kind == "HSCT" and back.chirp == v.chirp and back.time == v.time
    assert np.array_equal(back.data, np.abs(d))
    # payload is little-endian float64 in time, frequency, chirp order
    payload = np.frombuffer(raw[len(header) + 1:], dtype="<f8")
    mag = np.abs(d)
    assert payload[1] == mag[0, 0, 1] and payload[5] == mag[0, 1, 0]


def test_volume_writer_counts_slices(tmp_path):
    with pytest.raises(InvalidData):
        with VolumeWriter(tmp_path / "v", "CT", TimeGrid(2, 1), FreqGrid(1, 2),
                          ChirpGrid(1, 1)) as w:
            w.write(np.zeros((2, 3)))


def test_bad_header(tmp_path):
    p = tmp_path / "junk"
    p.write_bytes(b"not json\n1234")
    with pytest.raises(InvalidData):
        read_volume(p)


def test_signal_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    s = Signal(rng.normal(size=50) + 1j * rng.normal(size=50), fs=100, t0=0.25)
    path = tmp_path / "s.csv"
    write_signal_csv(path, s)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,re,im" and len(lines) == 51
    back = read_signal_csv(path)
    assert back.fs == 100 and back.t0 == 0.25
    assert np.array_equal(back.samples, s.samples)


def test_signal_csv_empty(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("t,re,im\n")
    with pytest.raises(InvalidArgument):
        read_signal_csv(p)


def test_plane_csv(tmp_path):
    v = _vol(np.ones((2, 3, 3)))
    p = tmp_path / "p.csv"
    write_plane_csv(p, project_volume(v))
    rows = p.read_text().splitlines()
    assert rows[0] == "t,0,1,2"
    assert rows[1].split(",")[1:] == ["1.5"] * 3
