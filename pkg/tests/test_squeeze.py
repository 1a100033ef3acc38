import numpy as np
import pytest

from hsct import _accel
from hsct._kernels import accumulate
from hsct.core import Signal, TimeGrid, make_grids, read_volume
from hsct.squeeze import (Transform, TransformParams, ct_volume, ideal_plane, ideal_volume,
                          squeeze_volume, with_thresholds)
from hsct.synth import ModeSpec, PolyPhase, builtin, gen
from hsct.windows import gaussian_bank
from oracles import group_sum

# reduced profile: 2 s at 100 Hz, N=128
SMALL = TransformParams(N=128)


def small(name, duration=2.0):
    return gen(builtin(name), 100, duration)[0]


def chirp6(duration=6.0):
    """exp(i pi 6 t^2): frequency 6t, chirp rate 6."""
    return gen([ModeSpec(PolyPhase((0, 0, 3)))], 100, duration)[0]


def test_zero_signal_gives_zero_volumes():
    s = Signal(np.zeros(200), 100)
    tr = Transform.configure(s, SMALL)
    vols = tr.volumes()
    for v in vols.values():
        assert not v.data.any()
    assert vols["hsct"].meta["counts"]["kept"] == 0


def test_threshold_above_everything():
    s = small("x1")
    tr = Transform.configure(s, with_thresholds(SMALL, thres=2.0))
    vols = tr.volumes(("sct", "hsct"))
    g = tr.grids
    for v in vols.values():
        assert not v.data.any()
        c = v.meta["counts"]
        assert c["discarded"] == 0 and c["kept"] == 0
        assert c["skipped"] == s.n * g.freq.count * g.chirp.count


def test_counts_partition_bins():
    s = small("x3")
    tr = Transform.configure(s, SMALL)
    g = tr.grids
    for i in (0, 70, 199):
        for c in tr.compute(i, ("sct", "hsct")).counts.values():
            assert c.kept + c.discarded + c.skipped == g.freq.count * g.chirp.count


def _manual(tr, i, method):
    """Inputs of one slice in the accumulator's (chirp, frequency) order."""
    T00, ref, (mu2, om2, _, mu3, om3, flags) = tr.ingredients(i)
    mu, om = (mu2, om2) if method == "sct" else (mu3, om3)
    keep = (np.abs(T00) > tr.thresholds.thres * ref) & ((flags & 1) != 0)
    g = tr.grids
    fo = np.floor(om.real / g.sq_freq.df + 0.5)
    co = np.floor(mu.real / g.sq_chirp.dc + 0.5) + g.sq_chirp.half
    with np.errstate(invalid="ignore"):
        inside = (keep & (fo >= 0) & (fo < g.sq_freq.count) & (co >= 0)
                  & (co < g.sq_chirp.count))
    vals = T00[inside] * tr.weight
    return vals, fo[inside].astype(int), co[inside].astype(int)


@pytest.mark.parametrize("method", ["sct", "hsct"])
@pytest.mark.parametrize("name", ["x1", "x4"])
def test_accumulation_matches_sequential_oracle_bitwise(name, method):
    s = small(name)
    tr = Transform.configure(s, SMALL)
    g = tr.grids
    for i in (30, 100, 170):
        vals, fi, ci = _manual(tr, i, method)
        ref = group_sum(vals, fi, ci, (g.sq_freq.count, g.sq_chirp.count))
        got = tr.compute(i, (method,)).planes[method]
        assert np.array_equal(got, ref)
        # every kept coefficient lands in exactly one bin
        assert np.abs(got.sum() - vals.sum()) <= 1e-12 * np.abs(vals).sum()


@pytest.mark.parametrize("use_numba", [False, pytest.param(True, marks=pytest.mark.skipif(
    not _accel.numba_enabled(), reason="compiled kernels disabled"))])
def test_complex_mass_conserved_exactly(use_numba):
    # dyadic inputs make every partial sum exact, so totals must agree bit for bit
    rng = np.random.default_rng(5)
    C, F = 40, 60
    T00 = (rng.integers(-2 ** 20, 2 ** 20, (C, F)) + 1j * rng.integers(-2 ** 20, 2 ** 20, (C, F)))
    T00 = T00 / 2 ** 10
    om = rng.uniform(-3, 25, (C, F)) + 0j
    mu = rng.uniform(-12, 12, (C, F)) + 0j
    keep = rng.random((C, F)) < 0.8
    out = np.zeros((21, 21), complex)
    counts = np.zeros(3, np.int64)
    accumulate(T00, om, mu, keep, 1.0, 1.0, 1.0, 10, out, counts, use_numba)
    inside = keep & (np.floor(om.real + 0.5) >= 0) & (np.floor(om.real + 0.5) < 21)
    inside &= (np.floor(mu.real + 0.5) + 10 >= 0) & (np.floor(mu.real + 0.5) + 10 < 21)
    assert out.sum() == T00[inside].sum()
    assert counts.tolist() == [inside.sum(), (keep & ~inside).sum(), (~keep).sum()]


@pytest.mark.skipif(not _accel.numba_enabled(), reason="compiled kernels disabled")
def test_backends_accumulate_identically():
    rng = np.random.default_rng(8)
    C, F = 64, 80
    T00 = rng.normal(size=(C, F)) + 1j * rng.normal(size=(C, F))
    om = rng.uniform(0, 40, (C, F)) + 0j
    mu = rng.normal(0, 8, (C, F)) + 0j
    om[0, :5] = np.nan
    keep = rng.random((C, F)) < 0.9
    outs = []
    for flag in (True, False):
        out = np.zeros((41, 31), complex)
        counts = np.zeros(3, np.int64)
        accumulate(T00, om, mu, keep, 0.37, 1.0, 1.0, 15, out, counts, flag)
        outs.append((out, counts))
    assert np.array_equal(outs[0][0], outs[1][0])
    assert np.array_equal(outs[0][1], outs[1][1])


def test_pure_chirp_concentrates():
    s = chirp6()
    tr = Transform.configure(s)
    g = tr.grids
    for i in range(tr.Q, s.n - tr.Q, 10):
        out = np.abs(tr.compute(i, ("hsct",)).planes["hsct"])
        j, k = g.sq_freq.index_of(6 * s.times[i]), g.sq_chirp.index_of(6.0)
        assert out[j - 1:j + 2, k - 1:k + 2].sum() >= 0.9 * out.sum()


def test_ct_chirp_argmax():
    s = chirp6()
    tr = Transform.configure(s)
    g = tr.grids
    for i in range(tr.Q, s.n - tr.Q, 15):
        ct = np.abs(tr.compute(i, ("ct",)).planes["ct"])
        j = g.freq.index_of(6 * s.times[i])
        assert np.argmax(ct[j]) == g.chirp.index_of(6.0)


def test_ct_volume_linear_over_modes():
    m1, m2 = builtin("x1")
    s1, _ = gen([m1], 100, 2.0)
    s2, _ = gen([m2], 100, 2.0)
    s12 = Signal(s1.samples + s2.samples, 100)
    bank = gaussian_bank(63, 0.01)
    g = make_grids(100, 200, 128)
    a, b, c = (ct_volume(x, bank, g, threads=1).data for x in (s1, s2, s12))
    assert np.abs(c - a - b).max() <= 1e-12 * np.abs(c).max()


def test_squeeze_volume_wrapper_matches_transform():
    s = small("x2")
    tr = Transform.configure(s, SMALL)
    v = squeeze_volume(s, tr.bank, tr.grids, "HSCT", threads=1)
    assert v.kind == "HSCT"
    assert np.array_equal(v.data, tr.volumes(("hsct",), threads=1)["hsct"].data)
    with pytest.raises(ValueError):
        squeeze_volume(s, tr.bank, tr.grids, "CT")


def test_ideal_examples():
    s, modes = gen(builtin("x11"))
    tr = Transform.configure(s)
    fg, cg = tr.grids.sq_freq, tr.grids.sq_chirp
    plane, off = ideal_plane(modes, 1.0, fg, cg)
    assert off == 0 and plane.sum() == 1.0
    assert plane[fg.index_of(8), cg.index_of(8)] == 1.0
    plane, _ = ideal_plane(builtin("x2"), 3.0, fg, cg)
    assert plane[fg.index_of(12), cg.index_of(-12)] == 1.0 and plane.sum() == 1.0
    silent = ModeSpec(PolyPhase((0, 5)), amplitude=0.0)
    plane, off = ideal_plane([silent], 1.0, fg, cg)
    assert not plane.any() and off == 0


def test_ideal_volume_counts_off_grid():
    mode = ModeSpec(PolyPhase((0, 80)))  # 80 Hz is beyond f_max = 50 Hz
    s, _ = gen([mode], 100, 1.0)
    tr = Transform.configure(s, SMALL)
    v = ideal_volume([mode], TimeGrid(s.n, s.dt), tr.grids.sq_freq, tr.grids.sq_chirp)
    assert v.kind == "IDEAL" and not v.data.any() and v.meta["off_grid"] == s.n


@pytest.mark.parametrize("name", ["x1", "x3"])
def test_threshold_monotone(name):
    s = small(name)
    totals = []
    for thres in (0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.5):
        tr = Transform.configure(s, with_thresholds(SMALL, thres=thres))
        c = [tr.compute(i, ("hsct",)).counts["hsct"] for i in range(0, s.n, 7)]
        totals.append((sum(x.kept_magnitude for x in c), sum(x.kept for x in c)))
    for (m0, k0), (m1, k1) in zip(totals, totals[1:]):
        assert m1 <= m0 and k1 <= k0
    assert totals[-1][0] < totals[0][0]


def test_sct_hsct_coincide_on_quadratic_phase():
    # boundary frames see a truncated chirp, which is not quadratic-phase data
    s, _ = gen(builtin("x11"))
    tr = Transform.configure(s, TransformParams(sigma=0.8))
    num = den = 0.0
    for r in tr.slices(("sct", "hsct"), threads=1, indices=range(tr.Q, s.n - tr.Q)):
        a, b = r.planes["sct"], r.planes["hsct"]
        num += np.abs(a - b).sum()
        den += np.abs(a).sum()
    assert num <= 1e-6 * den


def test_thread_count_does_not_change_files(tmp_path):
    s = small("x4")
    tr = Transform.configure(s, SMALL)
    runs = []
    for threads in (1, 4):
        paths = {m: str(tmp_path / f"{m}-{threads}.bin") for m in ("ct", "sct", "hsct")}
        counts = tr.write(paths, threads=threads)
        runs.append(({m: open(p, "rb").read() for m, p in paths.items()},
                     {m: c.as_dict() for m, c in counts.items()}))
    assert runs[0] == runs[1]
    v = read_volume(tmp_path / "hsct-1.bin")
    assert v.data.shape == (s.n, tr.grids.sq_freq.count, tr.grids.sq_chirp.count)


def test_slices_in_time_order():
    s = small("x2", 1.0)
    tr = Transform.configure(s, SMALL)
    assert [r.i for r in tr.slices(("ct",), threads=3)] == list(range(s.n))
