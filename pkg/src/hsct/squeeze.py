"""Chirplet transform volumes and synchrosqueezing onto (frequency, chirp) bins."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .chirplet import FrameEngine
from .core import InvalidArgument, TFCVolume, VolumeWriter, make_grids
from .estimators import Thresholds
from .windows import gaussian_bank, half_length

METHODS = ("ct", "sct", "hsct")


def default_threads():
    env = os.environ.get("HSCT_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise InvalidArgument(f"HSCT_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise InvalidArgument("HSCT_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


@dataclass
class Counts:
    """Bookkeeping for one squeezed volume."""

    kept: int = 0
    discarded: int = 0
    skipped: int = 0
    fallback: int = 0
    kept_magnitude: float = 0.0

    def add(self, other):
        self.kept += other.kept
        self.discarded += other.discarded
        self.skipped += other.skipped
        self.fallback += other.fallback
        self.kept_magnitude += other.kept_magnitude

    def as_dict(self):
        return {"kept": self.kept, "discarded": self.discarded, "skipped": self.skipped,
                "fallback": self.fallback, "kept_magnitude": self.kept_magnitude}


@dataclass(frozen=True)
class TransformParams:
    """Transform configuration; defaults are the default-profile settings."""

    N: int = 512
    sigma: float = 1.0
    alpha: float = 1.0
    Q: int | None = None
    c_max: float | None = None
    thresholds: Thresholds = field(default_factory=Thresholds)

    def as_dict(self):
        th = self.thresholds
        return {"N": self.N, "sigma": self.sigma, "alpha": self.alpha, "Q": self.Q,
                "c_max": self.c_max, "gamma1": th.gamma1, "gamma2": th.gamma2,
                "gamma3": th.gamma3, "thres": th.thres}


@dataclass
class SliceResult:
    i: int
    planes: dict
    counts: dict


class Transform:
    """All three representations of one signal, one time slice at a time.

    A slice holds the chirplet coefficients of every chirp rate at time
    ``t_i``; the squeezing is local to the slice, so slices are computed
    independently (and in parallel) and merged in time order.
    """

    def __init__(self, signal, bank, grids, thresholds=Thresholds(), use_numba=None):
        if grids.time.n != signal.n:
            raise InvalidArgument("grids were built for a different sample count")
        if grids.N < bank.length:
            raise InvalidArgument(f"N={grids.N} is shorter than the window length {bank.length}")
        self.signal = signal
        self.bank = bank
        self.grids = grids
        self.thresholds = thresholds
        self.use_numba = use_numba
        self.engine = FrameEngine(signal, bank, grids.chirp.ticks, grids.N, grids.freq.count)
        a = grids.alpha
        # Riemann weight of one input bin, divided by the box-mollifier area
        self.weight = grids.freq.df * grids.chirp.dc / (a * a)

    @classmethod
    def configure(cls, signal, params=TransformParams(), use_numba=None):
        grids = make_grids(signal.fs, signal.n, params.N, params.alpha, params.c_max, signal.t0)
        Q = params.Q if params.Q is not None else half_length(signal.dt, params.sigma, params.N)
        bank = gaussian_bank(Q, signal.dt, params.sigma)
        return cls(signal, bank, grids, params.thresholds, use_numba)

    @property
    def Q(self):
        return self.bank.Q

    def boundary(self, i):
        """True when the window at ``t_i`` overruns the signal."""
        return i < self.Q or i >= self.signal.n - self.Q

    def ingredients(self, i):
        """``(T^(g), ref, (mu2, om2, theta, mu3, om3, flags))`` for time ``i``.

        Arrays are ``(C, F)``; ``ref`` is the slice maximum of ``|T^(g)|``.
        """
        stack = self.engine.stack(i)
        T00 = stack[0]
        ref = float(np.abs(T00).max())
        ing = _kernels.slice_ingredients(stack, self.engine.xi, self.engine.lams,
                                         self.thresholds, ref, self.use_numba)
        return T00, ref, ing

    def compute(self, i, methods=METHODS):
        """Planes ``(F, C)`` for the requested methods at time index ``i``."""
        g = self.grids
        planes, counts = {}, {}
        if "sct" in methods or "hsct" in methods:
            T00, ref, (mu2, om2, _, mu3, om3, flags) = self.ingredients(i)
            strong = np.abs(T00) > self.thresholds.thres * ref
            keep = strong & ((flags & _kernels.SCT_VALID) != 0)
            for m, mu, om in (("sct", mu2, om2), ("hsct", mu3, om3)):
                if m not in methods:
                    continue
                out = np.zeros((g.sq_freq.count, g.sq_chirp.count), complex)
                raw = np.zeros(3, np.int64)
                _kernels.accumulate(T00, om, mu, keep, self.weight, g.sq_freq.df,
                                    g.sq_chirp.dc, g.sq_chirp.half, out, raw, self.use_numba)
                c = Counts(int(raw[0]), int(raw[1]), int(raw[2]))
                if m == "hsct":
                    c.fallback = int(np.count_nonzero(keep & ((flags & _kernels.THIRD) == 0)))
                c.kept_magnitude = _kept_magnitude(T00, om, mu, keep, self.weight, out.shape,
                                                   g.sq_freq.df, g.sq_chirp.dc, g.sq_chirp.half)
                planes[m], counts[m] = out, c
        else:
            T00 = None
        if "ct" in methods:
            T00 = self.engine.moments(i)[0] if T00 is None else T00
            planes["ct"] = np.ascontiguousarray(T00.T)
            counts["ct"] = Counts()
        return SliceResult(i, planes, counts)

    def slices(self, methods=METHODS, threads=None, indices=None):
        """Yield ``SliceResult`` in ascending time order."""
        for m in methods:
            if m not in METHODS:
                raise InvalidArgument(f"unknown method {m!r}")
        idx = range(self.signal.n) if indices is None else list(indices)
        threads = default_threads() if threads is None else int(threads)
        if threads < 1:
            raise InvalidArgument("threads must be >= 1")
        if threads == 1:
            for i in idx:
                yield self.compute(i, methods)
            return
        idx = list(idx)
        chunk = 4 * threads
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for start in range(0, len(idx), chunk):
                part = idx[start:start + chunk]
                yield from pool.map(lambda i: self.compute(i, methods), part)

    def volume_grids(self, method):
        g = self.grids
        if method == "ct":
            return g.time, g.freq, g.chirp
        return g.time, g.sq_freq, g.sq_chirp

    def meta(self):
        g = self.grids
        return {"N": g.N, "alpha": g.alpha, "sigma": self.bank.sigma, "Q": self.Q,
                "fs": g.fs, "c_max": g.chirp.c_max, "gamma1": self.thresholds.gamma1,
                "gamma2": self.thresholds.gamma2, "gamma3": self.thresholds.gamma3,
                "thres": self.thresholds.thres}

    def volumes(self, methods=METHODS, threads=None, magnitude=False):
        """Materialise full volumes (memory: n * F * C per method)."""
        data, totals = {}, {m: Counts() for m in methods}
        for m in methods:
            _, fg, cg = self.volume_grids(m)
            dtype = float if magnitude else complex
            data[m] = np.zeros((self.signal.n, fg.count, cg.count), dtype)
        for res in self.slices(methods, threads):
            for m in methods:
                data[m][res.i] = np.abs(res.planes[m]) if magnitude else res.planes[m]
                totals[m].add(res.counts[m])
        out = {}
        for m in methods:
            meta = dict(self.meta(), counts=totals[m].as_dict())
            out[m] = TFCVolume(data[m], *self.volume_grids(m), kind=m.upper(), meta=meta)
        return out

    def write(self, paths, threads=None):
        """Stream magnitudes of each method to its binary file; return counts."""
        methods = tuple(paths)
        totals = {m: Counts() for m in methods}
        writers = {m: VolumeWriter(p, m.upper(), *self.volume_grids(m)) for m, p in paths.items()}
        try:
            for res in self.slices(methods, threads):
                for m in methods:
                    writers[m].write(res.planes[m])
                    totals[m].add(res.counts[m])
        finally:
            for w in writers.values():
                w.close()
        return totals


def _kept_magnitude(T00, om, mu, keep, weight, shape, a_f, a_c, half):
    fo = om.real / a_f + 0.5
    co = mu.real / a_c + 0.5 + half
    with np.errstate(invalid="ignore"):
        inside = keep & (fo >= 0) & (fo < shape[0]) & (co >= 0) & (co < shape[1])
    return float(np.abs(T00[inside]).sum() * abs(weight))


def ct_volume(signal, bank, grids, threads=None):
    """Chirplet transform ``T^(g)`` on the native (frequency, chirp) grid."""
    return Transform(signal, bank, grids).volumes(("ct",), threads)["ct"]


def squeeze_volume(signal, bank, grids, mode, thresholds=Thresholds(), threads=None):
    """Synchrosqueezed volume, ``mode`` in {"SCT", "HSCT"}."""
    m = str(mode).lower()
    if m not in ("sct", "hsct"):
        raise InvalidArgument(f"mode must be SCT or HSCT, got {mode!r}")
    return Transform(signal, bank, grids, thresholds).volumes((m,), threads)[m]


def ideal_plane(modes, t, freq, chirp):
    """Ideal (frequency, chirp) slice at time ``t`` and the count of off-grid modes."""
    plane = np.zeros((freq.count, chirp.count))
    off = 0
    for mode in modes:
        amp = mode.amplitude_at(t)
        if amp == 0:
            continue
        d1, d2, _ = mode.derivatives(t)
        j = freq.index_of(d1)
        k = chirp.index_of(d2)
        if 0 <= j < freq.count and 0 <= k < chirp.count:
            plane[j, k] += abs(amp)
        else:
            off += 1
    return plane, off


def ideal_volume(modes, time, freq, chirp):
    """Amplitude deposited at the nearest ``(phi', phi'')`` bin of each mode."""
    data = np.zeros((time.n, freq.count, chirp.count))
    off = 0
    for i, t in enumerate(time.ticks):
        data[i], o = ideal_plane(modes, t, freq, chirp)
        off += o
    return TFCVolume(data, time, freq, chirp, "IDEAL", {"off_grid": off})


def with_thresholds(params, **kw):
    return replace(params, thresholds=replace(params.thresholds, **kw))
