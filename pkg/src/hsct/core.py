"""Shared data model: signals, grids, time-frequency-chirp volumes and IO."""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

KINDS = ("CT", "SCT", "HSCT", "IDEAL")


class InvalidArgument(ValueError):
    """A parameter violates an operation's preconditions."""


class InvalidData(ValueError):
    """Input data cannot be processed (NaN, zero mass, malformed file)."""


def _readonly(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled complex signal.

    Sample ``i`` sits at ``t0 + i / fs``.
    """

    samples: np.ndarray
    fs: float
    t0: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=complex).ravel()
        if x.size == 0:
            raise InvalidArgument("signal has no samples")
        if not (self.fs > 0 and math.isfinite(self.fs)):
            raise InvalidArgument(f"fs must be positive, got {self.fs}")
        object.__setattr__(self, "samples", _readonly(x))
        object.__setattr__(self, "fs", float(self.fs))
        object.__setattr__(self, "t0", float(self.t0))

    @property
    def n(self):
        return self.samples.size

    @property
    def dt(self):
        return 1.0 / self.fs

    @property
    def times(self):
        return self.t0 + np.arange(self.n) / self.fs


@dataclass(frozen=True)
class TimeGrid:
    n: int
    dt: float
    t0: float = 0.0

    @property
    def ticks(self):
        return self.t0 + np.arange(self.n) * self.dt

    def index_of(self, t):
        return int(math.floor((t - self.t0) / self.dt + 0.5))


@dataclass(frozen=True)
class FreqGrid:
    """Non-negative frequency bins ``k * df`` for ``k = 0 .. count-1``."""

    df: float
    count: int

    @property
    def ticks(self):
        return np.arange(self.count) * self.df

    @property
    def f_max(self):
        return (self.count - 1) * self.df

    def index_of(self, xi):
        return int(math.floor(xi / self.df + 0.5))


@dataclass(frozen=True)
class ChirpGrid:
    """Symmetric chirp-rate bins ``(k - half) * dc``; bin ``half`` is exactly 0."""

    dc: float
    half: int

    @property
    def count(self):
        return 2 * self.half + 1

    @property
    def ticks(self):
        return (np.arange(self.count) - self.half) * self.dc

    @property
    def c_max(self):
        return self.half * self.dc

    def index_of(self, lam):
        return int(math.floor(lam / self.dc + 0.5)) + self.half


@dataclass(frozen=True)
class Grids:
    """Input (transform) grids plus the squeeze grids of resolution ``alpha``."""

    fs: float
    N: int
    alpha: float
    time: TimeGrid
    freq: FreqGrid
    chirp: ChirpGrid
    sq_freq: FreqGrid
    sq_chirp: ChirpGrid


def make_grids(fs, n, N, alpha=1.0, c_max=None, t0=0.0):
    """Build time ticks, transform grids and squeeze grids.

    Parameters
    ----------
    fs : float
        Sampling rate in Hz.
    n : int
        Number of samples.
    N : int
        FFT length.  ``df = fs/N`` and ``dc = 2 fs^2 / N^2``.
    alpha : float
        Squeeze bin width, in Hz on the frequency axis and Hz/s on the chirp
        axis.
    c_max : float, optional
        Chirp-axis extent.  Defaults to ``(N/2) * dc = fs^2 / N``.

    Returns
    -------
    Grids
    """
    if not (fs > 0 and math.isfinite(fs)):
        raise InvalidArgument(f"fs must be positive, got {fs}")
    if int(N) != N or N < 1:
        raise InvalidArgument(f"N must be a positive integer, got {N}")
    if not (0 < alpha <= 1):
        raise InvalidArgument(f"alpha must lie in (0, 1], got {alpha}")
    if int(n) != n or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n}")
    N = int(N)
    df = fs / N
    dc = 2.0 * fs * fs / (N * N)
    if c_max is None:
        half = N // 2
    else:
        if not (c_max > 0 and math.isfinite(c_max)):
            raise InvalidArgument(f"c_max must be positive, got {c_max}")
        half = int(math.ceil(c_max / dc - 1e-9))
    freq = FreqGrid(df, (N + 1) // 2)
    chirp = ChirpGrid(dc, half)
    # one squeeze bin per alpha step, both ends of [0, f_max] included
    sq_freq = FreqGrid(float(alpha), int(math.ceil(freq.f_max / alpha - 1e-9)) + 1)
    sq_chirp = ChirpGrid(float(alpha), int(math.ceil(chirp.c_max / alpha - 1e-9)))
    return Grids(float(fs), N, float(alpha), TimeGrid(int(n), 1.0 / fs, float(t0)),
                 freq, chirp, sq_freq, sq_chirp)


@dataclass(frozen=True)
class TFCVolume:
    """Dense time x frequency x chirp array with its grids."""

    data: np.ndarray
    time: TimeGrid
    freq: FreqGrid
    chirp: ChirpGrid
    kind: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown volume kind {self.kind!r}")
        shape = (self.time.n, self.freq.count, self.chirp.count)
        if self.data.shape != shape:
            raise InvalidArgument(f"volume shape {self.data.shape} does not match grids {shape}")
        if self.kind == "IDEAL" and (np.iscomplexobj(self.data) or np.any(self.data < 0)):
            raise InvalidData("ideal volume must be non-negative and real")

    def magnitude(self):
        return np.abs(self.data)

    def chirp_slice(self, t, xi):
        """``(lambda ticks, |v(t, xi, .)|)`` at the nearest time and frequency bins."""
        i = self.time.index_of(t)
        j = self.freq.index_of(xi)
        if not (0 <= i < self.time.n and 0 <= j < self.freq.count):
            raise InvalidArgument(f"(t={t}, xi={xi}) lies outside the volume grids")
        return self.chirp.ticks, np.abs(self.data[i, j, :])


@dataclass(frozen=True)
class TFPlane:
    data: np.ndarray
    time: TimeGrid
    freq: FreqGrid

    def __post_init__(self):
        if self.data.shape != (self.time.n, self.freq.count):
            raise InvalidArgument("plane shape does not match grids")
        if not np.all(np.isfinite(self.data)) or np.any(self.data < 0):
            raise InvalidData("plane entries must be finite and non-negative")


def project_volume(v):
    """Integrate ``|v|`` over the chirp axis (Riemann sum with weight ``dc``)."""
    mag = np.abs(v.data)
    if not np.all(np.isfinite(mag)):
        raise InvalidData("volume contains non-finite values")
    return TFPlane(mag.sum(axis=2) * v.chirp.dc, v.time, v.freq)


# --- binary volume format -------------------------------------------------

def _header_bytes(kind, time, freq, chirp):
    head = {"kind": kind, "n": time.n, "F": freq.count, "C": chirp.count,
            "dt": time.dt, "df": freq.df, "dc": chirp.dc, "t0": time.t0}
    raw = json.dumps(head, sort_keys=True).encode()
    # pad so the float64 payload starts 8-byte aligned
    pad = (-(len(raw) + 1)) % 8
    return raw + b" " * pad + b"\n"


class VolumeWriter:
    """Write a volume's magnitudes one time slice at a time."""

    def __init__(self, path, kind, time, freq, chirp):
        self.path = path
        self.shape = (freq.count, chirp.count)
        self.n = time.n
        self.written = 0
        self._fh = open(path, "wb")
        self._fh.write(_header_bytes(kind, time, freq, chirp))

    def write(self, plane):
        if plane.shape != self.shape:
            raise InvalidArgument(f"slice shape {plane.shape} != {self.shape}")
        np.ascontiguousarray(np.abs(plane), dtype="<f8").tofile(self._fh)
        self.written += 1

    def close(self):
        self._fh.close()
        if self.written != self.n:
            raise InvalidData(f"wrote {self.written} of {self.n} time slices")

    def __enter__(self):
        return self

    def __exit__(self, exc_type, *_):
        if exc_type is None:
            self.close()
        else:
            self._fh.close()


def write_volume(path, v):
    with VolumeWriter(path, v.kind, v.time, v.freq, v.chirp) as w:
        for i in range(v.time.n):
            w.write(v.data[i])


def read_volume(path, mmap=True):
    """Read a binary volume; magnitudes come back as float64."""
    with open(path, "rb") as fh:
        line = fh.readline()
    try:
        head = json.loads(line)
        n, F, C = int(head["n"]), int(head["F"]), int(head["C"])
        kind = head["kind"]
        dt, df, dc, t0 = (float(head[k]) for k in ("dt", "df", "dc", "t0"))
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidData(f"{path}: malformed volume header") from exc
    if C % 2 != 1:
        raise InvalidData(f"{path}: chirp count must be odd")
    offset = len(line)
    if mmap:
        data = np.memmap(path, dtype="<f8", mode="r", offset=offset, shape=(n, F, C))
    else:
        data = np.fromfile(path, dtype="<f8", offset=offset)
        if data.size != n * F * C:
            raise InvalidData(f"{path}: payload size mismatch")
        data = data.reshape(n, F, C)
    return TFCVolume(data, TimeGrid(n, dt, t0), FreqGrid(df, F), ChirpGrid(dc, (C - 1) // 2), kind)


# --- CSV -----------------------------------------------------------------

def write_plane_csv(path, plane):
    ticks = plane.freq.ticks
    with open(path, "w") as fh:
        fh.write("t," + ",".join(f"{x:.17g}" for x in ticks) + "\n")
        for t, row in zip(plane.time.ticks, plane.data):
            fh.write(f"{t:.17g}," + ",".join(f"{x:.17g}" for x in row) + "\n")


def write_signal_csv(path, signal):
    x = signal.samples
    table = np.column_stack([signal.times, x.real, x.imag])
    np.savetxt(path, table, delimiter=",", header="t,re,im", comments="", fmt="%.17g")


def read_signal_csv(path):
    """Read ``t,re,im`` rows; the sampling rate is inferred from the ticks."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # empty file: handled below
            table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise InvalidData(f"{path}: {exc}") from exc
    if table.size == 0:
        raise InvalidArgument(f"{path}: no samples")
    if table.shape[1] != 3:
        raise InvalidData(f"{path}: expected columns t,re,im")
    t = table[:, 0]
    if t.size < 2:
        raise InvalidArgument(f"{path}: need at least two samples to infer fs")
    steps = np.diff(t)
    dt = (t[-1] - t[0]) / (t.size - 1)
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise InvalidData(f"{path}: time ticks are not uniform")
    fs = 1.0 / dt
    # snap to a nearby integer rate so ticks reproduce t0 + i/fs
    if abs(fs - round(fs)) < 1e-6 * fs:
        fs = float(round(fs))
    return Signal(table[:, 1] + 1j * table[:, 2], fs, t[0])
