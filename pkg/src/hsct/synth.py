"""Synthetic multicomponent signals with analytic phase derivatives."""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .core import InvalidArgument, Signal

PI = math.pi


class Phase:
    """Phase function (in cycles) with its first three derivatives."""

    def value(self, t):
        raise NotImplementedError

    def derivatives(self, t):
        raise NotImplementedError


@dataclass(frozen=True)
class PolyPhase(Phase):
    """``sum_p coeffs[p] (t - shift)^p``."""

    coeffs: tuple
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise InvalidArgument("polynomial phase needs at least one coefficient")

    def value(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t) - self.shift, self.coeffs)

    def derivatives(self, t):
        s = np.asarray(t, dtype=float) - self.shift
        c = np.array(self.coeffs)
        out = []
        for _ in range(3):
            c = np.polynomial.polynomial.polyder(c)
            out.append(np.polynomial.polynomial.polyval(s, c) + 0.0 * s)
        return tuple(out)


@dataclass(frozen=True)
class CosPhase(Phase):
    """``amp cos(omega (t - shift)) + slope t + offset``."""

    amp: float
    omega: float
    shift: float = 0.0
    slope: float = 0.0
    offset: float = 0.0

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return self.amp * np.cos(self.omega * (t - self.shift)) + self.slope * t + self.offset

    def derivatives(self, t):
        x = self.omega * (np.asarray(t, dtype=float) - self.shift)
        a, w = self.amp, self.omega
        return (-a * w * np.sin(x) + self.slope,
                -a * w * w * np.cos(x),
                a * w ** 3 * np.sin(x))


@dataclass(frozen=True)
class GaussBumpPhase(Phase):
    """``slope t + amp exp(-(t - center)^2 / (2 width^2)) + offset``."""

    slope: float
    amp: float
    center: float = 0.0
    width: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise InvalidArgument("gauss_bump width must be positive")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        s = (t - self.center) / self.width
        return self.slope * t + self.amp * np.exp(-0.5 * s * s) + self.offset

    def derivatives(self, t):
        w = self.width
        s = (np.asarray(t, dtype=float) - self.center) / w
        e = self.amp * np.exp(-0.5 * s * s)
        return (self.slope - s * e / w,
                (s * s - 1) * e / w ** 2,
                s * (3 - s * s) * e / w ** 3)


def _self_check(phase, probes=(0.37, 1.9, 3.3, 5.1), h=1e-3):
    """Compare analytic derivatives with central differences, O(h^2)."""
    for t in probes:
        v = [float(phase.value(t + k * h)) for k in (-1, 0, 1)]
        d = [np.array(phase.derivatives(t + k * h), dtype=float) for k in (-1, 0, 1)]
        fd = [(v[2] - v[0]) / (2 * h), (d[2][0] - d[0][0]) / (2 * h), (d[2][1] - d[0][1]) / (2 * h)]
        for order, (est, ref) in enumerate(zip(fd, d[1]), start=1):
            if abs(est - ref) > 1e-4 * (1 + abs(ref)) + 1e-6 * (1 + abs(v[1])):
                raise InvalidArgument(
                    f"phase derivative of order {order} disagrees with finite differences at t={t}")


@dataclass(frozen=True)
class ModeSpec:
    """One component ``A(t) exp(2 pi i phi(t))``."""

    phase: Phase
    amplitude: float | Callable = 1.0

    def __post_init__(self):
        _self_check(self.phase)

    def amplitude_at(self, t):
        a = self.amplitude
        return a(t) if callable(a) else a

    def derivatives(self, t):
        return self.phase.derivatives(t)

    def samples(self, t):
        t = np.asarray(t, dtype=float)
        amp = self.amplitude_at(t)
        return amp * np.exp(2j * PI * self.phase.value(t))


def analytic_ridge(mode, t):
    """``(phi'(t), phi''(t), phi'''(t))`` of one mode."""
    return tuple(float(d) for d in mode.derivatives(float(t)))


def gen(modes, fs=100.0, duration=6.0, t0=0.0):
    """Sample ``sum_k A_k exp(2 pi i phi_k)`` at ``t0 + i/fs``; returns ``(Signal, modes)``."""
    if not (fs > 0 and duration > 0):
        raise InvalidArgument("fs and duration must be positive")
    n = int(round(fs * duration))
    if n < 1:
        raise InvalidArgument("fs * duration gives no samples")
    t = t0 + np.arange(n) / fs
    x = np.zeros(n, dtype=complex)
    for m in modes:
        x += m.samples(t)
    return Signal(x, fs, t0), list(modes)


def _poly(*coeffs, shift=0.0):
    return ModeSpec(PolyPhase(coeffs, shift))


def builtin(name):
    """Mode list of a named benchmark signal (``x1`` .. ``x4``)."""
    if name == "x1":
        return [_poly(0, 0, 4), _poly(0, 24 + 6 * PI, -PI)]
    if name == "x2":
        return [ModeSpec(GaussBumpPhase(12, 12, center=3, width=1))]
    if name == "x3":
        return [_poly(0, 0, 8, shift=2.2),
                ModeSpec(CosPhase(-2, 2 * PI / 3, shift=2, slope=13, offset=-26))]
    if name == "x4":
        return [_poly(180, 40, -7.5, 5 / 6),
                _poly(5 / 6, 17.5, 7.5, -5 / 6),
                _poly(-6 * PI - 22.5, 26 + 6 * PI, -3.5)]
    if name in ("x11", "x12", "x31", "x32", "x41", "x42", "x43"):
        parent = builtin(name[:2])
        return [parent[int(name[2]) - 1]]
    raise InvalidArgument(f"unknown signal {name!r}; expected one of {', '.join(BUILTIN)}")


BUILTIN = ("x1", "x2", "x3", "x4")


@dataclass(frozen=True)
class Crossing:
    t: float
    xi: float
    rates: tuple


def crossing(a, b, lo, hi):
    """Time where modes ``a`` and ``b`` share an instantaneous frequency in ``[lo, hi]``."""
    t = brentq(lambda s: a.derivatives(s)[0] - b.derivatives(s)[0], lo, hi, xtol=1e-14)
    return Crossing(t, float(a.derivatives(t)[0]),
                    (float(a.derivatives(t)[1]), float(b.derivatives(t)[1])))


def x3_crossing():
    m1, m2 = builtin("x3")
    return crossing(m1, m2, 3.0, 3.3)


_FAMILIES = {
    "poly": lambda p: PolyPhase(tuple(p["coeffs"]), float(p.get("shift", 0.0))),
    "cos": lambda p: CosPhase(float(p["amp"]), float(p["omega"]), float(p.get("shift", 0.0)),
                              float(p.get("slope", 0.0)), float(p.get("offset", 0.0))),
    "gauss_bump": lambda p: GaussBumpPhase(float(p["slope"]), float(p["amp"]),
                                           float(p.get("center", 0.0)), float(p.get("width", 1.0)),
                                           float(p.get("offset", 0.0))),
}


def modes_from_config(items):
    """Modes from a parsed JSON list of ``{amplitude_const, phase: {type, params}}``."""
    if not isinstance(items, list) or not items:
        raise InvalidArgument("mode config must be a non-empty list")
    modes = []
    for n, item in enumerate(items):
        try:
            ph = item["phase"]
            kind = ph["type"]
            build = _FAMILIES[kind]
            phase = build(ph.get("params", {}))
            amp = float(item.get("amplitude_const", 1.0))
        except KeyError as exc:
            raise InvalidArgument(f"mode {n}: missing or unknown field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise InvalidArgument(f"mode {n}: {exc}") from exc
        modes.append(ModeSpec(phase, amp))
    return modes
