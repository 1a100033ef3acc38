"""Chirplet-transform coefficients per time frame and their exact t-derivatives."""

import math
from dataclasses import dataclass

import numpy as np

from .core import InvalidArgument
from .windows import INDEX, PAIRS

TWO_PI_I = 2j * math.pi


def chirp_factor(lam):
    """``2 pi i lam`` shaped to broadcast against the frequency axis."""
    lam = np.asarray(lam, dtype=float)
    return TWO_PI_I * (lam[..., None] if lam.ndim else lam)


@dataclass(frozen=True)
class CTFrame:
    """Coefficients ``T^(t^b g^(a))(t_i, xi, lam)`` for every window pair.

    ``coef[(a, b)]`` has shape ``lam.shape + (F,)``: one row per chirp rate
    when several share the frame.
    """

    i: int
    lam: np.ndarray
    xi: np.ndarray
    coef: dict

    @property
    def X(self):
        return TWO_PI_I * self.xi

    @property
    def L(self):
        return chirp_factor(self.lam)


@dataclass(frozen=True)
class FrameDerivatives:
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    dmom: dict


class FrameEngine:
    """FFT evaluation of all window coefficients at one time index.

    The chirp modulation ``exp(-i pi lam u^2)`` and the centring phase
    ``dt exp(2 pi i k Q / N)`` are tabulated once; each time index then costs
    five FFTs per chirp rate (the moment family ``u^p g``), which the bank's
    basis maps onto the thirteen windows.
    """

    def __init__(self, signal, bank, lams, N, F=None):
        N = int(N)
        if N < bank.length:
            raise InvalidArgument(f"N={N} is shorter than the window length {bank.length}")
        self.x = signal.samples
        self.bank = bank
        self.N = N
        self.F = (N + 1) // 2 if F is None else int(F)
        self.lams = np.atleast_1d(np.asarray(lams, dtype=float))
        self.xi = np.arange(self.F) * (signal.fs / N)
        u2 = bank.u ** 2
        self.chirp_phase = np.exp(-1j * math.pi * self.lams[:, None] * u2[None, :])
        k = np.arange(self.F)
        self.correction = bank.dt * np.exp(TWO_PI_I * k * bank.Q / N)

    def segment(self, i):
        """``x[i-Q .. i+Q]`` with zeros beyond the signal ends."""
        Q = self.bank.Q
        n = self.x.size
        lo, hi = i - Q, i + Q + 1
        if lo >= 0 and hi <= n:
            return self.x[lo:hi]
        seg = np.zeros(2 * Q + 1, dtype=complex)
        a, b = max(lo, 0), min(hi, n)
        if a < b:
            seg[a - lo:b - lo] = self.x[a:b]
        return seg

    def moments(self, i):
        """``(5, C, F)`` transforms of the moment windows ``u^p g``."""
        seg = self.segment(i)
        y = (seg * self.bank.moments)[:, None, :] * self.chirp_phase[None, :, :]
        spec = np.fft.fft(y, n=self.N, axis=-1)[..., :self.F]
        spec *= self.correction
        return spec

    def stack(self, i):
        """``(13, C, F)`` coefficients, ordered like ``windows.PAIRS``."""
        mom = self.moments(i)
        nm, C, F = mom.shape
        # real basis acting on interleaved (re, im) pairs: a plain real matmul
        out = self.bank.basis @ mom.view(float).reshape(nm, -1)
        return out.reshape(len(PAIRS), C, 2 * F).view(complex)

    def frame(self, i, stack=None):
        """All chirp rates of time ``i`` as one frame with ``(C, F)`` arrays."""
        stack = self.stack(i) if stack is None else stack
        return CTFrame(i, self.lams, self.xi, {p: stack[n] for n, p in enumerate(PAIRS)})


def ct_frame(signal, bank, i, lam, N):
    """Chirplet coefficients of every window in ``bank`` at time index ``i``.

    ``lam`` may be a scalar or a 1-D array of chirp rates (Hz/s).
    """
    if not 0 <= i < signal.n:
        raise InvalidArgument(f"time index {i} outside 0..{signal.n - 1}")
    eng = FrameEngine(signal, bank, lam, N)
    stack = eng.stack(i)
    if np.ndim(lam):
        lam = np.asarray(lam, dtype=float)
    else:
        lam, stack = float(lam), stack[:, 0, :]
    return CTFrame(i, lam, eng.xi, {p: stack[n] for n, p in enumerate(PAIRS)})


def dt_coef(T, a, b, X, L):
    """t-derivative of ``T^(t^b g^(a))`` from coefficients of neighbouring windows."""
    out = -T[(a + 1, b)] + X * T[(a, b)] + L * T[(a, b + 1)]
    if b:
        out = out - b * T[(a, b - 1)]
    return out


# windows whose t-derivative the q-operator derivatives need
DMOM_PAIRS = ((1, 0), (0, 1), (1, 1), (0, 2), (1, 2), (0, 3))


def frame_derivatives(frame, xi=None, lam=None):
    """First three t-derivatives of ``T^(g)`` plus ``dmom`` for ``DMOM_PAIRS``.

    Every derivative is an algebraic combination of frame coefficients.
    """
    T = frame.coef
    missing = [p for p in PAIRS if p not in T]
    if missing:
        raise KeyError(f"frame lacks window coefficients {missing}")
    X = TWO_PI_I * (frame.xi if xi is None else np.asarray(xi))
    L = frame.L if lam is None else chirp_factor(lam)
    d1 = -T[(1, 0)] + X * T[(0, 0)] + L * T[(0, 1)]
    d2 = (T[(2, 0)] - 2 * X * T[(1, 0)] - L * T[(1, 1)] + X * X * T[(0, 0)]
          + 2 * X * L * T[(0, 1)] - L * (T[(0, 0)] + T[(1, 1)]) + L * L * T[(0, 2)])
    X2, L2 = X * X, L * L
    d3 = (-T[(3, 0)] + 3 * X * T[(2, 0)] + 3 * L * T[(2, 1)]
          + T[(1, 0)] * (3 * L - 3 * X2)
          - 6 * X * L * T[(1, 1)]
          + T[(0, 0)] * (X2 * X - 3 * L * X)
          - 3 * L2 * T[(1, 2)]
          + T[(0, 1)] * (3 * X2 * L - 3 * L2)
          + 3 * L2 * X * T[(0, 2)]
          + L2 * L * T[(0, 3)])
    dmom = {p: dt_coef(T, *p, X, L) for p in DMOM_PAIRS}
    return FrameDerivatives(d1, d2, d3, dmom)


def coef(stack, pair):
    return stack[INDEX[pair]]
