"""Per-bin hot loops: ingredient evaluation and nearest-bin accumulation.

Each kernel has a compiled version (numba) and a numpy version built from
``estimators``; ``_accel.numba_enabled()`` picks one at call time.
"""

import math

import numpy as np

from . import _accel
from .chirplet import CTFrame, frame_derivatives
from .estimators import hsct_ingredients, q_ops, sct_ingredients
from .windows import PAIRS

SCT_VALID = 1
THIRD = 2


def _finite(z):
    return math.isfinite(z.real) and math.isfinite(z.imag)


_finite_c = _accel.njit(_finite)


@_accel.njit
def _ingredients_numba(T, xi, lams, ref, g1, g2, g3, mu2, om2, theta, mu3, om3, flags):
    C = T.shape[1]
    F = T.shape[2]
    pi = math.pi
    floor = g1 * ref
    for k in range(C):
        L = 2j * pi * lams[k]
        L2 = L * L
        for j in range(F):
            flags[k, j] = 0
            t00 = T[0, k, j]
            if not (abs(t00) > floor and ref > 0):
                continue
            t10 = T[1, k, j]
            t20 = T[2, k, j]
            t30 = T[3, k, j]
            t01 = T[4, k, j]
            t11 = T[5, k, j]
            t21 = T[6, k, j]
            t02 = T[7, k, j]
            t12 = T[8, k, j]
            t22 = T[9, k, j]
            t03 = T[10, k, j]
            t13 = T[11, k, j]
            t04 = T[12, k, j]
            X = 2j * pi * xi[j]
            X2 = X * X
            d1 = -t10 + X * t00 + L * t01
            d2 = (t20 - 2 * X * t10 - L * t11 + X2 * t00
                  + 2 * X * L * t01 - L * (t00 + t11) + L2 * t02)
            d3 = (-t30 + 3 * X * t20 + 3 * L * t21 + t10 * (3 * L - 3 * X2)
                  - 6 * X * L * t11 + t00 * (X2 * X - 3 * L * X) - 3 * L2 * t12
                  + t01 * (3 * X2 * L - 3 * L2) + 3 * L2 * X * t02 + L2 * L * t03)
            D10 = -t20 + X * t10 + L * t11
            D01 = -t00 - t11 + X * t01 + L * t02
            D11 = -t10 - t21 + X * t11 + L * t12
            D02 = -2 * t01 - t12 + X * t02 + L * t03
            D12 = -2 * t11 - t22 + X * t12 + L * t13
            D03 = -3 * t02 - t13 + X * t03 + L * t04
            B = t00
            B2 = B * B
            B3 = B2 * B
            # q^0: A = t01, Tn = t11, Tm = t02
            num = t01 * t10 - t11 * B + L * (t02 * B - t01 * t01)
            dnum = (D01 * t10 + t01 * D10 - D11 * B - t11 * d1
                    + L * (D02 * B + t02 * d1 - D01 * t01 - t01 * D01))
            q0 = num / B2
            dq0 = dnum / B2 - 2 * d1 * num / B3
            # q^1: A = t02, Tn = t12, Tm = t03
            num = t02 * t10 - t12 * B + L * (t03 * B - t02 * t01)
            dnum = (D02 * t10 + t02 * D10 - D12 * B - t12 * d1
                    + L * (D03 * B + t03 * d1 - D02 * t01 - t02 * D01))
            q1 = num / B2
            dq1 = dnum / B2 - 2 * d1 * num / B3

            R = d1 / B
            R1 = (d2 * B - d1 * d1) / B2
            R2 = (d3 * B * B - 3 * d1 * d2 * B + 2 * d1 * d1 * d1) / B3
            m2 = R1 / (2j * pi * q0)
            w2 = R / (2j * pi) - m2 * t01 / B
            if not (abs(q0) > g2 and _finite_c(m2) and _finite_c(w2)):
                continue
            mu2[k, j] = m2
            om2[k, j] = w2
            flags[k, j] = SCT_VALID
            den = 2 * q0 * q0 + dq1 * q0 - q1 * dq0
            th = (R2 * q0 - R1 * dq0) / den / (1j * pi)
            m3 = ((2 * q0 + dq1) * R1 - R2 * q1) / den / (2j * pi)
            w3 = R / (2j * pi) - m3 * t01 / B - th / 2 * t02 / B
            if (pi * abs(den / (q0 * q0)) > g3 and _finite_c(th)
                    and _finite_c(m3) and _finite_c(w3)):
                theta[k, j] = th
                mu3[k, j] = m3
                om3[k, j] = w3
                flags[k, j] = SCT_VALID | THIRD
            else:
                theta[k, j] = 0
                mu3[k, j] = m2
                om3[k, j] = w2


def _ingredients_numpy(T, xi, lams, ref, g1, g2, g3, mu2, om2, theta, mu3, om3, flags):
    from .estimators import Thresholds

    th = Thresholds(g1, g2, g3)
    frame = CTFrame(-1, lams, xi, {p: T[n] for n, p in enumerate(PAIRS)})
    d = frame_derivatives(frame)
    q = q_ops(frame, d, th, ref)
    sct = sct_ingredients(frame, d, q, th, ref)
    hs = hsct_ingredients(frame, d, q, th, ref)
    v = sct.valid
    mu2[v] = sct.mu[v]
    om2[v] = sct.omega[v]
    theta[v] = hs.theta[v]
    mu3[v] = hs.mu[v]
    om3[v] = hs.omega[v]
    flags[...] = np.where(v, SCT_VALID, 0) | np.where(hs.third, THIRD, 0)


def slice_ingredients(T, xi, lams, thresholds, ref, use_numba=None):
    """Second- and third-order targets for a ``(13, C, F)`` coefficient stack.

    Returns ``(mu2, om2, theta, mu3, om3, flags)``; values are only defined
    where ``flags & SCT_VALID``.
    """
    C, F = T.shape[1:]
    out = [np.zeros((C, F), complex) for _ in range(5)]
    flags = np.zeros((C, F), np.uint8)
    use = _accel.numba_enabled() if use_numba is None else use_numba
    fn = _ingredients_numba if use else _ingredients_numpy
    fn(T, np.asarray(xi, float),
       np.asarray(lams, float), float(ref), thresholds.gamma1, thresholds.gamma2,
       thresholds.gamma3, *out, flags)
    return (*out, flags)


@_accel.njit
def _accumulate_numba(T00, omega, mu, keep, weight, a_f, a_c, half, out, counts):
    C = T00.shape[0]
    F = T00.shape[1]
    nf = out.shape[0]
    nc = out.shape[1]
    for k in range(C):
        for j in range(F):
            if not keep[k, j]:
                counts[2] += 1
                continue
            fo = omega[k, j].real / a_f + 0.5
            co = mu[k, j].real / a_c + 0.5 + half
            if not (fo >= 0.0 and fo < nf and co >= 0.0 and co < nc):
                counts[1] += 1
                continue
            v = T00[k, j] * weight
            out[int(math.floor(fo)), int(math.floor(co))] += v
            counts[0] += 1


def _accumulate_numpy(T00, omega, mu, keep, weight, a_f, a_c, half, out, counts):
    nf, nc = out.shape
    fo = omega.real / a_f + 0.5
    co = mu.real / a_c + 0.5 + half
    with np.errstate(invalid="ignore"):
        inside = keep & (fo >= 0) & (fo < nf) & (co >= 0) & (co < nc)
    counts[2] += int(keep.size - np.count_nonzero(keep))
    counts[1] += int(np.count_nonzero(keep & ~inside))
    counts[0] += int(np.count_nonzero(inside))
    # C order over (k, j) matches the compiled loop, so sums agree bit for bit
    fi = np.floor(fo[inside]).astype(np.int64)
    ci = np.floor(co[inside]).astype(np.int64)
    np.add.at(out, (fi, ci), T00[inside] * weight)


def accumulate(T00, omega, mu, keep, weight, a_f, a_c, half, out, counts, use_numba=None):
    """Add ``T00 * weight`` into ``out`` at the nearest ``(Re omega, Re mu)`` bin.

    ``counts`` receives ``[kept, discarded out of grid, skipped]``.
    """
    use = _accel.numba_enabled() if use_numba is None else use_numba
    fn = _accumulate_numba if use else _accumulate_numpy
    fn(T00, omega, mu, keep, complex(weight), float(a_f), float(a_c), int(half), out, counts)
