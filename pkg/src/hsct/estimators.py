"""Reassignment ingredients: q-operators, second- and third-order estimators.

Everything here is vectorised over whatever shape the frame arrays have, so
the same code serves a single ``(time, chirp)`` frame and a whole time slice.
The compiled per-bin kernel in ``_kernels`` mirrors these formulas.
"""

import math
from dataclasses import dataclass

import numpy as np

PI_I = 1j * math.pi
TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class Thresholds:
    """Conditioning thresholds.

    gamma1 and thres are relative to the largest ``|T^(g)|`` of the block
    being processed; gamma2 and gamma3 are absolute.
    """

    gamma1: float = 1e-4
    gamma2: float = 1e-2
    gamma3: float = 1e-2
    thres: float = 1e-4


@dataclass(frozen=True)
class QOps:
    q0: np.ndarray
    q1: np.ndarray
    dq0: np.ndarray
    dq1: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True)
class IngredientField:
    """Reassignment targets per bin.

    ``third`` marks bins whose values come from the third-order system; the
    remaining valid bins carry second-order values with ``theta = 0``.
    """

    theta: np.ndarray | None
    mu: np.ndarray
    omega: np.ndarray
    valid: np.ndarray
    third: np.ndarray | None = None


def reference_level(T00):
    a = np.abs(T00)
    return float(a.max()) if a.size else 0.0


def base_mask(T00, thresholds, ref=None):
    ref = reference_level(T00) if ref is None else ref
    return (np.abs(T00) > thresholds.gamma1 * ref) & (ref > 0)


def _q(T, D, d1, L, j, B):
    """``q^j`` and its t-derivative from the quotient-rule expansions."""
    A, dA = T[(0, j + 1)], D[(0, j + 1)]
    Tn, dTn = T[(1, j + 1)], D[(1, j + 1)]
    Tm, dTm = T[(0, j + 2)], D[(0, j + 2)]
    T10, T01 = T[(1, 0)], T[(0, 1)]
    num = A * T10 - Tn * B + L * (Tm * B - A * T01)
    dnum = (dA * T10 + A * D[(1, 0)] - dTn * B - Tn * d1
            + L * (dTm * B + Tm * d1 - dA * T01 - A * D[(0, 1)]))
    B2 = B * B
    return num / B2, dnum / B2 - 2 * d1 * num / (B2 * B)


def q_ops(frame, derivs, thresholds=Thresholds(), ref=None):
    """q-operators ``q^0, q^1`` and their t-derivatives.

    Bins where ``|T^(g)|`` falls under the conditioning threshold are flagged
    invalid in the returned mask; their values are not meaningful.
    """
    T = frame.coef
    B = T[(0, 0)]
    L = frame.L
    D = derivs.dmom
    valid = base_mask(B, thresholds, ref)
    with np.errstate(all="ignore"):
        q0, dq0 = _q(T, D, derivs.d1, L, 0, B)
        q1, dq1 = _q(T, D, derivs.d1, L, 1, B)
    return QOps(q0, q1, dq0, dq1, valid)


def _log_derivatives(T00, d):
    """``R = dT/T`` and its first two t-derivatives."""
    R = d.d1 / T00
    R1 = (d.d2 * T00 - d.d1 * d.d1) / (T00 * T00)
    R2 = (d.d3 * T00 * T00 - 3 * d.d1 * d.d2 * T00 + 2 * d.d1 ** 3) / T00 ** 3
    return R, R1, R2


def sct_ingredients(frame, derivs, q=None, thresholds=Thresholds(), ref=None):
    """Second-order chirp-rate and frequency estimates (``mu``, ``omega``)."""
    T = frame.coef
    T00 = T[(0, 0)]
    q = q_ops(frame, derivs, thresholds, ref) if q is None else q
    with np.errstate(all="ignore"):
        R, R1, _ = _log_derivatives(T00, derivs)
        mu = R1 / (TWO_PI_I * q.q0)
        omega = R / TWO_PI_I - mu * T[(0, 1)] / T00
        valid = (q.valid & (np.abs(q.q0) > thresholds.gamma2)
                 & np.isfinite(mu) & np.isfinite(omega))
    return IngredientField(None, mu, omega, valid)


def hsct_ingredients(frame, derivs, q=None, thresholds=Thresholds(), ref=None):
    """Third-order estimates (``theta``, ``mu``, ``omega``) with second-order fallback.

    Bins where the third-order denominator ``pi |2 + d/dt(q1/q0)|`` is not
    above ``gamma3`` keep their second-order values and ``theta = 0``.
    """
    T = frame.coef
    T00 = T[(0, 0)]
    q = q_ops(frame, derivs, thresholds, ref) if q is None else q
    sct = sct_ingredients(frame, derivs, q, thresholds, ref)
    with np.errstate(all="ignore"):
        R, R1, R2 = _log_derivatives(T00, derivs)
        den = 2 * q.q0 * q.q0 + q.dq1 * q.q0 - q.q1 * q.dq0
        theta = (R2 * q.q0 - R1 * q.dq0) / den / PI_I
        mu = ((2 * q.q0 + q.dq1) * R1 - R2 * q.q1) / den / TWO_PI_I
        omega = R / TWO_PI_I - mu * T[(0, 1)] / T00 - theta / 2 * T[(0, 2)] / T00
        third = (sct.valid & (math.pi * np.abs(den / (q.q0 * q.q0)) > thresholds.gamma3)
                 & np.isfinite(theta) & np.isfinite(mu) & np.isfinite(omega))
    theta = np.where(third, theta, 0)
    mu = np.where(third, mu, sct.mu)
    omega = np.where(third, omega, sct.omega)
    return IngredientField(theta, mu, omega, sct.valid, third)


def reassign_with_theta(frame, derivs, q, theta):
    """``(mu, omega)`` implied by a given third-derivative estimate ``theta``.

    ``theta = 0`` reproduces the second-order estimates.
    """
    T = frame.coef
    T00 = T[(0, 0)]
    with np.errstate(all="ignore"):
        R, R1, _ = _log_derivatives(T00, derivs)
        mu = (R1 - PI_I * theta * q.q1) / (TWO_PI_I * q.q0)
        omega = R / TWO_PI_I - mu * T[(0, 1)] / T00 - theta / 2 * T[(0, 2)] / T00
    return mu, omega
