"""Gaussian analysis window, its exact derivatives and moment-weighted variants."""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .core import InvalidArgument

# (a, b) = (derivative order, power of u): every window u^b g^(a)(u) that the
# derivative identities and q-operator derivatives reach.
PAIRS = ((0, 0), (1, 0), (2, 0), (3, 0),
         (0, 1), (1, 1), (2, 1),
         (0, 2), (1, 2), (2, 2),
         (0, 3), (1, 3),
         (0, 4))
INDEX = {p: n for n, p in enumerate(PAIRS)}
# each u^b g^(a) is (polynomial of degree a+b <= 4) * g
N_MOMENTS = 5


def derivative_poly(a, sigma=1.0):
    """Ascending coefficients c such that ``g^(a)(u) = (sum_p c[p] u^p) g(u)``.

    Uses ``P_{a+1}(s) = P_a'(s) - 2 pi s P_a(s)`` in ``s = u/sigma``.
    """
    ps = np.array([1.0])
    for _ in range(a):
        ps = P.polysub(P.polyder(ps), P.polymulx(2 * math.pi * ps))
    return np.array([c / sigma ** (a + p) for p, c in enumerate(ps)])


@dataclass(frozen=True)
class WindowBank:
    """Sampled windows ``u^b g^(a)(u)`` for ``u = -Q dt .. Q dt``.

    ``basis[n]`` expresses window ``PAIRS[n]`` in the moment family
    ``u^p g(u)``, ``p = 0..4`` (rows of ``moments``), which lets the
    transform run five FFTs instead of thirteen.
    """

    Q: int
    dt: float
    sigma: float
    u: np.ndarray
    table: dict
    moments: np.ndarray
    basis: np.ndarray

    def __getitem__(self, pair):
        return self.table[pair]

    @property
    def length(self):
        return 2 * self.Q + 1


def gaussian(u, sigma=1.0):
    return np.exp(-math.pi * (np.asarray(u) / sigma) ** 2)


def gaussian_bank(Q, dt, sigma=1.0):
    """Window bank for ``g(u) = exp(-pi (u/sigma)^2)``.

    Derivatives come from the closed Hermite-type forms, never from
    differencing.
    """
    if int(Q) != Q or Q < 1:
        raise InvalidArgument(f"Q must be a positive integer, got {Q}")
    if not dt > 0:
        raise InvalidArgument(f"dt must be positive, got {dt}")
    if not sigma > 0:
        raise InvalidArgument(f"sigma must be positive, got {sigma}")
    Q = int(Q)
    u = np.arange(-Q, Q + 1) * dt
    g = gaussian(u, sigma)
    polys = {a: derivative_poly(a, sigma) for a in range(4)}
    table = {}
    for a, b in PAIRS:
        base = P.polyval(u, polys[a]) * g if a else g
        table[(a, b)] = u ** b * base if b else base
    for arr in table.values():
        arr.setflags(write=False)
    moments = np.vstack([u ** p * g for p in range(N_MOMENTS)])
    basis = np.zeros((len(PAIRS), N_MOMENTS))
    for n, (a, b) in enumerate(PAIRS):
        c = polys[a]
        basis[n, b:b + c.size] = c
    moments.setflags(write=False)
    basis.setflags(write=False)
    return WindowBank(Q, float(dt), float(sigma), u, table, moments, basis)


def half_length(dt, sigma=1.0, N=None, tail=1e-16):
    """Smallest ``Q`` with ``g(Q dt) < tail``, capped so ``2Q+1 <= N``."""
    # g(u) < tail  <=>  |u| > sigma sqrt(ln(1/tail)/pi)
    reach = sigma * math.sqrt(math.log(1.0 / tail) / math.pi)
    Q = int(math.floor(reach / dt)) + 1
    if N is not None:
        Q = min(Q, (int(N) - 1) // 2)
    if Q < 1:
        raise InvalidArgument("window support is empty; increase N")
    return Q
