"""Concentration and fidelity metrics for time-frequency(-chirp) representations."""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import InvalidArgument, InvalidData
from .transport import transport


def _mass(rep):
    a = np.abs(np.asarray(rep))
    if not np.all(np.isfinite(a)):
        raise InvalidData("representation contains non-finite values")
    return a


def renyi_from_sums(s1, sa, alpha_r):
    """Entropy from ``s1 = sum |v|`` and ``sa = sum |v|^alpha``."""
    if not s1 > 0:
        raise InvalidData("representation has zero total mass")
    return math.log(sa / s1 ** alpha_r) / (1.0 - alpha_r)


def _check_order(alpha_r):
    if not (alpha_r > 0 and alpha_r != 1):
        raise InvalidArgument(f"Renyi order must be positive and != 1, got {alpha_r}")


def renyi_entropy(rep, alpha_r=3.0):
    """Renyi entropy (nats) of ``|rep|`` normalised to unit mass over all bins."""
    _check_order(alpha_r)
    a = _mass(rep)
    s1 = a.sum()
    if not s1 > 0:
        raise InvalidData("representation has zero total mass")
    p = a / s1
    return math.log(np.sum(p ** alpha_r)) / (1.0 - alpha_r)


def emd_1d(p, q, df=1.0):
    """1-Wasserstein distance between histograms on a uniform grid of step ``df``."""
    p = _mass(p).ravel()
    q = _mass(q).ravel()
    if p.shape != q.shape:
        raise InvalidArgument("histograms live on different grids")
    sp, sq = p.sum(), q.sum()
    if not (sp > 0 and sq > 0):
        raise InvalidData("zero-mass histogram")
    return float(np.sum(np.abs(np.cumsum(p / sp) - np.cumsum(q / sq))) * df)


def emd_points(xa, wa, xb, wb):
    """Exact transport distance between weighted point sets (Euclidean ground cost)."""
    xa = np.atleast_2d(np.asarray(xa, dtype=float))
    xb = np.atleast_2d(np.asarray(xb, dtype=float))
    wa = _mass(wa).ravel()
    wb = _mass(wb).ravel()
    if not (wa.sum() > 0 and wb.sum() > 0):
        raise InvalidData("zero-mass point set")
    M = np.sqrt(((xa[:, None, :] - xb[None, :, :]) ** 2).sum(axis=-1))
    cost, _ = transport(wa / wa.sum(), wb / wb.sum(), M)
    return cost


def coarsen(P, xi, lam, cap):
    """Merge bins into blocks until at most ``cap`` blocks carry mass.

    The block edge is doubled along whichever axis currently has the
    physically smaller block, so blocks stay roughly square in ground units.
    Merged mass sits at the block's mass-weighted centroid.  Returns
    ``(points (k, 2), masses (k,))``.
    """
    F, C = P.shape
    dxi = abs(xi[1] - xi[0]) if F > 1 else 1.0
    dlam = abs(lam[1] - lam[0]) if C > 1 else 1.0
    fx = fy = 1
    while True:
        pts, w = _blocks(P, xi, lam, fx, fy)
        if w.size <= cap or (fx >= F and fy >= C):
            return pts, w
        grow_x = fy >= C or (fx < F and fx * dxi <= fy * dlam)
        if grow_x:
            fx *= 2
        else:
            fy *= 2


def _blocks(P, xi, lam, fx, fy):
    if fx == 1 and fy == 1:
        j, k = np.nonzero(P)
        return np.column_stack([xi[j], lam[k]]), P[j, k]
    F, C = P.shape
    nf, nc = -(-F // fx), -(-C // fy)
    pad = np.zeros((nf * fx, nc * fy))
    pad[:F, :C] = P
    X = np.zeros(nf * fx)
    X[:F] = xi
    Y = np.zeros(nc * fy)
    Y[:C] = lam
    blk = pad.reshape(nf, fx, nc, fy)
    mass = blk.sum(axis=(1, 3))
    mx = np.einsum("afbc,af->ab", blk, X.reshape(nf, fx))
    my = np.einsum("afbc,bc->ab", blk, Y.reshape(nc, fy))
    j, k = np.nonzero(mass)
    w = mass[j, k]
    return np.column_stack([mx[j, k] / w, my[j, k] / w]), w


def emd_2d(P, Q, xi, lam, cap=512, chirp_weight=1.0):
    """1-Wasserstein distance between two (frequency, chirp) mass slices.

    Parameters
    ----------
    P, Q : ndarray, shape (F, C)
        Non-negative masses (magnitudes are taken); each is normalised.
    xi, lam : ndarray
        Bin coordinates in Hz and Hz/s.
    cap : int
        Largest support handed to the exact solver; denser slices are
        coarsened first.
    chirp_weight : float
        Scale on the chirp coordinate inside the Euclidean ground distance.
    """
    P = _mass(P)
    Q = _mass(Q)
    if P.shape != Q.shape or P.shape != (len(xi), len(lam)):
        raise InvalidArgument("slices and grids disagree in shape")
    if not (P.sum() > 0 and Q.sum() > 0):
        raise InvalidData("zero-mass slice")
    if cap < 1:
        raise InvalidArgument("cap must be >= 1")
    xi = np.asarray(xi, dtype=float)
    lam = np.asarray(lam, dtype=float) * chirp_weight
    pa, wa = coarsen(P / P.sum(), xi, lam, cap)
    pb, wb = coarsen(Q / Q.sum(), xi, lam, cap)
    return emd_points(pa, wa, pb, wb)


@dataclass
class MethodMetrics:
    renyi: float
    renyi_tf: float
    tf_emd: float
    tfc_emd: float
    times: list = field(default_factory=list)
    tf_curve: list = field(default_factory=list)
    tfc_curve: list = field(default_factory=list)
    skipped_times: int = 0


class Evaluator:
    """Streaming evaluation of one method against the ideal representation.

    Feed time slices in any order with ``add``; ``result`` returns the
    averages.  Renyi entropies come from running power sums, so no volume
    needs to be held in memory.
    """

    def __init__(self, xi, lam, dc, alpha_r=3.0, cap=512, chirp_weight=1.0):
        _check_order(alpha_r)
        self.xi = np.asarray(xi, dtype=float)
        self.lam = np.asarray(lam, dtype=float)
        self.dc = float(dc)
        self.df = float(self.xi[1] - self.xi[0]) if self.xi.size > 1 else 1.0
        self.alpha_r = alpha_r
        self.cap = cap
        self.chirp_weight = chirp_weight
        self.s1 = self.sa = self.p1 = self.pa = 0.0
        self.rows = []
        self.skipped = 0

    def add(self, t, method_slice, ideal_slice, score=True):
        """Accumulate entropy sums; EMDs only when ``score`` is true."""
        a = _mass(method_slice)
        self.s1 += float(a.sum())
        self.sa += float(np.sum(a ** self.alpha_r))
        plane = a.sum(axis=1) * self.dc
        self.p1 += float(plane.sum())
        self.pa += float(np.sum(plane ** self.alpha_r))
        if not score:
            return
        ideal = _mass(ideal_slice)
        if not (a.sum() > 0 and ideal.sum() > 0):
            self.skipped += 1
            return
        tf = emd_1d(plane, ideal.sum(axis=1), self.df)
        tfc = emd_2d(a, ideal, self.xi, self.lam, self.cap, self.chirp_weight)
        self.rows.append((float(t), tf, tfc))

    def result(self):
        rows = sorted(self.rows)
        if not rows:
            raise InvalidData("no time slice had mass in both the method and the ideal")
        t, tf, tfc = (list(c) for c in zip(*rows))
        return MethodMetrics(
            renyi=renyi_from_sums(self.s1, self.sa, self.alpha_r),
            renyi_tf=renyi_from_sums(self.p1, self.pa, self.alpha_r),
            tf_emd=float(np.mean(tf)), tfc_emd=float(np.mean(tfc)),
            times=t, tf_curve=tf, tfc_curve=tfc, skipped_times=self.skipped)


def evaluate(volume, ideal, alpha_r=3.0, cap=512, chirp_weight=1.0, time_mask=None):
    """Metrics of ``volume`` against ``ideal`` (same grids).

    ``time_mask`` selects the time indices that enter the EMD averages
    (e.g. to drop boundary-affected frames); entropies use every slice.
    """
    if (volume.data.shape != ideal.data.shape or volume.time != ideal.time
            or volume.freq != ideal.freq or volume.chirp != ideal.chirp):
        raise InvalidArgument("method and ideal volumes have different grids")
    ev = Evaluator(volume.freq.ticks, volume.chirp.ticks, volume.chirp.dc, alpha_r, cap,
                   chirp_weight)
    ticks = volume.time.ticks
    for i in range(volume.time.n):
        score = True if time_mask is None else bool(time_mask[i])
        ev.add(ticks[i], volume.data[i], ideal.data[i], score)
    return ev.result()


@dataclass
class MetricsReport:
    methods: dict
    parameters: dict

    def to_json(self):
        out = {"parameters": self.parameters, "methods": {}}
        for name, m in self.methods.items():
            d = asdict(m)
            out["methods"][name] = {k: d[k] for k in
                                    ("renyi", "renyi_tf", "tf_emd", "tfc_emd", "skipped_times")}
        return json.dumps(out, indent=2, sort_keys=True)

    def write(self, json_path, csv_path=None):
        with open(json_path, "w") as fh:
            fh.write(self.to_json() + "\n")
        if csv_path is not None:
            self.write_curves(csv_path)

    def write_curves(self, path):
        names = list(self.methods)
        times = sorted({t for m in self.methods.values() for t in m.times})
        cols = {}
        for n in names:
            m = self.methods[n]
            cols[n] = {t: (a, b) for t, a, b in zip(m.times, m.tf_curve, m.tfc_curve)}
        with open(path, "w") as fh:
            fh.write("t," + ",".join(f"{n}_tf,{n}_tfc" for n in names) + "\n")
            for t in times:
                cells = []
                for n in names:
                    a, b = cols[n].get(t, (math.nan, math.nan))
                    cells += [f"{a:.17g}", f"{b:.17g}"]
                fh.write(f"{t:.17g}," + ",".join(cells) + "\n")
