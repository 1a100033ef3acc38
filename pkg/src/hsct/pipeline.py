"""One-pass transform plus evaluation against the ideal representation."""

from .metrics import Evaluator, MetricsReport
from .squeeze import METHODS, Transform, TransformParams, ideal_plane


def evaluate_signal(signal, modes, params=TransformParams(), methods=METHODS, threads=None,
                    alpha_r=3.0, cap=512, chirp_weight=1.0, exclude_boundary=False):
    """Transform ``signal`` and score every method without storing volumes.

    ``exclude_boundary`` drops frames whose window overruns the signal from
    the EMD averages.
    """
    tr = Transform.configure(signal, params)
    evals = {}
    for m in methods:
        _, fg, cg = tr.volume_grids(m)
        evals[m] = Evaluator(fg.ticks, cg.ticks, cg.dc, alpha_r, cap, chirp_weight)
    ticks = tr.grids.time.ticks
    for res in tr.slices(methods, threads):
        t = ticks[res.i]
        score = not (exclude_boundary and tr.boundary(res.i))
        ideal = {}
        for m in methods:
            _, fg, cg = tr.volume_grids(m)
            key = (fg, cg)
            if key not in ideal:
                ideal[key] = ideal_plane(modes, t, fg, cg)[0]
            evals[m].add(t, res.planes[m], ideal[key], score)
    parameters = dict(tr.meta(), alpha_renyi=alpha_r, emd_cap=cap, chirp_weight=chirp_weight,
                      exclude_boundary=exclude_boundary, n=signal.n, t0=signal.t0)
    return MetricsReport({m: evals[m].result() for m in methods}, parameters)
