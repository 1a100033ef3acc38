"""Exact discrete optimal transport by the transportation simplex.

Basic feasible solution from the northwest-corner rule, dual potentials
from the spanning tree of basic cells, Dantzig pricing with a switch to
Bland's rule after a run of degenerate pivots (so it cannot cycle).
"""

import numpy as np

from . import _accel


@_accel.njit
def _solve(a, b, M, max_iter, tol):
    m = a.size
    n = b.size
    nb = m + n - 1
    nn = m + n
    bi = np.empty(nb, np.int64)
    bj = np.empty(nb, np.int64)
    bx = np.empty(nb)
    ra = a.copy()
    rb = b.copy()
    i = 0
    j = 0
    for c in range(nb):
        x = min(ra[i], rb[j])
        bi[c] = i
        bj[c] = j
        bx[c] = x
        row_done = ra[i] <= rb[j]
        ra[i] -= x
        rb[j] -= x
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif row_done:
            i += 1
        else:
            j += 1

    deg = np.empty(nn, np.int64)
    start = np.empty(nn + 1, np.int64)
    fill = np.empty(nn, np.int64)
    adj = np.empty(2 * nb, np.int64)
    u = np.empty(m)
    v = np.empty(n)
    parent = np.empty(nn, np.int64)
    pedge = np.empty(nn, np.int64)
    depth = np.empty(nn, np.int64)
    queue = np.empty(nn, np.int64)
    seen = np.empty(nn, np.bool_)
    path_a = np.empty(nn, np.int64)
    path_b = np.empty(nn, np.int64)
    cyc = np.empty(nn, np.int64)

    degenerate_run = 0
    bland = False
    status = 1
    for _ in range(max_iter):
        deg[:] = 0
        for e in range(nb):
            deg[bi[e]] += 1
            deg[m + bj[e]] += 1
        start[0] = 0
        for k in range(nn):
            start[k + 1] = start[k] + deg[k]
            fill[k] = start[k]
        for e in range(nb):
            r = bi[e]
            c = m + bj[e]
            adj[fill[r]] = e
            fill[r] += 1
            adj[fill[c]] = e
            fill[c] += 1
        # potentials by breadth-first search from row 0 (u[0] = 0)
        seen[:] = False
        seen[0] = True
        u[0] = 0.0
        parent[0] = -1
        pedge[0] = -1
        depth[0] = 0
        queue[0] = 0
        head = 0
        tail = 1
        while head < tail:
            node = queue[head]
            head += 1
            for s in range(start[node], start[node + 1]):
                e = adj[s]
                other = m + bj[e] if node < m else bi[e]
                if seen[other]:
                    continue
                seen[other] = True
                if other >= m:
                    v[other - m] = M[bi[e], bj[e]] - u[bi[e]]
                else:
                    u[other] = M[bi[e], bj[e]] - v[bj[e]]
                parent[other] = node
                pedge[other] = e
                depth[other] = depth[node] + 1
                queue[tail] = other
                tail += 1
        # pricing
        p = -1
        q = -1
        best = -tol
        for r in range(m):
            for c in range(n):
                red = M[r, c] - u[r] - v[c]
                if red < best:
                    p = r
                    q = c
                    if bland:
                        break
                    best = red
            if bland and p >= 0:
                break
        if p < 0:
            status = 0
            break
        # cycle through the tree between column q and row p
        x = m + q
        y = p
        na = 0
        nb_ = 0
        while x != y:
            if depth[x] >= depth[y]:
                path_a[na] = pedge[x]
                na += 1
                x = parent[x]
            else:
                path_b[nb_] = pedge[y]
                nb_ += 1
                y = parent[y]
        L = 0
        for k in range(na):
            cyc[L] = path_a[k]
            L += 1
        for k in range(nb_ - 1, -1, -1):
            cyc[L] = path_b[k]
            L += 1
        # odd positions give up mass
        theta = np.inf
        leave = -1
        leave_key = 0
        for k in range(0, L, 2):
            e = cyc[k]
            key = bi[e] * n + bj[e]
            if bx[e] < theta or (bland and bx[e] == theta and key < leave_key):
                theta = bx[e]
                leave = e
                leave_key = key
        for k in range(L):
            e = cyc[k]
            if k % 2 == 0:
                bx[e] -= theta
            else:
                bx[e] += theta
        bi[leave] = p
        bj[leave] = q
        bx[leave] = theta
        if theta == 0.0:
            degenerate_run += 1
            if degenerate_run > nn:
                bland = True
        else:
            degenerate_run = 0
            bland = False
    cost = 0.0
    for e in range(nb):
        cost += bx[e] * M[bi[e], bj[e]]
    return cost, status, bi, bj, bx


def transport(a, b, M, max_iter=None):
    """Minimal cost of moving histogram ``a`` onto ``b`` under ground cost ``M``.

    ``a`` and ``b`` must be non-negative with equal totals.  Returns
    ``(cost, plan)`` where ``plan`` is a dense ``len(a) x len(b)`` array.
    """
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    M = np.ascontiguousarray(M, dtype=float)
    if M.shape != (a.size, b.size):
        raise ValueError(f"cost matrix shape {M.shape} does not match ({a.size}, {b.size})")
    if a.size == 0 or b.size == 0:
        raise ValueError("empty histogram")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("histograms must be non-negative")
    sa, sb = a.sum(), b.sum()
    if abs(sa - sb) > 1e-9 * max(sa, sb):
        raise ValueError(f"histogram totals differ: {sa} vs {sb}")
    ia = np.flatnonzero(a)
    ib = np.flatnonzero(b)
    sub = np.ascontiguousarray(M[np.ix_(ia, ib)])
    bb = b[ib] * (sa / sb)
    if max_iter is None:
        max_iter = 50 * (ia.size + ib.size) * max(8, int(np.sqrt(ia.size * ib.size)))
    tol = 1e-12 * max(1.0, float(np.abs(sub).max()))
    fn = _solve if _accel.numba_enabled() else _accel.py_func(_solve)
    cost, status, bi, bj, bx = fn(a[ia], bb, sub, int(max_iter), tol)
    if status != 0:
        raise RuntimeError("transport simplex hit its iteration cap")
    plan = np.zeros((a.size, b.size))
    np.add.at(plan, (ia[bi], ib[bj]), bx)
    return float(cost), plan
