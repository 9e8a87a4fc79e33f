"""Union-find kernels for the Monte Carlo engine.

Weighted union-find with per-element displacement vectors: each element
stores its integer position relative to its parent, composed under path
compression.  Joining two vertices already sharing a root with an
inconsistent relative position means the cluster closed a loop with
non-zero net displacement, i.e. it wraps the torus.

All kernels are numba-compiled, release the GIL, and operate only on
arrays they own, so trials parallelize over threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _find(parent, potx, poty, v):
    root = v
    rx = np.int64(0)
    ry = np.int64(0)
    while parent[root] != root:
        rx += potx[root]
        ry += poty[root]
        root = parent[root]
    cur = v
    cx = rx
    cy = ry
    while parent[cur] != root:
        nxt = parent[cur]
        nx = cx - potx[cur]
        ny = cy - poty[cur]
        parent[cur] = root
        potx[cur] = cx
        poty[cur] = cy
        cur = nxt
        cx = nx
        cy = ny
    return root, rx, ry


@njit(cache=True, nogil=True)
def _activate(
    v, indptr, indices, dispx, dispy, parent, potx, poty, size, active,
    has_a, has_b, side_a, side_b, maxsize,
):
    """Open vertex v and merge with its open neighbors.  Returns
    (wrapped, crossed, new max cluster size)."""
    parent[v] = v
    potx[v] = 0
    poty[v] = 0
    size[v] = 1
    active[v] = True
    has_a[v] = side_a[v]
    has_b[v] = side_b[v]
    wrapped = False
    best = maxsize
    if 1 > best:
        best = 1
    for k in range(indptr[v], indptr[v + 1]):
        u = indices[k]
        if not active[u]:
            continue
        rv, vx, vy = _find(parent, potx, poty, v)
        ru, ux, uy = _find(parent, potx, poty, u)
        if rv == ru:
            if vx + dispx[k] != ux or vy + dispy[k] != uy:
                wrapped = True
            continue
        # constraint pos(u) = pos(v) + d fixes the new root potential
        px = vx + dispx[k] - ux
        py = vy + dispy[k] - uy
        if size[rv] >= size[ru]:
            parent[ru] = rv
            potx[ru] = px
            poty[ru] = py
            size[rv] += size[ru]
            if has_a[ru]:
                has_a[rv] = True
            if has_b[ru]:
                has_b[rv] = True
            if size[rv] > best:
                best = size[rv]
        else:
            parent[rv] = ru
            potx[rv] = -px
            poty[rv] = -py
            size[ru] += size[rv]
            if has_a[rv]:
                has_a[ru] = True
            if has_b[rv]:
                has_b[ru] = True
            if size[ru] > best:
                best = size[ru]
    rv, _, _ = _find(parent, potx, poty, v)
    crossed = has_a[rv] and has_b[rv]
    return wrapped, crossed, best


@njit(cache=True, nogil=True)
def nz_trial(
    indptr, indices, dispx, dispy, pre_active, order, side_a, side_b, maxsizes
):
    """One Newman-Ziff trial.

    Activates ``pre_active`` vertices first (not counted), then ``order``
    one by one.  Writes the largest cluster size after each counted
    activation into ``maxsizes`` and returns (first count with a wrapping
    cluster, first count with a side-to-side cluster); counts are
    len(order)+1 when the event never happens.
    """
    n = indptr.shape[0] - 1
    parent = np.empty(n, dtype=np.int64)
    potx = np.zeros(n, dtype=np.int64)
    poty = np.zeros(n, dtype=np.int64)
    size = np.zeros(n, dtype=np.int64)
    active = np.zeros(n, dtype=np.bool_)
    has_a = np.zeros(n, dtype=np.bool_)
    has_b = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        parent[i] = i
    maxsize = np.int64(0)
    wrap_step = order.shape[0] + 1
    cross_step = order.shape[0] + 1
    for j in range(pre_active.shape[0]):
        w, c, maxsize = _activate(
            pre_active[j], indptr, indices, dispx, dispy,
            parent, potx, poty, size, active, has_a, has_b, side_a, side_b, maxsize,
        )
    for t in range(order.shape[0]):
        w, c, maxsize = _activate(
            order[t], indptr, indices, dispx, dispy,
            parent, potx, poty, size, active, has_a, has_b, side_a, side_b, maxsize,
        )
        maxsizes[t] = maxsize
        if w and wrap_step > t + 1:
            wrap_step = t + 1
        if c and cross_step > t + 1:
            cross_step = t + 1
    return wrap_step, cross_step


@njit(cache=True, nogil=True)
def label_components(indptr, indices, dispx, dispy, open_mask, labels, wraps):
    """Union-find labelling of the open subgraph at a fixed configuration.

    labels[v] = root id of v's cluster (-1 if closed); wraps[r] True if
    the cluster rooted at r wraps.  Returns the number of clusters.
    """
    n = indptr.shape[0] - 1
    parent = np.empty(n, dtype=np.int64)
    potx = np.zeros(n, dtype=np.int64)
    poty = np.zeros(n, dtype=np.int64)
    size = np.zeros(n, dtype=np.int64)
    wrap_flag = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        parent[i] = i
        size[i] = 1
    for v in range(n):
        if not open_mask[v]:
            continue
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if u < v or not open_mask[u]:
                continue
            rv, vx, vy = _find(parent, potx, poty, v)
            ru, ux, uy = _find(parent, potx, poty, u)
            if rv == ru:
                if vx + dispx[k] != ux or vy + dispy[k] != uy:
                    wrap_flag[rv] = True
                continue
            px = vx + dispx[k] - ux
            py = vy + dispy[k] - uy
            if size[rv] >= size[ru]:
                parent[ru] = rv
                potx[ru] = px
                poty[ru] = py
                size[rv] += size[ru]
                if wrap_flag[ru]:
                    wrap_flag[rv] = True
            else:
                parent[rv] = ru
                potx[rv] = -px
                poty[rv] = -py
                size[ru] += size[rv]
                if wrap_flag[rv]:
                    wrap_flag[ru] = True
    count = 0
    for v in range(n):
        if not open_mask[v]:
            labels[v] = -1
            continue
        r, _, _ = _find(parent, potx, poty, v)
        labels[v] = r
        if r == v:
            count += 1
            wraps[v] = wrap_flag[v]
    return count
