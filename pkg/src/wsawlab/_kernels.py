"""Numba kernels for the walk-sum hot paths.

The enumeration kernel runs an iterative depth-first search over walk
extensions on a finite cell graph (domain intersected with the reachable
window).  Each visited node is a complete walk; its weight
beta^len * rho is accumulated into the endpoint's slot with Kahan
compensation, in canonical neighbor order, so results are bit-reproducible
and independent of how work is scheduled.

Branch pruning is certified: a subtree rooted at a node of weight w and
remaining depth r contributes at most w * T[cell, r], where
T[c, r] = sum_{m=1..r} beta^m * (#length-m walks from c inside the cell
graph).  Pruned bounds are added to the row's upper-bound budget, never to
the lower bound.

All kernels are nogil so a thread pool can run independent subtree tasks
in parallel; merging happens outside, in fixed task order.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def explore(nbr, pow1ml, beta, N, cap, tol, T, path, wstack, cstack, depth0, occ,
            out_sum, out_comp, task_paths, task_wgts):
    """DFS below the node path[depth0] (weight wstack[depth0], occ filled).

    Visits descendants at depths depth0+1 .. cap, accumulating each into
    out_sum/out_comp.  With cap < N, surviving depth-cap nodes are not
    descended but written to task_paths/task_wgts for later expansion.
    Returns (number of tasks, pruned-mass bound).
    """
    twod = nbr.shape[1]
    ntasks = 0
    pruned = 0.0
    pruned_c = 0.0
    depth = depth0
    cstack[depth0] = 0
    while True:
        if cstack[depth] < twod:
            j = cstack[depth]
            cstack[depth] += 1
            nc = nbr[path[depth], j]
            if nc < 0:
                continue
            nw = wstack[depth] * beta * pow1ml[occ[nc]]
            if nw == 0.0:
                continue
            nd = depth + 1
            y = nw - out_comp[nc]
            t = out_sum[nc] + y
            out_comp[nc] = (t - out_sum[nc]) - y
            out_sum[nc] = t
            if nd == N:
                continue
            b = nw * T[nc, N - nd]
            if b < tol:
                yb = b - pruned_c
                tb = pruned + yb
                pruned_c = (tb - pruned) - yb
                pruned = tb
                continue
            if nd == cap:
                task_wgts[ntasks] = nw
                for i in range(nd):
                    task_paths[ntasks, i] = path[i]
                task_paths[ntasks, nd] = nc
                ntasks += 1
                continue
            depth = nd
            path[depth] = nc
            wstack[depth] = nw
            occ[nc] += 1
            cstack[depth] = 0
        else:
            if depth == depth0:
                break
            occ[path[depth]] -= 1
            depth -= 1
    return ntasks, pruned


@njit(cache=True, nogil=True)
def run_stage1(nbr, pow1ml, beta, N, cap, tol, T, start, out_sum, out_comp,
               task_paths, task_wgts):
    """Record the zero-length walk and explore depths 1..cap from start."""
    ncells = nbr.shape[0]
    occ = np.zeros(ncells, np.int32)
    out_sum[start] = 1.0
    if N == 0:
        return 0, 0.0
    b = T[start, N]
    if b < tol:
        return 0, b
    path = np.empty(N + 1, np.int32)
    wstack = np.empty(N + 1, np.float64)
    cstack = np.empty(N + 1, np.int32)
    path[0] = start
    wstack[0] = 1.0
    occ[start] = 1
    return explore(nbr, pow1ml, beta, N, cap, tol, T, path, wstack, cstack, 0, occ,
                   out_sum, out_comp, task_paths, task_wgts)


@njit(cache=True, nogil=True)
def run_task_range(nbr, pow1ml, beta, N, K, tol, T, task_paths, task_wgts, t0, t1,
                   out_sum, out_comp):
    """Expand tasks t0..t1-1 sequentially into the given buffers."""
    ncells = nbr.shape[0]
    occ = np.zeros(ncells, np.int32)
    path = np.empty(N + 1, np.int32)
    wstack = np.empty(N + 1, np.float64)
    cstack = np.empty(N + 1, np.int32)
    dummy_paths = np.empty((1, 1), np.int32)
    dummy_wgts = np.empty(1, np.float64)
    pruned = 0.0
    for t in range(t0, t1):
        for i in range(K + 1):
            c = task_paths[t, i]
            path[i] = c
            occ[c] += 1
        wstack[K] = task_wgts[t]
        _, p = explore(nbr, pow1ml, beta, N, N, tol, T, path, wstack, cstack, K, occ,
                       out_sum, out_comp, dummy_paths, dummy_wgts)
        pruned += p
        for i in range(K + 1):
            occ[task_paths[t, i]] -= 1
    return pruned


@njit(cache=True, nogil=True)
def merge_into(gsum, gcomp, psum, pcomp):
    """Fold a partial Kahan pair into the global one (fixed call order)."""
    for c in range(gsum.size):
        s = psum[c]
        if s != 0.0:
            y = s - gcomp[c]
            t = gsum[c] + y
            gcomp[c] = (t - gsum[c]) - y
            gsum[c] = t
        cc = pcomp[c]
        if cc != 0.0:
            y = (-cc) - gcomp[c]
            t = gsum[c] + y
            gcomp[c] = (t - gsum[c]) - y
            gsum[c] = t


# ---------------------------------------------------------------------------
# Deterministic PRNG (SplitMix64) with per-trial substreams
# ---------------------------------------------------------------------------

SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True, nogil=True, inline="always")
def _sm64_next(state):
    state = state + SM64_GAMMA
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True, nogil=True, inline="always")
def _stream_state(seed, stream):
    """Substream derivation: scramble the stream id twice."""
    _, z = _sm64_next(np.uint64(seed) + np.uint64(stream) * SM64_GAMMA)
    _, z2 = _sm64_next(z)
    return z2


@njit(cache=True, nogil=True, inline="always")
def _uniform01(state):
    state, z = _sm64_next(state)
    return state, (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


# ---------------------------------------------------------------------------
# Monte Carlo estimator for fixed-length walk sums
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def mc_green_chunk(nbr, pow1ml, beta, n, twod, start, target, nonreversing,
                   seed, i0, i1):
    """Sum and sum-of-squares of the per-sample estimator over samples i0..i1-1.

    One sample draws a length-n walk from start (uniform steps, or uniform
    non-reversing after the first step) and scores
    count_weight * beta^n * rho if it stays in the cell graph and ends at
    target, else 0.
    """
    ncells = nbr.shape[0]
    occ = np.zeros(ncells, np.int32)
    touched = np.empty(n + 1, np.int32)
    if nonreversing:
        count_weight = twod * (twod - 1.0) ** (n - 1) if n >= 1 else 1.0
    else:
        count_weight = float(twod) ** n
    base = count_weight * beta**n
    acc = 0.0
    acc2 = 0.0
    for i in range(i0, i1):
        state = _stream_state(seed, np.int64(n) * np.int64(1_000_003) + i)
        pos = start
        occ[pos] = 1
        touched[0] = pos
        ntouch = 1
        rho = 1.0
        alive = True
        last_dir = -1
        for _step in range(n):
            state, u = _uniform01(state)
            if nonreversing and last_dir >= 0:
                j = int(u * (twod - 1))
                if j >= twod - 1:
                    j = twod - 2
                rev = last_dir ^ 1
                if j >= rev:
                    j += 1
            else:
                j = int(u * twod)
                if j >= twod:
                    j = twod - 1
            nxt = nbr[pos, j]
            if nxt < 0:
                alive = False
                break
            rho *= pow1ml[occ[nxt]]
            if occ[nxt] == 0:
                touched[ntouch] = nxt
                ntouch += 1
            occ[nxt] += 1
            pos = nxt
            last_dir = j
        val = 0.0
        if alive and pos == target:
            val = base * rho
        acc += val
        acc2 += val * val
        for k in range(ntouch):
            occ[touched[k]] = 0
    return acc, acc2


# ---------------------------------------------------------------------------
# Random-walk simulation kernels (reflection coupling, exit times)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def coupling_chunk(d, u0, v0, horizon, seed, i0, i1, merge_counts,
                   sum_u, sumsq_u, sum_v, sumsq_v):
    """Reflection coupling of two walks started at u0 and v0.

    The first walk takes uniform steps.  The second copies every step
    except on the currently active discrepancy coordinate (the lowest
    index where the positions differ), where the step sign is flipped
    until that coordinate agrees; then the next discrepancy becomes
    active.  merge_counts[t] counts trials with merge time exactly t
    (slot horizon+1 collects never-merged trials).  Final-position
    coordinate sums feed the marginal-law checks.
    """
    uu = np.empty(d, np.int64)
    vv = np.empty(d, np.int64)
    for i in range(i0, i1):
        state = _stream_state(seed, i)
        for a in range(d):
            uu[a] = u0[a]
            vv[a] = v0[a]
        active = -1
        for a in range(d):
            if uu[a] != vv[a]:
                active = a
                break
        merged_at = 0 if active == -1 else horizon + 1
        for t in range(horizon):
            state, r = _uniform01(state)
            j = int(r * (2 * d))
            if j >= 2 * d:
                j = 2 * d - 1
            axis = j >> 1
            step = 1 if (j & 1) == 0 else -1
            uu[axis] += step
            if axis == active:
                vv[axis] -= step
                if uu[axis] == vv[axis]:
                    active = -1
                    for a in range(d):
                        if uu[a] != vv[a]:
                            active = a
                            break
                    if active == -1:
                        merged_at = t + 1
            else:
                vv[axis] += step
        merge_counts[merged_at] += 1
        for a in range(d):
            sum_u[a] += uu[a]
            sumsq_u[a] += float(uu[a]) * uu[a]
            sum_v[a] += vv[a]
            sumsq_v[a] += float(vv[a]) * vv[a]


@njit(cache=True, nogil=True)
def exit_time_chunk(d, L, start, seed, i0, i1):
    """Sum and sum-of-squares of the exit time of the box of radius L-1."""
    pos = np.empty(d, np.int64)
    acc = 0.0
    acc2 = 0.0
    for i in range(i0, i1):
        state = _stream_state(seed, i)
        for a in range(d):
            pos[a] = start[a]
        t = 0
        while True:
            state, r = _uniform01(state)
            j = int(r * (2 * d))
            if j >= 2 * d:
                j = 2 * d - 1
            axis = j >> 1
            pos[axis] += 1 if (j & 1) == 0 else -1
            t += 1
            out = False
            for a in range(d):
                if pos[a] > L - 1 or pos[a] < -(L - 1):
                    out = True
                    break
            if out:
                break
        acc += t
        acc2 += float(t) * t
    return acc, acc2
