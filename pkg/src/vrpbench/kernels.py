"""Hot numeric kernels: distance matrices, Clarke-Wright merging and the
simulated-annealing move loop.

Every kernel is plain Python over numpy arrays, compiled with numba unless
``VRPBENCH_DISABLE_NUMBA`` is set. Where a vectorised formulation exists
(distances, savings values) the fallback uses it instead of the scalar loop.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

# relative slack on capacity comparisons; normalised demands are inexact floats
CAPACITY_RTOL = 1e-9

RELOCATE, SWAP, TWO_OPT, CROSS = 0, 1, 2, 3
OPERATORS = ("relocate", "swap", "two_opt_intra", "cross_exchange")

# uniforms consumed by every SA move: operator, node a, node b, two shape
# parameters and the acceptance test
DRAWS_PER_MOVE = 6

STOP_EXHAUSTED = 0
STOP_IMPROVED = 1
STOP_MOVES = 2


# ---------------------------------------------------------------- distances


def _distance_matrix_numpy(coords, rounded):
    dx = coords[:, None, 0] - coords[None, :, 0]
    dy = coords[:, None, 1] - coords[None, :, 1]
    dist = np.sqrt(dx * dx + dy * dy)
    if rounded:
        dist = np.floor(dist + 0.5)
    return dist


@njit
def _distance_matrix_jit(coords, rounded):
    n = coords.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dx = coords[i, 0] - coords[j, 0]
            dy = coords[i, 1] - coords[j, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if rounded:
                d = math.floor(d + 0.5)
            out[i, j] = d
            out[j, i] = d
    return out


def distance_matrix(coords, rounded):
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    if USE_NUMBA:
        return _distance_matrix_jit(coords, bool(rounded))
    return _distance_matrix_numpy(coords, bool(rounded))


def leg_lengths(coords, tails, heads, rounded):
    """Length of each leg ``tails[k] -> heads[k]``, bit-identical to the matrix."""
    dx = coords[tails, 0] - coords[heads, 0]
    dy = coords[tails, 1] - coords[heads, 1]
    dist = np.sqrt(dx * dx + dy * dy)
    if rounded:
        dist = np.floor(dist + 0.5)
    return dist


# ------------------------------------------------------------------ savings


def _savings_numpy(dist):
    n = dist.shape[0] - 1
    i, j = np.triu_indices(n, k=1)
    i = i + 1
    j = j + 1
    return dist[0, i] + dist[0, j] - dist[i, j], i.astype(np.int64), j.astype(np.int64)


@njit
def _savings_jit(dist):
    n = dist.shape[0] - 1
    m = n * (n - 1) // 2
    s = np.empty(m)
    pi = np.empty(m, np.int64)
    pj = np.empty(m, np.int64)
    k = 0
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            s[k] = dist[0, i] + dist[0, j] - dist[i, j]
            pi[k] = i
            pj[k] = j
            k += 1
    return s, pi, pj


def savings_order(dist):
    """Non-negative savings pairs sorted by (saving desc, i asc, j asc)."""
    if USE_NUMBA:
        s, pi, pj = _savings_jit(dist)
    else:
        s, pi, pj = _savings_numpy(dist)
    keep = s >= 0.0
    s, pi, pj = s[keep], pi[keep], pj[keep]
    # pairs are generated in (i, j) order, so ordering ties by position keeps
    # the (i asc, j asc) tie-break
    if USE_NUMBA:
        order = np.argsort(-s)
        _sort_tie_runs(s[order], order)
    else:
        order = np.argsort(-s, kind="stable")
    return pi[order], pj[order]


@njit
def _sort_tie_runs(values, order):
    """Sort ``order`` ascending inside every run of equal ``values``."""
    m = values.shape[0]
    a = 0
    while a < m:
        b = a + 1
        while b < m and values[b] == values[a]:
            b += 1
        if b - a > 1:
            order[a:b] = np.sort(order[a:b])
        a = b


@njit
def _reverse_chain(left, right, head, tail, r):
    node = head[r]
    while node != 0:
        nxt = right[node]
        right[node] = left[node]
        left[node] = nxt
        node = nxt
    h = head[r]
    head[r] = tail[r]
    tail[r] = h


@njit
def savings_merge(pi, pj, demand, capacity):
    """Parallel Clarke-Wright merging over a pre-sorted pair list.

    Returns ``(flat, starts, count)``: route ``k`` is
    ``flat[starts[k]:starts[k + 1]]``.
    """
    n = demand.shape[0] - 1
    cap = capacity * (1.0 + CAPACITY_RTOL)
    left = np.zeros(n + 1, np.int64)
    right = np.zeros(n + 1, np.int64)
    rid = np.arange(n + 1)
    head = np.arange(n + 1)
    tail = np.arange(n + 1)
    size = np.ones(n + 1, np.int64)
    load = demand.copy()
    for k in range(pi.shape[0]):
        i = pi[k]
        j = pj[k]
        ri = rid[i]
        rj = rid[j]
        if ri == rj:
            continue
        if load[ri] + load[rj] > cap:
            continue
        if head[ri] != i and tail[ri] != i:
            continue
        if head[rj] != j and tail[rj] != j:
            continue
        if tail[ri] != i:
            _reverse_chain(left, right, head, tail, ri)
        if head[rj] != j:
            _reverse_chain(left, right, head, tail, rj)
        right[i] = j
        left[j] = i
        new_head = head[ri]
        new_tail = tail[rj]
        if size[ri] >= size[rj]:
            keep = ri
            drop = rj
        else:
            keep = rj
            drop = ri
        node = head[drop]
        for _ in range(size[drop]):
            rid[node] = keep
            node = right[node]
        head[keep] = new_head
        tail[keep] = new_tail
        load[keep] = load[ri] + load[rj]
        size[keep] = size[ri] + size[rj]

    flat = np.empty(n, np.int64)
    starts = np.zeros(n + 1, np.int64)
    count = 0
    pos = 0
    for node in range(1, n + 1):
        if left[node] != 0:
            continue
        starts[count] = pos
        cur = node
        while cur != 0:
            flat[pos] = cur
            pos += 1
            cur = right[cur]
        count += 1
    starts[count] = pos
    return flat, starts, count


# ------------------------------------------------------- simulated annealing


@njit
def _row_cost(dist, row, length):
    if length == 0:
        return 0.0
    total = dist[0, row[0]]
    for p in range(length - 1):
        total += dist[row[p], row[p + 1]]
    return total + dist[row[length - 1], 0]


@njit
def _write_row(routes, rlen, where_r, where_p, r, src, length):
    for p in range(length):
        node = src[p]
        routes[r, p] = node
        where_r[node] = r
        where_p[node] = p
    rlen[r] = length


@njit
def _remove_at(routes, rlen, where_p, r, pos):
    length = rlen[r]
    for p in range(pos, length - 1):
        node = routes[r, p + 1]
        routes[r, p] = node
        where_p[node] = p
    rlen[r] = length - 1


@njit
def _insert_at(routes, rlen, where_r, where_p, r, pos, node):
    length = rlen[r]
    for p in range(length, pos, -1):
        moved = routes[r, p - 1]
        routes[r, p] = moved
        where_p[moved] = p
    routes[r, pos] = node
    where_r[node] = r
    where_p[node] = pos
    rlen[r] = length + 1


@njit
def _neighbours(routes, rlen, r, pos):
    prev = routes[r, pos - 1] if pos > 0 else 0
    nxt = routes[r, pos + 1] if pos < rlen[r] - 1 else 0
    return prev, nxt


@njit
def sa_chunk(dist, demand, capacity, routes, rlen, rload, where_r, where_p,
             buf, draws, op_cdf, istate, fstate, max_moves, moves_per_temp,
             cooling, t0, min_temp):
    """Run SA moves until the draw block is used up, ``max_moves`` moves have
    been made, or the best-so-far cost strictly improves.

    ``istate`` = [draw cursor, moves at current temperature, total moves];
    ``fstate`` = [current cost, best cost, temperature]. Both are updated in
    place. Returns one of the ``STOP_*`` codes.
    """
    n = demand.shape[0] - 1
    nslots = routes.shape[0]
    cap = capacity * (1.0 + CAPACITY_RTOL)
    cursor = istate[0]
    at_temp = istate[1]
    total = istate[2]
    cur = fstate[0]
    best = fstate[1]
    temp = fstate[2]
    done = 0
    status = STOP_EXHAUSTED

    while cursor < draws.shape[0]:
        if done >= max_moves:
            status = STOP_MOVES
            break
        x_op = draws[cursor, 0]
        x_a = draws[cursor, 1]
        x_b = draws[cursor, 2]
        x_c = draws[cursor, 3]
        x_d = draws[cursor, 4]
        x_acc = draws[cursor, 5]
        cursor += 1
        done += 1
        total += 1

        op = 0
        while op < 3 and x_op >= op_cdf[op]:
            op += 1

        u = 1 + min(int(x_a * n), n - 1)
        ru = where_r[u]
        pu = where_p[u]
        lu = rlen[ru]
        valid = False
        delta = 0.0
        # move parameters resolved below, applied after acceptance
        mode = 0
        rv = -1
        ins = 0
        lo = 0
        hi = 0
        la = 0
        lb = 0
        pv = 0
        v = 0
        seg_shift = 0.0

        if op == RELOCATE:
            v = min(int(x_b * (n + 1)), n)
            if v == 0:
                if lu > 1:
                    for r in range(nslots):
                        if rlen[r] == 0:
                            rv = r
                            break
                    if rv >= 0:
                        prev, nxt = _neighbours(routes, rlen, ru, pu)
                        delta = (dist[prev, nxt] - dist[prev, u] - dist[u, nxt]
                                 + dist[0, u] + dist[u, 0])
                        ins = 0
                        mode = 1
                        valid = True
            elif v != u:
                rv = where_r[v]
                pv = where_p[v]
                after = x_c >= 0.5
                if rv != ru:
                    if rload[rv] + demand[u] <= cap:
                        ins = pv + 1 if after else pv
                        a = routes[rv, ins - 1] if ins > 0 else 0
                        b = routes[rv, ins] if ins < rlen[rv] else 0
                        prev, nxt = _neighbours(routes, rlen, ru, pu)
                        delta = (dist[prev, nxt] - dist[prev, u] - dist[u, nxt]
                                 + dist[a, u] + dist[u, b] - dist[a, b])
                        mode = 1
                        valid = True
                else:
                    k = 0
                    for p in range(lu):
                        x = routes[ru, p]
                        if x == u:
                            continue
                        if x == v and not after:
                            buf[0, k] = u
                            k += 1
                        buf[0, k] = x
                        k += 1
                        if x == v and after:
                            buf[0, k] = u
                            k += 1
                    delta = _row_cost(dist, buf[0], lu) - _row_cost(dist, routes[ru], lu)
                    mode = 2
                    valid = True

        elif op == SWAP:
            v = 1 + min(int(x_b * n), n - 1)
            if v != u:
                rv = where_r[v]
                pv = where_p[v]
                if rv != ru:
                    if (rload[ru] - demand[u] + demand[v] <= cap
                            and rload[rv] - demand[v] + demand[u] <= cap):
                        a, b = _neighbours(routes, rlen, ru, pu)
                        c, e = _neighbours(routes, rlen, rv, pv)
                        delta = (dist[a, v] + dist[v, b] - dist[a, u] - dist[u, b]
                                 + dist[c, u] + dist[u, e] - dist[c, v] - dist[v, e])
                        mode = 1
                        valid = True
                else:
                    for p in range(lu):
                        buf[0, p] = routes[ru, p]
                    buf[0, pu] = v
                    buf[0, pv] = u
                    delta = _row_cost(dist, buf[0], lu) - _row_cost(dist, routes[ru], lu)
                    mode = 2
                    valid = True

        elif op == TWO_OPT:
            if lu >= 2:
                pj = min(int(x_b * lu), lu - 1)
                if pj != pu:
                    lo = min(pu, pj)
                    hi = max(pu, pj)
                    a = routes[ru, lo - 1] if lo > 0 else 0
                    b = routes[ru, hi + 1] if hi < lu - 1 else 0
                    first = routes[ru, lo]
                    last = routes[ru, hi]
                    delta = dist[a, last] + dist[first, b] - dist[a, first] - dist[last, b]
                    valid = True

        else:
            v = 1 + min(int(x_b * n), n - 1)
            rv = where_r[v]
            if rv != ru:
                pv = where_p[v]
                la = min(1 + int(x_c * 3.0), lu - pu)
                lb = min(1 + int(x_d * 3.0), rlen[rv] - pv)
                seg_a = 0.0
                for p in range(pu, pu + la):
                    seg_a += demand[routes[ru, p]]
                seg_b = 0.0
                for p in range(pv, pv + lb):
                    seg_b += demand[routes[rv, p]]
                if (rload[ru] - seg_a + seg_b <= cap
                        and rload[rv] - seg_b + seg_a <= cap):
                    a0 = routes[ru, pu]
                    a1 = routes[ru, pu + la - 1]
                    b0 = routes[rv, pv]
                    b1 = routes[rv, pv + lb - 1]
                    pa = routes[ru, pu - 1] if pu > 0 else 0
                    na = routes[ru, pu + la] if pu + la < lu else 0
                    pb = routes[rv, pv - 1] if pv > 0 else 0
                    nb = routes[rv, pv + lb] if pv + lb < rlen[rv] else 0
                    delta = (dist[pa, b0] + dist[b1, na] + dist[pb, a0] + dist[a1, nb]
                             - dist[pa, a0] - dist[a1, na] - dist[pb, b0] - dist[b1, nb])
                    seg_shift = seg_b - seg_a
                    mode = 3
                    valid = True

        accepted = False
        if valid:
            if delta <= 0.0:
                accepted = True
            elif temp > 0.0 and x_acc < math.exp(-delta / temp):
                accepted = True

        if accepted:
            if op == RELOCATE or op == SWAP:
                if mode == 2:
                    _write_row(routes, rlen, where_r, where_p, ru, buf[0], lu)
                elif op == RELOCATE:
                    _remove_at(routes, rlen, where_p, ru, pu)
                    _insert_at(routes, rlen, where_r, where_p, rv, ins, u)
                    rload[ru] -= demand[u]
                    rload[rv] += demand[u]
                else:
                    routes[ru, pu] = v
                    routes[rv, pv] = u
                    where_r[u] = rv
                    where_p[u] = pv
                    where_r[v] = ru
                    where_p[v] = pu
                    shift = demand[v] - demand[u]
                    rload[ru] += shift
                    rload[rv] -= shift
            elif op == TWO_OPT:
                i = lo
                j = hi
                while i < j:
                    x = routes[ru, i]
                    y = routes[ru, j]
                    routes[ru, i] = y
                    routes[ru, j] = x
                    where_p[y] = i
                    where_p[x] = j
                    i += 1
                    j -= 1
            else:
                lv = rlen[rv]
                k = 0
                for p in range(pu):
                    buf[0, k] = routes[ru, p]
                    k += 1
                for p in range(pv, pv + lb):
                    buf[0, k] = routes[rv, p]
                    k += 1
                for p in range(pu + la, lu):
                    buf[0, k] = routes[ru, p]
                    k += 1
                new_lu = k
                k = 0
                for p in range(pv):
                    buf[1, k] = routes[rv, p]
                    k += 1
                for p in range(pu, pu + la):
                    buf[1, k] = routes[ru, p]
                    k += 1
                for p in range(pv + lb, lv):
                    buf[1, k] = routes[rv, p]
                    k += 1
                _write_row(routes, rlen, where_r, where_p, ru, buf[0], new_lu)
                _write_row(routes, rlen, where_r, where_p, rv, buf[1], k)
                rload[ru] += seg_shift
                rload[rv] -= seg_shift
            cur += delta

        at_temp += 1
        if at_temp >= moves_per_temp:
            at_temp = 0
            temp *= cooling
            if temp < min_temp:
                temp = t0

        if accepted and cur < best - 1e-9 * abs(best) - 1e-12:
            best = cur
            status = STOP_IMPROVED
            break

    istate[0] = cursor
    istate[1] = at_temp
    istate[2] = total
    fstate[0] = cur
    fstate[1] = best
    fstate[2] = temp
    return status


@njit
def rows_cost(dist, routes, rlen):
    total = 0.0
    for r in range(routes.shape[0]):
        total += _row_cost(dist, routes[r], rlen[r])
    return total
