"""Numba kernels: CART growth, tree voting, SMO dual solver, TreeSHAP.

Everything here works on flat arrays so the models stay trivially
serializable and the attribution pass can walk the same structures. All
randomness flows through an explicit splitmix64 state, so results are
reproducible and independent of thread count.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64_1 = np.uint64(0x9E3779B97F4A7C15)
U64_2 = np.uint64(0xBF58476D1CE4E5B9)
U64_3 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _next_u64(state: np.uint64):
    state = state + U64_1
    z = state
    z = (z ^ (z >> np.uint64(30))) * U64_2
    z = (z ^ (z >> np.uint64(27))) * U64_3
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def _next_unit(state: np.uint64):
    state, z = _next_u64(state)
    return state, float(z >> np.uint64(11)) / 9007199254740992.0  # 2**53


@njit(cache=True)
def _sort_pairs(vals, order, n):
    """Iterative quicksort of vals[:n] with order[:n] carried along."""
    stack_lo = np.empty(64, np.int64)
    stack_hi = np.empty(64, np.int64)
    sp = 0
    stack_lo[0] = 0
    stack_hi[0] = n - 1
    while sp >= 0:
        lo = stack_lo[sp]
        hi = stack_hi[sp]
        sp -= 1
        while lo < hi:
            if hi - lo < 16:
                for i in range(lo + 1, hi + 1):
                    v = vals[i]
                    o = order[i]
                    j = i - 1
                    while j >= lo and vals[j] > v:
                        vals[j + 1] = vals[j]
                        order[j + 1] = order[j]
                        j -= 1
                    vals[j + 1] = v
                    order[j + 1] = o
                break
            mid = (lo + hi) // 2
            # median-of-three pivot
            if vals[mid] < vals[lo]:
                vals[lo], vals[mid] = vals[mid], vals[lo]
                order[lo], order[mid] = order[mid], order[lo]
            if vals[hi] < vals[lo]:
                vals[lo], vals[hi] = vals[hi], vals[lo]
                order[lo], order[hi] = order[hi], order[lo]
            if vals[hi] < vals[mid]:
                vals[mid], vals[hi] = vals[hi], vals[mid]
                order[mid], order[hi] = order[hi], order[mid]
            pivot = vals[mid]
            i = lo
            j = hi
            while i <= j:
                while vals[i] < pivot:
                    i += 1
                while vals[j] > pivot:
                    j -= 1
                if i <= j:
                    vals[i], vals[j] = vals[j], vals[i]
                    order[i], order[j] = order[j], order[i]
                    i += 1
                    j -= 1
            # recurse into the smaller side first, loop on the larger
            if j - lo < hi - i:
                if i < hi:
                    sp += 1
                    stack_lo[sp] = i
                    stack_hi[sp] = hi
                hi = j
            else:
                if lo < j:
                    sp += 1
                    stack_lo[sp] = lo
                    stack_hi[sp] = j
                lo = i


@njit(cache=True)
def build_tree(
    X,
    y,
    seed,
    max_depth,
    min_samples_split,
    m_try,
    bootstrap,
    feature,
    threshold,
    left,
    right,
    value,
    cover,
):
    """Grow one CART tree into the output arrays; returns node count.

    Ties on split gain resolve to the lowest feature index, then the lowest
    threshold (features are scanned in ascending order, thresholds in
    ascending order, and replacement requires a strict improvement).
    """
    n, d = X.shape
    state = np.uint64(seed)

    idx = np.empty(n, np.int64)
    if bootstrap:
        for i in range(n):
            state, u = _next_unit(state)
            j = int(u * n)
            if j >= n:
                j = n - 1
            idx[i] = j
    else:
        for i in range(n):
            idx[i] = i

    max_nodes = feature.shape[0]
    stack_node = np.empty(max_nodes, np.int64)
    stack_start = np.empty(max_nodes, np.int64)
    stack_end = np.empty(max_nodes, np.int64)
    stack_depth = np.empty(max_nodes, np.int64)
    sp = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n
    stack_depth[0] = 0
    n_nodes = 1

    cand = np.empty(d, np.int64)
    vals = np.empty(n, np.float64)
    labs = np.empty(n, np.int64)
    tmp = np.empty(n, np.int64)

    while sp >= 0:
        node = stack_node[sp]
        start = stack_start[sp]
        end = stack_end[sp]
        depth = stack_depth[sp]
        sp -= 1

        ns = end - start
        c1 = 0
        for i in range(start, end):
            c1 += y[idx[i]]
        cover[node] = float(ns)
        value[node] = 1.0 if 2 * c1 > ns else 0.0
        feature[node] = -1
        left[node] = -1
        right[node] = -1

        if depth >= max_depth or ns < min_samples_split or c1 == 0 or c1 == ns:
            continue

        p1 = c1 / ns
        parent_gini = 1.0 - (p1 * p1 + (1.0 - p1) * (1.0 - p1))

        for j in range(d):
            cand[j] = j
        take = m_try if m_try < d else d
        for t in range(take):
            state, u = _next_unit(state)
            j = t + int(u * (d - t))
            if j >= d:
                j = d - 1
            cand[t], cand[j] = cand[j], cand[t]
        sel = np.sort(cand[:take])

        best_gain = 0.0
        best_f = -1
        best_thr = 0.0
        for ci in range(take):
            f = sel[ci]
            for i in range(ns):
                row = idx[start + i]
                vals[i] = X[row, f]
                labs[i] = y[row]
            _sort_pairs(vals, labs, ns)
            run1 = 0
            for pos in range(ns - 1):
                run1 += labs[pos]
                v_cur = vals[pos]
                v_next = vals[pos + 1]
                if v_next <= v_cur:
                    continue
                nl = pos + 1
                nr = ns - nl
                pl = run1 / nl
                pr = (c1 - run1) / nr
                gl = 1.0 - (pl * pl + (1.0 - pl) * (1.0 - pl))
                gr = 1.0 - (pr * pr + (1.0 - pr) * (1.0 - pr))
                gain = parent_gini - (nl * gl + nr * gr) / ns
                if gain > best_gain and gain > 1e-15:
                    best_gain = gain
                    best_f = f
                    thr = 0.5 * (v_cur + v_next)
                    if thr >= v_next:  # adjacent floats: midpoint rounded up
                        thr = v_cur
                    best_thr = thr

        if best_f < 0 or n_nodes + 2 > max_nodes:
            continue

        # stable partition of idx[start:end] on the winning split
        n_left = 0
        for i in range(start, end):
            if X[idx[i], best_f] <= best_thr:
                tmp[n_left] = idx[i]
                n_left += 1
        n_right = 0
        for i in range(start, end):
            if X[idx[i], best_f] > best_thr:
                tmp[n_left + n_right] = idx[i]
                n_right += 1
        for i in range(ns):
            idx[start + i] = tmp[i]

        feature[node] = best_f
        threshold[node] = best_thr
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        left[node] = lid
        right[node] = rid
        sp += 1
        stack_node[sp] = rid
        stack_start[sp] = start + n_left
        stack_end[sp] = end
        stack_depth[sp] = depth + 1
        sp += 1
        stack_node[sp] = lid
        stack_start[sp] = start
        stack_end[sp] = start + n_left
        stack_depth[sp] = depth + 1

    return n_nodes


@njit(cache=True)
def tree_votes(feature, threshold, left, right, value, X, out):
    n = X.shape[0]
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]


@njit(cache=True)
def forest_votes(features, thresholds, lefts, rights, values, offsets, X):
    """Mean over trees of the per-tree class-1 vote."""
    n = X.shape[0]
    n_trees = offsets.shape[0] - 1
    out = np.zeros(n, np.float64)
    for t in range(n_trees):
        o = offsets[t]
        for i in range(n):
            node = 0
            while features[o + node] >= 0:
                if X[i, features[o + node]] <= thresholds[o + node]:
                    node = lefts[o + node]
                else:
                    node = rights[o + node]
            out[i] += values[o + node]
    return out / n_trees


@njit(cache=True)
def smo_solve(K, y, C, tol, max_iter):
    """Pairwise dual ascent with maximal-KKT-violation working set.

    K is the full kernel matrix, y is +-1. Returns (alpha, b, iterations,
    converged). Gradient of the dual objective is maintained incrementally.
    """
    n = y.shape[0]
    alpha = np.zeros(n, np.float64)
    grad = np.full(n, -1.0)  # d/d alpha of 0.5 a'Qa - e'a at a=0
    it = 0
    converged = False
    b = 0.0
    while it < max_iter:
        it += 1
        i_up = -1
        m_val = -1e300
        j_low = -1
        mm_val = 1e300
        for t in range(n):
            yg = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if yg > m_val:
                    m_val = yg
                    i_up = t
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                if yg < mm_val:
                    mm_val = yg
                    j_low = t
        if i_up < 0 or j_low < 0 or m_val - mm_val <= tol:
            converged = True
            it -= 1
            break
        i = i_up
        j = j_low
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 1e-12:
            quad = 1e-12
        delta = (m_val - mm_val) / quad
        # clip so both multipliers stay in [0, C]
        if y[i] > 0:
            if alpha[i] + delta > C:
                delta = C - alpha[i]
        else:
            if alpha[i] - delta < 0:
                delta = alpha[i]
        if y[j] > 0:
            if alpha[j] - delta < 0:
                delta = alpha[j]
        else:
            if alpha[j] + delta > C:
                delta = C - alpha[j]
        dai = delta if y[i] > 0 else -delta
        daj = -delta if y[j] > 0 else delta
        alpha[i] += dai
        alpha[j] += daj
        for t in range(n):
            grad[t] += y[t] * y[i] * K[t, i] * dai + y[t] * y[j] * K[t, j] * daj

    # bias from free support vectors, midpoint fallback otherwise
    n_free = 0
    b_sum = 0.0
    for t in range(n):
        if 1e-8 < alpha[t] < C - 1e-8:
            b_sum += -y[t] * grad[t]
            n_free += 1
    if n_free > 0:
        b = b_sum / n_free
    else:
        m_val = -1e300
        mm_val = 1e300
        for t in range(n):
            yg = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if yg > m_val:
                    m_val = yg
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                if yg < mm_val:
                    mm_val = yg
        b = (m_val + mm_val) / 2.0
    return alpha, b, it, converged


@njit(cache=True)
def shap_tree(
    feature,
    threshold,
    left,
    right,
    value,
    cover,
    x,
    phi,
):
    """Path-dependent TreeSHAP for one tree and one sample (adds into phi).

    Iterative depth-first traversal with per-level path buffers; node covers
    (training sample counts) weight the conditional expectations.
    """
    max_path = 64
    d_buf = np.empty((max_path, max_path), np.int64)
    z_buf = np.empty((max_path, max_path), np.float64)
    o_buf = np.empty((max_path, max_path), np.float64)
    w_buf = np.empty((max_path, max_path), np.float64)

    stack_cap = 4 * max_path
    s_node = np.empty(stack_cap, np.int64)
    s_lvl = np.empty(stack_cap, np.int64)
    s_plen = np.empty(stack_cap, np.int64)
    s_pz = np.empty(stack_cap, np.float64)
    s_po = np.empty(stack_cap, np.float64)
    s_pi = np.empty(stack_cap, np.int64)

    sp = 0
    s_node[0] = 0
    s_lvl[0] = 0
    s_plen[0] = 0
    s_pz[0] = 1.0
    s_po[0] = 1.0
    s_pi[0] = -1

    while sp >= 0:
        node = s_node[sp]
        lvl = s_lvl[sp]
        plen = s_plen[sp]
        pz = s_pz[sp]
        po = s_po[sp]
        pi = s_pi[sp]
        sp -= 1

        if lvl > 0:
            for i in range(plen):
                d_buf[lvl, i] = d_buf[lvl - 1, i]
                z_buf[lvl, i] = z_buf[lvl - 1, i]
                o_buf[lvl, i] = o_buf[lvl - 1, i]
                w_buf[lvl, i] = w_buf[lvl - 1, i]

        ud = plen  # index where the new path element lands
        d_buf[lvl, ud] = pi
        z_buf[lvl, ud] = pz
        o_buf[lvl, ud] = po
        w_buf[lvl, ud] = 1.0 if ud == 0 else 0.0
        for i in range(ud - 1, -1, -1):
            w_buf[lvl, i + 1] += po * w_buf[lvl, i] * (i + 1.0) / (ud + 1.0)
            w_buf[lvl, i] = pz * w_buf[lvl, i] * (ud - i) / (ud + 1.0)

        if feature[node] < 0:
            leaf_value = value[node]
            for path_index in range(1, ud + 1):
                # unwound weight sum excluding the element at path_index
                one_fraction = o_buf[lvl, path_index]
                zero_fraction = z_buf[lvl, path_index]
                next_one = w_buf[lvl, ud]
                total = 0.0
                for i in range(ud - 1, -1, -1):
                    if one_fraction != 0.0:
                        tmp = next_one * (ud + 1.0) / ((i + 1.0) * one_fraction)
                        total += tmp
                        next_one = w_buf[lvl, i] - tmp * zero_fraction * (ud - i) / (ud + 1.0)
                    else:
                        total += (w_buf[lvl, i] / zero_fraction) / ((ud - i) / (ud + 1.0))
                phi[d_buf[lvl, path_index]] += (
                    total * (one_fraction - zero_fraction) * leaf_value
                )
            continue

        f = feature[node]
        if x[f] <= threshold[node]:
            hot = left[node]
            cold = right[node]
        else:
            hot = right[node]
            cold = left[node]
        hot_z = cover[hot] / cover[node]
        cold_z = cover[cold] / cover[node]

        incoming_z = 1.0
        incoming_o = 1.0
        k = -1
        for i in range(1, ud + 1):
            if d_buf[lvl, i] == f:
                k = i
                break
        if k >= 0:
            incoming_z = z_buf[lvl, k]
            incoming_o = o_buf[lvl, k]
            # unwind element k out of the path
            one_fraction = o_buf[lvl, k]
            zero_fraction = z_buf[lvl, k]
            next_one = w_buf[lvl, ud]
            for i in range(ud - 1, -1, -1):
                if one_fraction != 0.0:
                    tmp = w_buf[lvl, i]
                    w_buf[lvl, i] = next_one * (ud + 1.0) / ((i + 1.0) * one_fraction)
                    next_one = tmp - w_buf[lvl, i] * zero_fraction * (ud - i) / (ud + 1.0)
                else:
                    w_buf[lvl, i] = (w_buf[lvl, i] * (ud + 1.0)) / (
                        zero_fraction * (ud - i)
                    )
            for i in range(k, ud):
                d_buf[lvl, i] = d_buf[lvl, i + 1]
                z_buf[lvl, i] = z_buf[lvl, i + 1]
                o_buf[lvl, i] = o_buf[lvl, i + 1]
            ud -= 1

        sp += 1
        s_node[sp] = cold
        s_lvl[sp] = lvl + 1
        s_plen[sp] = ud + 1
        s_pz[sp] = incoming_z * cold_z
        s_po[sp] = 0.0
        s_pi[sp] = f
        sp += 1
        s_node[sp] = hot
        s_lvl[sp] = lvl + 1
        s_plen[sp] = ud + 1
        s_pz[sp] = incoming_z * hot_z
        s_po[sp] = incoming_o
        s_pi[sp] = f
