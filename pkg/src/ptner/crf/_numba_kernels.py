"""numba-compiled lattice kernels; same signatures and semantics as _numpy_kernels."""
import math

import numpy as np
from numba import njit

NEG_INF = -np.inf


@njit(cache=True, nogil=True)
def _lse_col(a, trans, l):
    # log sum_k exp(a[k] + trans[k, l])
    L = a.shape[0]
    m = NEG_INF
    for k in range(L):
        v = a[k] + trans[k, l]
        if v > m:
            m = v
    if m == NEG_INF:
        return NEG_INF
    s = 0.0
    for k in range(L):
        s += math.exp(a[k] + trans[k, l] - m)
    return m + math.log(s)


@njit(cache=True, nogil=True)
def forward(emit, trans, start, stop, allowed):
    T, L = emit.shape
    alpha = np.full((T, L), NEG_INF)
    for l in range(L):
        if allowed[0, l]:
            alpha[0, l] = start[l] + emit[0, l]
    for t in range(1, T):
        for l in range(L):
            if allowed[t, l]:
                alpha[t, l] = _lse_col(alpha[t - 1], trans, l) + emit[t, l]
    m = NEG_INF
    for l in range(L):
        v = alpha[T - 1, l] + stop[l]
        if v > m:
            m = v
    if m == NEG_INF:
        return alpha, NEG_INF
    s = 0.0
    for l in range(L):
        s += math.exp(alpha[T - 1, l] + stop[l] - m)
    return alpha, m + math.log(s)


@njit(cache=True, nogil=True)
def backward(emit, trans, start, stop, allowed):
    T, L = emit.shape
    beta = np.full((T, L), NEG_INF)
    for l in range(L):
        if allowed[T - 1, l]:
            beta[T - 1, l] = stop[l]
    nxt = np.empty(L)
    for t in range(T - 2, -1, -1):
        for l in range(L):
            nxt[l] = emit[t + 1, l] + beta[t + 1, l] if allowed[t + 1, l] else NEG_INF
        for k in range(L):
            if not allowed[t, k]:
                continue
            m = NEG_INF
            for l in range(L):
                v = trans[k, l] + nxt[l]
                if v > m:
                    m = v
            if m == NEG_INF:
                continue
            s = 0.0
            for l in range(L):
                s += math.exp(trans[k, l] + nxt[l] - m)
            beta[t, k] = m + math.log(s)
    return beta


@njit(cache=True, nogil=True)
def marginals(emit, trans, start, stop, allowed):
    T, L = emit.shape
    alpha, log_z = forward(emit, trans, start, stop, allowed)
    node = np.zeros((T, L))
    edge = np.zeros((max(T - 1, 0), L, L))
    if log_z == NEG_INF:
        return node, edge, log_z
    beta = backward(emit, trans, start, stop, allowed)
    for t in range(T):
        for l in range(L):
            v = alpha[t, l] + beta[t, l]
            if v > NEG_INF:
                node[t, l] = math.exp(v - log_z)
    for t in range(T - 1):
        for k in range(L):
            if alpha[t, k] == NEG_INF:
                continue
            for l in range(L):
                v = alpha[t, k] + trans[k, l] + (emit[t + 1, l] + beta[t + 1, l])
                if v > NEG_INF:
                    edge[t, k, l] = math.exp(v - log_z)
    return node, edge, log_z


@njit(cache=True, nogil=True)
def viterbi(emit, trans, start, stop, allowed):
    T, L = emit.shape
    score = np.full(L, NEG_INF)
    new = np.empty(L)
    back = np.zeros((T, L), dtype=np.int64)
    for l in range(L):
        if allowed[0, l]:
            score[l] = start[l] + emit[0, l]
    for t in range(1, T):
        for l in range(L):
            best = score[0] + trans[0, l]
            arg = 0
            for k in range(1, L):
                v = score[k] + trans[k, l]
                if v > best:
                    best = v
                    arg = k
            back[t, l] = arg
            new[l] = best + emit[t, l] if allowed[t, l] else NEG_INF
        score[:] = new
    path = np.zeros(T, dtype=np.int64)
    best = score[0] + stop[0]
    arg = 0
    for l in range(1, L):
        v = score[l] + stop[l]
        if v > best:
            best = v
            arg = l
    path[T - 1] = arg
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, best


@njit(cache=True, nogil=True)
def _col_max(a, trans, l):
    m = NEG_INF
    for k in range(a.shape[0]):
        v = a[k] + trans[k, l]
        if v > m:
            m = v
    return m


@njit(cache=True, nogil=True)
def best_outside(emit, trans, start, stop, allowed):
    T, L = emit.shape
    inside = np.full((T, L), NEG_INF)
    outside = np.full((T, L), NEG_INF)
    for l in range(L):
        if allowed[0, l]:
            inside[0, l] = start[l] + emit[0, l]
        else:
            outside[0, l] = start[l] + emit[0, l]
    for t in range(1, T):
        for l in range(L):
            b_in = _col_max(inside[t - 1], trans, l)
            b_out = _col_max(outside[t - 1], trans, l)
            if allowed[t, l]:
                inside[t, l] = b_in + emit[t, l]
                outside[t, l] = b_out + emit[t, l]
            else:
                outside[t, l] = max(b_in, b_out) + emit[t, l]
    best = outside[T - 1, 0] + stop[0]
    last = 0
    for l in range(1, L):
        v = outside[T - 1, l] + stop[l]
        if v > best:
            best = v
            last = l
    if best == NEG_INF:
        return np.zeros(0, dtype=np.int64), best
    path = np.zeros(T, dtype=np.int64)
    path[T - 1] = last
    # set-valued backtrack over tied (label, layer) states
    in_live, out_live = False, True
    for t in range(T - 1, 0, -1):
        l = path[t]
        m_in = _col_max(inside[t - 1], trans, l)
        m_out = _col_max(outside[t - 1], trans, l)
        use_in = in_live
        use_out = out_live
        if out_live and not allowed[t, l]:
            m_in = m_out = max(m_in, m_out)
            use_in = True
        k_best = -1
        nxt_in = False
        nxt_out = False
        for k in range(L):
            hit_in = use_in and inside[t - 1, k] + trans[k, l] == m_in
            hit_out = use_out and outside[t - 1, k] + trans[k, l] == m_out
            if hit_in or hit_out:
                k_best = k
                nxt_in = hit_in
                nxt_out = hit_out
                break
        path[t - 1] = k_best
        in_live = nxt_in
        out_live = nxt_out
    return path, best


@njit(cache=True, nogil=True)
def path_score(emit, trans, start, stop, labels):
    s = start[labels[0]] + emit[0, labels[0]]
    for t in range(1, labels.shape[0]):
        s = s + trans[labels[t - 1], labels[t]]
        s = s + emit[t, labels[t]]
    return s + stop[labels[labels.shape[0] - 1]]


@njit(cache=True, nogil=True)
def emission_scores(weights, feat_ids, positions, length):
    L = weights.shape[1]
    out = np.zeros((length, L))
    for i in range(feat_ids.shape[0]):
        for l in range(L):
            out[positions[i], l] += weights[feat_ids[i], l]
    return out


@njit(cache=True, nogil=True)
def scatter_rows(out, feat_ids, positions, rows, scale):
    L = out.shape[1]
    for i in range(feat_ids.shape[0]):
        for l in range(L):
            out[feat_ids[i], l] += scale * rows[positions[i], l]
