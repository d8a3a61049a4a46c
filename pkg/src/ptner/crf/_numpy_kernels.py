"""Pure-numpy lattice kernels.

Every kernel takes ``emit (T, L)``, ``trans (L, L)``, ``start (L)``,
``stop (L)`` and ``allowed (T, L) bool``. Scores may contain ``-inf``
(hard transitions). Path scores accumulate as ``((start + emit0) + trans) +
emit1 ...`` and finally ``+ stop``; the max-product kernels keep exactly this
order so a path's score is bit-identical whichever kernel produced it.
"""
import numpy as np

NEG_INF = -np.inf


def _lse(x, axis):
    m = np.max(x, axis=axis)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sum(np.exp(x - np.expand_dims(safe, axis)), axis=axis)
        out = np.log(s) + safe
    return np.where(np.isneginf(m), NEG_INF, out)


def forward(emit, trans, start, stop, allowed):
    T, L = emit.shape
    alpha = np.full((T, L), NEG_INF)
    alpha[0] = np.where(allowed[0], start + emit[0], NEG_INF)
    for t in range(1, T):
        inner = _lse(alpha[t - 1][:, None] + trans, axis=0)
        alpha[t] = np.where(allowed[t], inner + emit[t], NEG_INF)
    log_z = _lse(alpha[T - 1] + stop, axis=0)
    return alpha, float(log_z)


def backward(emit, trans, start, stop, allowed):
    T, L = emit.shape
    beta = np.full((T, L), NEG_INF)
    beta[T - 1] = np.where(allowed[T - 1], stop, NEG_INF)
    for t in range(T - 2, -1, -1):
        nxt = np.where(allowed[t + 1], emit[t + 1] + beta[t + 1], NEG_INF)
        beta[t] = np.where(allowed[t], _lse(trans + nxt[None, :], axis=1), NEG_INF)
    return beta


def marginals(emit, trans, start, stop, allowed):
    """Node marginals (T, L), edge marginals (T-1, L, L) and log Z."""
    T, L = emit.shape
    alpha, log_z = forward(emit, trans, start, stop, allowed)
    if np.isneginf(log_z):
        return np.zeros((T, L)), np.zeros((max(T - 1, 0), L, L)), log_z
    beta = backward(emit, trans, start, stop, allowed)
    with np.errstate(invalid="ignore"):
        node = np.exp(alpha + beta - log_z)
        edge = np.exp(
            alpha[:-1, :, None] + trans[None] + (emit[1:] + beta[1:])[:, None, :] - log_z
        )
    node = np.nan_to_num(node, nan=0.0)
    edge = np.nan_to_num(edge, nan=0.0)
    return node, edge, log_z


def viterbi(emit, trans, start, stop, allowed):
    T, L = emit.shape
    score = np.where(allowed[0], start + emit[0], NEG_INF)
    back = np.zeros((T, L), dtype=np.int64)
    for t in range(1, T):
        cand = score[:, None] + trans
        back[t] = np.argmax(cand, axis=0)
        best = cand[back[t], np.arange(L)]
        score = np.where(allowed[t], best + emit[t], NEG_INF)
    final = score + stop
    path = np.zeros(T, dtype=np.int64)
    path[T - 1] = np.argmax(final)
    best = final[path[T - 1]]
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, float(best)


def best_outside(emit, trans, start, stop, allowed):
    """Max path score over sequences leaving ``allowed`` at least once.

    Two Viterbi layers: ``inside`` paths have stayed on the lattice so far,
    ``outside`` paths have deviated at some earlier or current position.
    Returns ``(path, score)``; score is ``-inf`` and path empty when the
    complement is empty.
    """
    T, L = emit.shape
    first = start + emit[0]
    inside = np.full((T, L), NEG_INF)
    outside = np.full((T, L), NEG_INF)
    inside[0] = np.where(allowed[0], first, NEG_INF)
    outside[0] = np.where(allowed[0], NEG_INF, first)
    for t in range(1, T):
        best_in = np.max(inside[t - 1][:, None] + trans, axis=0)
        best_out = np.max(outside[t - 1][:, None] + trans, axis=0)
        inside[t] = np.where(allowed[t], best_in + emit[t], NEG_INF)
        # off-lattice labels may continue either layer
        outside[t] = np.where(allowed[t], best_out, np.maximum(best_in, best_out)) + emit[t]
    final = outside[T - 1] + stop
    last = int(np.argmax(final))
    best = float(final[last])
    if np.isneginf(best):
        return np.zeros(0, dtype=np.int64), best
    path = np.zeros(T, dtype=np.int64)
    path[T - 1] = last
    # Backtrack over every tied (label, layer) state so that ties resolve to
    # the smallest label position by position from the end, as in viterbi.
    in_live, out_live = False, True
    for t in range(T - 1, 0, -1):
        l = path[t]
        c_in = inside[t - 1] + trans[:, l]
        c_out = outside[t - 1] + trans[:, l]
        from_in = np.zeros(L, dtype=bool)
        from_out = np.zeros(L, dtype=bool)
        if in_live:
            from_in |= c_in == c_in.max()
        if out_live:
            if allowed[t, l]:
                from_out |= c_out == c_out.max()
            else:
                m = max(c_in.max(), c_out.max())
                from_in |= c_in == m
                from_out |= c_out == m
        k = int(np.argmax(from_in | from_out))
        path[t - 1] = k
        in_live, out_live = bool(from_in[k]), bool(from_out[k])
    return path, best


def path_score(emit, trans, start, stop, labels):
    s = start[labels[0]] + emit[0, labels[0]]
    for t in range(1, len(labels)):
        s = s + trans[labels[t - 1], labels[t]]
        s = s + emit[t, labels[t]]
    return float(s + stop[labels[-1]])


def emission_scores(weights, feat_ids, positions, length):
    out = np.zeros((length, weights.shape[1]))
    np.add.at(out, positions, weights[feat_ids])
    return out


def scatter_rows(out, feat_ids, positions, rows, scale):
    """out[feat_ids[i]] += scale * rows[positions[i]] for every i, in order."""
    np.add.at(out, feat_ids, scale * rows[positions])
