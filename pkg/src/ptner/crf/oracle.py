"""Exhaustive-enumeration oracles for the lattice DPs (small instances only)."""
from __future__ import annotations

import numpy as np

from .core import Lattice, ScoreTable

MAX_SEQUENCES = 10**7


def enumerate_paths(length: int, n_labels: int) -> np.ndarray:
    if n_labels ** length > MAX_SEQUENCES:
        raise ValueError(f"{n_labels}**{length} sequences exceed the enumeration guard")
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    # row k is the base-n_labels expansion of k: lexicographic order, last position fastest
    idx = np.unravel_index(np.arange(n_labels ** length), (n_labels,) * length)
    return np.stack(idx, axis=1).astype(np.int64).reshape(-1, length)


def all_path_scores(scores: ScoreTable) -> tuple[np.ndarray, np.ndarray]:
    """Every sequence and its score, summed independently of the DP kernels."""
    T = scores.length
    paths = enumerate_paths(T, scores.n_labels)
    total = scores.start[paths[:, 0]] + scores.stop[paths[:, -1]]
    total = total + scores.emit[np.arange(T), paths].sum(axis=1)
    if T > 1:
        total = total + scores.trans[paths[:, :-1], paths[:, 1:]].sum(axis=1)
    return paths, total


def _membership(paths: np.ndarray, lattice: Lattice) -> np.ndarray:
    T = paths.shape[1]
    return lattice.allowed[np.arange(T), paths].all(axis=1)


def _lse(x: np.ndarray) -> float:
    if x.size == 0 or np.all(np.isneginf(x)):
        return -np.inf
    m = x.max()
    return float(m + np.log(np.exp(x - m).sum()))


def brute_force_log_partition(scores: ScoreTable, lattice: Lattice) -> float:
    paths, total = all_path_scores(scores)
    return _lse(total[_membership(paths, lattice)])


def brute_force_best(scores: ScoreTable, lattice: Lattice, complement: bool = False) -> tuple[list[int], float]:
    """Best path inside ``lattice`` (or outside it when ``complement``).

    Ties follow the Viterbi backtracking rule (smallest label at the last
    position, then the one before, ...). Returns ([], -inf) when the set is
    empty.
    """
    paths, total = all_path_scores(scores)
    member = _membership(paths, lattice)
    if complement:
        member = ~member
    if not member.any():
        return [], -np.inf
    idx = np.flatnonzero(member)
    top = total[idx].max()
    winners = paths[idx[total[idx] == top]]
    best = winners[np.lexsort(winners.T)[0]]
    return best.tolist(), float(top)


def brute_force_marginals(scores: ScoreTable, lattice: Lattice) -> tuple[np.ndarray, np.ndarray, float]:
    paths, total = all_path_scores(scores)
    member = _membership(paths, lattice)
    T, L = scores.emit.shape
    node = np.zeros((T, L))
    edge = np.zeros((max(T - 1, 0), L, L))
    log_z = _lse(total[member])
    if np.isneginf(log_z):
        return node, edge, log_z
    p = np.exp(total[member] - log_z)
    sel = paths[member]
    for t in range(T):
        np.add.at(node[t], sel[:, t], p)
    for t in range(T - 1):
        np.add.at(edge[t], (sel[:, t], sel[:, t + 1]), p)
    return node, edge, log_z
