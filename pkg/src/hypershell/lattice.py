"""Lattice workhorse: floating LLL reduction and a breadth-first
Fincke-Pohst enumeration of all lattice points in a Euclidean ball.

The enumeration keeps whole levels of the search tree in numpy arrays,
which makes the usual depth-first recursion a handful of vectorized
passes.  Bounds carry a small outward guard so float rounding can only
admit extra candidates, never drop one.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import EnumerationBudgetExceeded, Underdetermined

_GUARD = 1e-9


def _gso(b: np.ndarray):
    n = b.shape[0]
    mu = np.zeros((n, n))
    star = np.zeros_like(b)
    normsq = np.zeros(n)
    for i in range(n):
        v = b[i].copy()
        mu[i, i] = 1.0
        for j in range(i):
            mu[i, j] = (b[i] @ star[j]) / normsq[j] if normsq[j] > 0 else 0.0
            v -= mu[i, j] * star[j]
        star[i] = v
        normsq[i] = v @ v
    return mu, normsq


def lll_reduce(basis: np.ndarray, delta: float = 0.99, max_loops: int = 20000):
    """Reduce the rows of `basis`; returns (reduced, U) with reduced = U @ basis
    and U unimodular (int64)."""
    b = np.array(basis, dtype=float)
    n = b.shape[0]
    U = np.eye(n, dtype=np.int64)
    mu, normsq = _gso(b)
    if np.min(normsq) <= 0:
        raise Underdetermined("basis is numerically rank deficient")
    k = 1
    loops = 0
    while k < n:
        loops += 1
        if loops > max_loops:
            break  # float cycling; current basis is still usable
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                b[k] -= q * b[j]
                U[k] -= q * U[j]
                mu[k, :j + 1] -= q * mu[j, :j + 1]
        mu, normsq = _gso(b)
        if normsq[k] >= (delta - mu[k, k - 1] ** 2) * normsq[k - 1]:
            k += 1
        else:
            b[[k - 1, k]] = b[[k, k - 1]]
            U[[k - 1, k]] = U[[k, k - 1]]
            mu, normsq = _gso(b)
            k = max(k - 1, 1)
    return b, U


def ball_volume(dim: int, radius: float) -> float:
    return math.pi ** (dim / 2.0) * radius ** dim / math.gamma(dim / 2.0 + 1.0)


def enumerate_ball(reduced: np.ndarray, radius: float,
                   node_budget: int = 30_000_000) -> np.ndarray:
    """All nonzero coefficient vectors c (int64 rows) with
    ||c @ reduced||_2 <= radius, one representative per +-c pair."""
    n = reduced.shape[0]
    mu, normsq = _gso(reduced)
    if np.min(normsq) <= 0:
        raise Underdetermined("basis is numerically rank deficient")
    rsq = radius * radius * (1.0 + _GUARD) + 1e-30
    coeff = np.zeros((1, n), dtype=np.int64)
    partial = np.zeros(1)
    allzero = np.ones(1, dtype=bool)
    for k in range(n - 1, -1, -1):
        centers = coeff[:, k + 1:] @ mu[k + 1:, k] if k + 1 < n else np.zeros(len(coeff))
        room = rsq - partial
        room[room < 0.0] = 0.0
        span = np.sqrt(room / normsq[k]) * (1.0 + _GUARD)
        lo = np.ceil(-centers - span - 1e-12).astype(np.int64)
        hi = np.floor(-centers + span + 1e-12).astype(np.int64)
        lo = np.where(allzero, np.maximum(lo, 0), lo)
        counts = np.maximum(hi - lo + 1, 0)
        total = int(counts.sum())
        if total > node_budget:
            raise EnumerationBudgetExceeded(
                f"{total} nodes at level {k} exceed budget {node_budget}")
        if total == 0:
            return np.zeros((0, n), dtype=np.int64)
        rep = np.repeat(np.arange(len(coeff)), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        cvals = lo[rep] + (np.arange(total) - starts)
        new_partial = partial[rep] + (cvals + centers[rep]) ** 2 * normsq[k]
        keep = new_partial <= rsq
        rep, cvals, new_partial = rep[keep], cvals[keep], new_partial[keep]
        coeff = coeff[rep]
        coeff[:, k] = cvals
        partial = new_partial
        allzero = allzero[rep] & (cvals == 0)
    return coeff[~allzero]
