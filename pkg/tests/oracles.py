"""Independent brute-force oracles shared by the test suite.

These deliberately avoid the library's algorithms: counting scans the full
integer grid, minima enumerate an explicit box that provably contains all
attaining vectors, and volumes come from geometry or quadrature.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def count_oracle(matrix: np.ndarray, a, b, M, r) -> int:
    """#{x : |x|_inf <= r, a <= Q[x-M] <= b} by full grid scan (small d)."""
    d = matrix.shape[0]
    half = int(math.floor(float(r) + 1e-12))
    cnt = 0
    Mf = np.asarray(M, dtype=float)
    for pt in itertools.product(range(-half, half + 1), repeat=d):
        y = np.array(pt, dtype=float) - Mf
        v = float(y @ matrix @ y)
        if (a == -math.inf or v >= float(a) - 1e-12) and v <= float(b) + 1e-12:
            cnt += 1
    return cnt


def values_oracle(matrix: np.ndarray, M, r) -> np.ndarray:
    """Sorted distinct values of Q[x-M] on the cube lattice (float, deduped)."""
    d = matrix.shape[0]
    half = int(math.floor(float(r) + 1e-12))
    Mf = np.asarray(M, dtype=float)
    vals = []
    for pt in itertools.product(range(-half, half + 1), repeat=d):
        y = np.array(pt, dtype=float) - Mf
        vals.append(float(y @ matrix @ y))
    vals = np.sort(np.array(vals))
    keep = np.empty(len(vals), dtype=bool)
    keep[0] = True
    np.greater(np.diff(vals), 1e-10, out=keep[1:])
    return vals[keep]


def minima_oracle(matrix: np.ndarray, t: float, r: float) -> list[float]:
    """All 2d successive minima of F(m,n) = max(r|m+tQn|_inf, |n|_inf/r)
    by exhaustive scan of a box that provably contains every attainer.

    M_2d <= r always (the unit vectors (e_j, 0) have norm r, and the
    rounded units (round(-tQe_j), e_j) have norm <= max(r/2, 1/r)), so
    |n|_inf <= r*r and |m|_inf <= |t| * max_rowsum(Q) * r^2 + 1 suffice.
    """
    d = matrix.shape[0]
    lam = r + 1e-9
    bn = int(math.floor(r * lam)) + 1
    rowsum = float(np.abs(matrix).sum(axis=1).max())
    bm = int(math.ceil(abs(t) * rowsum * bn + lam / r)) + 1
    n_grid = np.array(list(itertools.product(range(-bn, bn + 1), repeat=d)),
                      dtype=np.int64)
    m_grid = np.array(list(itertools.product(range(-bm, bm + 1), repeat=d)),
                      dtype=np.int64)
    rows = []
    tq = t * (n_grid.astype(float) @ matrix.T)
    ninf = np.abs(n_grid).max(axis=1) / r
    for i, mvec in enumerate(m_grid):
        comp1 = r * np.abs(mvec[None, :] + tq).max(axis=1)
        F = np.maximum(comp1, ninf)
        sel = F <= lam
        if sel.any():
            rows.append((np.repeat(mvec[None, :], sel.sum(), axis=0),
                         n_grid[sel], F[sel]))
    ms = np.concatenate([x[0] for x in rows])
    ns = np.concatenate([x[1] for x in rows])
    Fs = np.concatenate([x[2] for x in rows])
    nz = np.any(ms != 0, axis=1) | np.any(ns != 0, axis=1)
    ms, ns, Fs = ms[nz], ns[nz], Fs[nz]
    order = np.argsort(Fs, kind="stable")
    chosen: list[np.ndarray] = []
    out: list[float] = []
    for idx in order:
        v = np.concatenate([ms[idx], ns[idx]]).astype(float)
        A = np.array(chosen + [v])
        if np.linalg.matrix_rank(A, tol=1e-9) > len(chosen):
            chosen.append(v)
            out.append(float(Fs[idx]))
            if len(out) == 2 * d:
                break
    return out


def dioph_oracle(matrix: np.ndarray, t: float, nu: float) -> float:
    d = matrix.shape[0]
    half = int(math.floor(nu + 1e-12))
    best = math.inf
    for pt in itertools.product(range(-half, half + 1), repeat=d):
        if not any(pt):
            continue
        w = t * (np.array(pt, dtype=float) @ matrix.T)
        best = min(best, float(np.abs(w - np.round(w)).max()))
    return nu * best


def cube_minimum_oracle(matrix: np.ndarray, M, r: float, step: float) -> float:
    """Dense-grid lower-resolution scan of min Q[x-M] over the cube."""
    d = matrix.shape[0]
    axis = np.arange(-r, r + step / 2, step)
    best = math.inf
    Mf = np.asarray(M, dtype=float)
    for pt in itertools.product(axis, repeat=d):
        y = np.array(pt) - Mf
        best = min(best, float(y @ matrix @ y))
    return best


def rational_gaps_oracle(entries, M, r, window=None):
    """Exact sorted distinct values of a rational diagonal-matrix form on the
    cube lattice, as Fractions, optionally window-restricted."""
    ent = [Fraction(e) for e in entries]
    d = len(ent)
    half = int(math.floor(float(r) + 1e-12))
    Mf = [Fraction(v) for v in M]
    vals = set()
    for pt in itertools.product(range(-half, half + 1), repeat=d):
        v = sum(ent[i] * (pt[i] - Mf[i]) ** 2 for i in range(d))
        if window is None or (window[0] <= v <= window[1]):
            vals.add(v)
    return sorted(vals)
