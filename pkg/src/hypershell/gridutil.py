"""Shared numeric helpers: chunked integer grids, interval algebra,
deterministic parallel reduction."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

GRID_CHUNK = 1 << 18


def grid_size(dim: int, half: int) -> int:
    return (2 * half + 1) ** dim


def grid_chunks(dim: int, half: int, chunk: int = GRID_CHUNK) -> Iterator[np.ndarray]:
    """Yield the points of Z^dim intersected with [-half, half]^dim
    as int64 arrays of shape (n, dim), in a fixed deterministic order."""
    side = 2 * half + 1
    total = side ** dim
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        out = np.empty((idx.size, dim), dtype=np.int64)
        for j in range(dim - 1, -1, -1):
            out[:, j] = idx % side - half
            idx //= side
    # (empty grids yield nothing)
        yield out


def shell_chunks(dim: int, s: int, chunk: int = GRID_CHUNK) -> Iterator[np.ndarray]:
    """Points of Z^dim with |n|_inf == s exactly, chunked, no duplicates.

    For each axis a and sign, fix n_a = +-s; axes before a range over
    [-(s-1), s-1], axes after a over [-s, s].
    """
    if s == 0:
        yield np.zeros((1, dim), dtype=np.int64)
        return
    for a in range(dim):
        sides = [2 * s - 1] * a + [1] + [2 * s + 1] * (dim - a - 1)
        total = 1
        for v in sides:
            total *= v
        for sign in (s, -s):
            for start in range(0, total, chunk):
                idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
                out = np.empty((idx.size, dim), dtype=np.int64)
                for j in range(dim - 1, -1, -1):
                    side = sides[j]
                    half = (side - 1) // 2
                    out[:, j] = idx % side - half
                    idx //= side
                out[:, a] = sign
                yield out


def eval_quadratic(mat: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Row-wise Q[x] for a batch of points (float)."""
    return np.einsum("ij,jk,ik->i", pts, mat, pts)


def eval_quadratic_int(mat_int: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Row-wise x^T A x for integer A and integer points, exact in int64."""
    tmp = pts @ mat_int
    return np.einsum("ij,ij->i", tmp, pts)


def resolve_threads(threads: Optional[int]) -> int:
    if threads is not None and threads > 0:
        return int(threads)
    env = os.environ.get("HYPERSHELL_THREADS")
    if env:
        try:
            n = int(env)
            if n > 0:
                return n
        except ValueError:
            pass
    return 1


def parallel_sum(tasks: Iterable, fn: Callable, threads: int = 1):
    """Apply fn to each task and sum the results in task order.

    Summation order is fixed by the task sequence, so the reduction is
    deterministic for any thread count.
    """
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        out = None
        for t in tasks:
            v = fn(t)
            out = v if out is None else out + v
        return out
    with ThreadPoolExecutor(max_workers=threads) as ex:
        results = list(ex.map(fn, tasks))
    out = None
    for v in results:
        out = v if out is None else out + v
    return out


# -- interval algebra for 1-d sections of quadratic constraints -------------

def quad_band_intervals(alpha: float, beta: float, gamma: float,
                        c1: float, c2: float,
                        lo: float, hi: float) -> list[tuple[float, float]]:
    """{t in [lo,hi] : c1 <= alpha t^2 + beta t + gamma <= c2} as intervals."""
    if lo > hi:
        return []
    below = [(lo, hi)] if c2 == math.inf else \
        _quad_halfspace(alpha, beta, gamma - c2, lo, hi, upper=True)
    above = [(lo, hi)] if c1 == -math.inf else \
        _quad_halfspace(alpha, beta, gamma - c1, lo, hi, upper=False)
    return intersect_intervals(below, above)


def _quad_halfspace(a: float, b: float, c: float, lo: float, hi: float,
                    upper: bool) -> list[tuple[float, float]]:
    """Solve a t^2 + b t + c <= 0 (upper) or >= 0 on [lo, hi]."""
    if a == 0.0:
        if b == 0.0:
            ok = (c <= 0.0) if upper else (c >= 0.0)
            return [(lo, hi)] if ok else []
        t0 = -c / b
        if upper:
            iv = (lo, min(hi, t0)) if b > 0 else (max(lo, t0), hi)
        else:
            iv = (max(lo, t0), hi) if b > 0 else (lo, min(hi, t0))
        return [iv] if iv[0] <= iv[1] else []
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        inside = upper == (a < 0.0)
        return [(lo, hi)] if inside else []
    s = math.sqrt(disc)
    r1 = (-b - s) / (2.0 * a)
    r2 = (-b + s) / (2.0 * a)
    r1, r2 = min(r1, r2), max(r1, r2)
    if upper == (a > 0.0):
        iv = (max(lo, r1), min(hi, r2))
        return [iv] if iv[0] <= iv[1] else []
    out = []
    if r1 > lo:
        out.append((lo, min(hi, r1)))
    if r2 < hi:
        out.append((max(lo, r2), hi))
    return [iv for iv in out if iv[0] <= iv[1]]


def intersect_intervals(xs: list[tuple[float, float]],
                        ys: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out = []
    for a1, b1 in xs:
        for a2, b2 in ys:
            lo, hi = max(a1, a2), min(b1, b2)
            if lo <= hi:
                out.append((lo, hi))
    out.sort()
    merged: list[tuple[float, float]] = []
    for iv in out:
        if merged and iv[0] <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], iv[1]))
        else:
            merged.append(iv)
    return merged


def total_length(ivs: list[tuple[float, float]]) -> float:
    return sum(b - a for a, b in ivs)
