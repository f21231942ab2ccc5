"""Exact lattice-point counting in shells and value-gap statistics.

The block-split algorithm enumerates each block's value list separately,
sorts the smaller list and streams the larger one against it, which turns
the d-dimensional count into O(N log N) work on N = max block grid sizes.
On the all-rational track every value is scaled to an integer, so counts
and gaps are exact; otherwise values travel as float64 with a documented
dedup tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, EmptyValueSet, NotBlockType
from .forms import QuadraticForm, is_rational, split_blocks
from .gridutil import (GRID_CHUNK, eval_quadratic, eval_quadratic_int,
                       grid_chunks, grid_size, parallel_sum, resolve_threads)
from .scalars import is_rational_scalar, lcm_denominator, parse_scalar, scalar_to_float
from .shells import NEG_INF, ShellSpec

DEFAULT_WORK_BUDGET = 2_000_000_000
DEFAULT_VALUE_BUDGET = 60_000_000
DEDUP_TOL = 1e-10


@dataclass(frozen=True)
class CountResult:
    count: int
    points_evaluated: int
    algorithm: str  # "block_split" | "direct"


@dataclass(frozen=True)
class GapReport:
    r: float
    window: Optional[tuple]
    num_values: int
    max_gap: float
    gap_argument: float
    exact: bool
    max_gap_exact: Optional[Fraction] = None
    gap_argument_exact: Optional[Fraction] = None
    windowed: bool = False


class _ExactScaler:
    """Common integer scaling: S * Q[x - M] is an integer for x in Z^d."""

    def __init__(self, form: QuadraticForm, M):
        lam = is_rational(form).lam
        self.lam = Fraction(lam)
        self.mu = lcm_denominator(M)
        self.scale = self.lam * self.mu ** 2
        q = form.exact_fraction_matrix()
        self.int_matrix = np.array(
            [[int(self.lam * v) for v in row] for row in q], dtype=np.int64)
        self.mu_M = np.array([int(self.mu * Fraction(v)) for v in M], dtype=np.int64)

    def fits_int64(self, half: int, dim: int) -> bool:
        ymax = self.mu * half + int(np.abs(self.mu_M).max(initial=0))
        qmax = int(np.abs(self.int_matrix).max())
        return dim * dim * qmax * ymax * ymax < 2 ** 62

    def scaled_bound(self, v, round_up: bool):
        if v == NEG_INF:
            return None
        sv = self.scale * Fraction(parse_scalar(v))
        return int(math.ceil(sv)) if round_up else int(math.floor(sv))


def _exact_track_ok(form: QuadraticForm, M, a, b) -> bool:
    if not form.has_rational_entries:
        return False
    try:
        if not all(is_rational_scalar(parse_scalar(v)) for v in M):
            return False
        for v in (a, b):
            if v != NEG_INF and not is_rational_scalar(parse_scalar(v)):
                return False
    except ValueError:
        return False
    return True


def _block_value_chunks(int_matrix, mu, mu_M, half, dim, chunk=GRID_CHUNK):
    for pts in grid_chunks(dim, half, chunk):
        y = pts * mu - mu_M
        yield eval_quadratic_int(int_matrix, y)


def _block_value_chunks_float(mat, M, half, dim, chunk=GRID_CHUNK):
    for pts in grid_chunks(dim, half, chunk):
        yield eval_quadratic(mat, pts.astype(float) - M)


def count_lattice_points(form: QuadraticForm, spec: ShellSpec,
                         algo: str = "auto",
                         budget: int = DEFAULT_WORK_BUDGET,
                         threads: Optional[int] = None) -> CountResult:
    """Exact #{x in Z^d : |x|_inf <= r, a <= Q[x-M] <= b}."""
    if form.dim > 16:
        raise BudgetExceeded(float("inf"), budget)
    half = int(math.floor(spec.r_float + 1e-12))
    threads = resolve_threads(threads)
    use_block = False
    if algo in ("auto", "block", "block_split"):
        try:
            split_blocks(form)
            use_block = True
        except NotBlockType:
            if algo != "auto":
                raise
    if use_block:
        return _count_block_split(form, spec, half, budget, threads)
    work = grid_size(form.dim, half)
    if work > budget:
        raise BudgetExceeded(work, budget)
    return _count_direct(form, spec, half, threads)


def _scaled_window(scaler: _ExactScaler, a, b):
    lo = scaler.scaled_bound(a, round_up=True)
    hi = scaler.scaled_bound(b, round_up=False)
    return lo, hi


def _count_block_split(form, spec, half, budget, threads) -> CountResult:
    plus, minus, dp, dm = split_blocks(form)
    n_plus = grid_size(dp, half) if dp else 1
    n_minus = grid_size(dm, half) if dm else 1
    work = n_plus + n_minus
    if work > budget:
        raise BudgetExceeded(work, budget)
    M = spec.M
    exact = _exact_track_ok(form, M, spec.a, spec.b)
    if exact:
        scaler = _ExactScaler(form, M)
        if not scaler.fits_int64(half, form.dim):
            exact = False
    if exact:
        lo, hi = _scaled_window(scaler, spec.a, spec.b)
        plus_chunks = lambda: (_block_value_chunks(
            scaler.int_matrix[:dp, :dp], scaler.mu, scaler.mu_M[:dp], half, dp)
            if dp else iter([np.zeros(1, dtype=np.int64)]))
        minus_chunks = lambda: (_block_value_chunks(
            -scaler.int_matrix[dp:, dp:], scaler.mu, scaler.mu_M[dp:], half, dm)
            if dm else iter([np.zeros(1, dtype=np.int64)]))
    else:
        Mf = spec.M_float
        av = NEG_INF if spec.distribution_mode else scalar_to_float(spec.a)
        bv = scalar_to_float(spec.b)
        lo = None if av == NEG_INF else av
        hi = bv
        plus_chunks = lambda: (_block_value_chunks_float(plus, Mf[:dp], half, dp)
                               if dp else iter([np.zeros(1)]))
        minus_chunks = lambda: (_block_value_chunks_float(minus, Mf[dp:], half, dm)
                                if dm else iter([np.zeros(1)]))
    # sort the smaller side, stream the larger
    if n_minus <= n_plus:
        small_iter, large_iter, small_is_minus = minus_chunks, plus_chunks, True
    else:
        small_iter, large_iter, small_is_minus = plus_chunks, minus_chunks, False
    small = np.sort(np.concatenate(list(small_iter())))
    # u - v in [lo, hi]:
    #   streaming u against sorted v: v in [u - hi, u - lo]
    #   streaming v against sorted u: u in [v + lo, v + hi]
    def chunk_count(vals):
        if small_is_minus:
            top = np.searchsorted(small, vals - lo, side="right") if lo is not None \
                else np.full(vals.shape, small.size, dtype=np.int64)
            bot = np.searchsorted(small, vals - hi, side="left")
        else:
            top = np.searchsorted(small, vals + hi, side="right")
            bot = np.searchsorted(small, vals + lo, side="left") if lo is not None \
                else np.zeros(vals.shape, dtype=np.int64)
        return int(np.sum(top - bot))
    total = parallel_sum(list(large_iter()), chunk_count, threads)
    return CountResult(count=int(total), points_evaluated=work, algorithm="block_split")


def _count_direct(form, spec, half, threads) -> CountResult:
    d = form.dim
    exact = _exact_track_ok(form, spec.M, spec.a, spec.b)
    if exact:
        scaler = _ExactScaler(form, spec.M)
        exact = scaler.fits_int64(half, d)
    if exact:
        lo, hi = _scaled_window(scaler, spec.a, spec.b)

        def chunk_count(pts):
            y = pts * scaler.mu - scaler.mu_M
            vals = eval_quadratic_int(scaler.int_matrix, y)
            keep = vals <= hi
            if lo is not None:
                keep &= vals >= lo
            return int(np.sum(keep))
    else:
        Mf = spec.M_float
        av = NEG_INF if spec.distribution_mode else scalar_to_float(spec.a)
        bv = scalar_to_float(spec.b)

        def chunk_count(pts):
            vals = eval_quadratic(form.matrix, pts.astype(float) - Mf)
            keep = vals <= bv
            if av != NEG_INF:
                keep &= vals >= av
            return int(np.sum(keep))
    total = parallel_sum(list(grid_chunks(d, half)), chunk_count, threads)
    return CountResult(count=int(total), points_evaluated=grid_size(d, half),
                       algorithm="direct")


# -- value gaps --------------------------------------------------------------

def _distinct_int(chunks) -> np.ndarray:
    parts = [np.unique(c) for c in chunks]
    return np.unique(np.concatenate(parts)) if parts else np.array([], dtype=np.int64)


def _dedup_float(vals: np.ndarray, tol: float) -> np.ndarray:
    if vals.size == 0:
        return vals
    vals = np.sort(vals)
    keep = np.empty(vals.shape, dtype=bool)
    keep[0] = True
    np.greater(np.diff(vals), tol, out=keep[1:])
    return vals[keep]


def value_gaps(form: QuadraticForm, M, r, window: Optional[tuple] = None,
               budget: int = DEFAULT_VALUE_BUDGET,
               dedup_tol: float = DEDUP_TOL) -> GapReport:
    """Maximal gap between successive values of Q[x-M] on the cube lattice.

    The window restricts which values are materialized (an addition for
    irrational forms whose full value set is infeasible); the report flags
    when it was applied.
    """
    rf = scalar_to_float(parse_scalar(r) if not isinstance(r, float) else r)
    half = int(math.floor(rf + 1e-12))
    plus, minus, dp, dm = split_blocks(form)
    exact = _exact_track_ok(form, M, NEG_INF, 0)
    windowed = window is not None
    if exact:
        scaler = _ExactScaler(form, M)
        exact = scaler.fits_int64(half, form.dim)
    if exact:
        u = _distinct_int(_block_value_chunks(
            scaler.int_matrix[:dp, :dp], scaler.mu, scaler.mu_M[:dp], half, dp)) \
            if dp else np.zeros(1, dtype=np.int64)
        v = _distinct_int(_block_value_chunks(
            -scaler.int_matrix[dp:, dp:], scaler.mu, scaler.mu_M[dp:], half, dm)) \
            if dm else np.zeros(1, dtype=np.int64)
        if windowed:
            wlo = scaler.scaled_bound(window[0], round_up=True)
            whi = scaler.scaled_bound(window[1], round_up=False)
        else:
            wlo, whi = int(u[0] - v[-1]), int(u[-1] - v[0])
        vals = _window_differences(u, v, wlo, whi, budget)
        vals = np.unique(vals)
        if vals.size < 2:
            raise EmptyValueSet(f"{vals.size} value(s) in window")
        gaps = np.diff(vals)
        k = int(np.argmax(gaps))
        S = scaler.scale
        return GapReport(
            r=rf, window=window, num_values=int(vals.size),
            max_gap=float(Fraction(int(gaps[k])) / S),
            gap_argument=float(Fraction(int(vals[k])) / S),
            exact=True,
            max_gap_exact=Fraction(int(gaps[k])) / S,
            gap_argument_exact=Fraction(int(vals[k])) / S,
            windowed=windowed)
    Mf = np.array([scalar_to_float(parse_scalar(x)) for x in M], dtype=float)
    u = _dedup_float(np.concatenate(
        [np.unique(c) for c in _block_value_chunks_float(plus, Mf[:dp], half, dp)]),
        dedup_tol) if dp else np.zeros(1)
    v = _dedup_float(np.concatenate(
        [np.unique(c) for c in _block_value_chunks_float(minus, Mf[dp:], half, dm)]),
        dedup_tol) if dm else np.zeros(1)
    if windowed:
        wlo, whi = float(window[0]), float(window[1])
    else:
        wlo, whi = float(u[0] - v[-1]), float(u[-1] - v[0])
    vals = _window_differences(u, v, wlo, whi, budget)
    vals = _dedup_float(vals, dedup_tol)
    if vals.size < 2:
        raise EmptyValueSet(f"{vals.size} value(s) in window")
    gaps = np.diff(vals)
    k = int(np.argmax(gaps))
    return GapReport(r=rf, window=window, num_values=int(vals.size),
                     max_gap=float(gaps[k]), gap_argument=float(vals[k]),
                     exact=False, windowed=windowed)


def _window_differences(u: np.ndarray, v: np.ndarray, wlo, whi, budget) -> np.ndarray:
    """All u_i - v_j restricted to [wlo, whi]; u must be sorted."""
    lo_idx = np.searchsorted(u, v + wlo, side="left")
    hi_idx = np.searchsorted(u, v + whi, side="right")
    sizes = hi_idx - lo_idx
    total = int(sizes.sum())
    if total > budget:
        raise BudgetExceeded(total, budget)
    out = np.empty(total, dtype=u.dtype)
    pos = 0
    for j in range(v.size):
        n = int(sizes[j])
        if n:
            out[pos:pos + n] = u[lo_idx[j]:hi_idx[j]] - v[j]
            pos += n
    return out
