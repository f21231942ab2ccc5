"""Lebesgue volume of shells and the relative lattice-point remainder.

block_mc draws independent uniform samples in each block's cube and counts
qualifying value pairs against a sorted side, so N+ + N- evaluations give
N+ * N- effective pairs.  The reported std_error is the two-sample
projection (jackknife) estimate summed over both sides.  Everything is
driven by counter-based keyed streams, so a given seed reproduces the
estimate bit for bit regardless of chunking or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import integrate

from .counting import DEFAULT_WORK_BUDGET, count_lattice_points
from .errors import BadSampleCount, BudgetExceeded, QuadratureDimTooHigh
from .forms import QuadraticForm, split_blocks
from .gridutil import intersect_intervals, quad_band_intervals, total_length
from .rng import uniform_box
from .scalars import scalar_to_float
from .shells import NEG_INF, AnnulusShellSpec, ShellSpec, cube_minimum

MC_CHUNK = 1 << 19
MAX_SORTED_SIDE = 300_000_000
QUAD_ABS_TOL = 1e-6


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float
    method: str  # "block_mc" | "quadrature"
    samples: int
    seed: int


@dataclass(frozen=True)
class DeltaReport:
    count: int
    volume: VolumeEstimate
    delta: float
    mode: str  # "two_sided" | "distribution"


def volume_estimate(form: QuadraticForm,
                    spec: Union[ShellSpec, AnnulusShellSpec],
                    samples: int, seed: int,
                    method: str = "block_mc",
                    threads: Optional[int] = None) -> VolumeEstimate:
    if method == "quadrature":
        return _quadrature_volume(form, spec, seed)
    if method != "block_mc":
        raise ValueError(f"unknown method {method!r}")
    if samples < 1_000:
        raise BadSampleCount(f"need at least 1000 samples, got {samples}")
    if isinstance(spec, ShellSpec):
        a, b = _shell_bounds(form, spec)
        return _pair_mc(form, spec.M_float, spec.r_float, a, b, samples, seed,
                        stream_base=0)
    lo0, hi0 = (scalar_to_float(spec.i0[0]), scalar_to_float(spec.i0[1]))
    a, b = scalar_to_float(spec.i[0]), scalar_to_float(spec.i[1])
    outer = _pair_mc(form, spec.M_float, spec.r_float * hi0, a, b, samples, seed,
                     stream_base=0)
    if lo0 <= 0:
        return outer
    inner = _pair_mc(form, spec.M_float, spec.r_float * lo0, a, b, samples, seed,
                     stream_base=2)
    value = max(0.0, outer.value - inner.value)
    err = math.hypot(outer.std_error, inner.std_error)
    return VolumeEstimate(value=value, std_error=err, method="block_mc",
                          samples=outer.samples + inner.samples, seed=seed)


def _shell_bounds(form: QuadraticForm, spec: ShellSpec) -> tuple[float, float]:
    if spec.distribution_mode:
        # distribution-function mode: a := min of Q[x-M] over the cube
        a = scalar_to_float(cube_minimum(form, spec.M, spec.r))
    else:
        a = scalar_to_float(spec.a)
    return a, scalar_to_float(spec.b)


def _pair_mc(form, M, half, a, b, samples, seed, stream_base) -> VolumeEstimate:
    plus, minus, dp, dm = split_blocks(form)
    if dm == 0:
        n_plus, n_minus = samples, 1
    elif dp == 0:
        n_plus, n_minus = 1, samples
    else:
        n_plus = n_minus = samples // 2
    if min(n_plus, n_minus) < 1:
        raise BadSampleCount("not enough samples for both blocks")
    if n_minus > MAX_SORTED_SIDE:
        raise BudgetExceeded(n_minus, MAX_SORTED_SIDE)

    def draw_values(mat, dim, count, stream):
        if dim == 0:
            return np.zeros(count)
        out = np.empty(count)
        Mb = M[:dp] if stream % 2 == 0 else M[dp:]
        pos = 0
        idx = 0
        while pos < count:
            n = min(MC_CHUNK, count - pos)
            pts = uniform_box(seed, stream_base + stream, idx, n, dim, half)
            y = pts - Mb
            out[pos:pos + n] = np.einsum("ij,jk,ik->i", y, mat, y)
            pos += n
            idx += 1
        return out

    v_vals = np.sort(draw_values(minus, dm, n_minus, 1))
    counts_v = np.zeros(n_minus, dtype=np.int64)
    row_sum = 0
    row_sumsq = 0.0
    pos = 0
    idx = 0
    while pos < n_plus:
        n = min(MC_CHUNK, n_plus - pos)
        if dp == 0:
            u_chunk = np.zeros(n)
        else:
            pts = uniform_box(seed, stream_base + 0, idx, n, dp, half)
            y = pts - M[:dp]
            u_chunk = np.einsum("ij,jk,ik->i", y, plus, y)
        # u - v in [a, b]
        cnt_u = (np.searchsorted(v_vals, u_chunk - a, side="right")
                 - np.searchsorted(v_vals, u_chunk - b, side="left"))
        row_sum += int(cnt_u.sum())
        row_sumsq += float((cnt_u.astype(float) ** 2).sum())
        u_sorted = np.sort(u_chunk)
        counts_v += (np.searchsorted(u_sorted, v_vals + b, side="right")
                     - np.searchsorted(u_sorted, v_vals + a, side="left"))
        pos += n
        idx += 1
    pairs_total = int(counts_v.sum())
    assert pairs_total == row_sum
    n_p, n_m = float(n_plus), float(n_minus)
    p_hat = pairs_total / (n_p * n_m)
    d = dp + dm
    box = (2.0 * half) ** d
    var_p = p_hat * max(0.0, 1.0 - p_hat) / (n_p * n_m)
    if n_plus > 1:
        row_var = max(0.0, (row_sumsq - row_sum ** 2 / n_p) / (n_p - 1.0)) / n_m ** 2
        var_p += row_var / n_p
    if n_minus > 1:
        cf = counts_v.astype(float)
        col_var = float(np.var(cf, ddof=1)) / n_p ** 2
        var_p += col_var / n_m
    return VolumeEstimate(value=p_hat * box, std_error=box * math.sqrt(var_p),
                          method="block_mc", samples=n_plus + n_minus, seed=seed)


# -- deterministic quadrature (oracle role, d <= 3) ---------------------------

def _axis_domain(prefix_absmax: float, lo0: float, hi0: float,
                 half: float) -> list[tuple[float, float]]:
    """Allowed values of the last coordinate so that |x|_inf/half in [lo0,hi0]."""
    if prefix_absmax > hi0 * half:
        return []
    top = hi0 * half
    if prefix_absmax >= lo0 * half:
        return [(-top, top)]
    bot = lo0 * half
    return [(-top, -bot), (bot, top)]


def _quadrature_volume(form: QuadraticForm, spec, seed: int) -> VolumeEstimate:
    d = form.dim
    if d > 3:
        raise QuadratureDimTooHigh(f"quadrature supports d <= 3, got {d}")
    q = form.matrix
    if isinstance(spec, ShellSpec):
        a, b = _shell_bounds(form, spec)
        M = spec.M_float
        half = spec.r_float
        lo0, hi0 = 0.0, 1.0
    else:
        a, b = scalar_to_float(spec.i[0]), scalar_to_float(spec.i[1])
        M = spec.M_float
        half = spec.r_float
        lo0, hi0 = scalar_to_float(spec.i0[0]), scalar_to_float(spec.i0[1])
    top = hi0 * half

    def last_len(prefix: tuple[float, ...]) -> float:
        k = len(prefix)
        y = np.array(prefix) - M[:k]
        alpha = q[k, k]
        beta = 2.0 * float(q[k, :k] @ y)
        gamma = float(y @ q[:k, :k] @ y)
        # in the shifted variable t = x_k - M_k
        band = quad_band_intervals(alpha, beta, gamma, a, b,
                                   -top - M[k], top - M[k])
        band = [(lo + M[k], hi + M[k]) for lo, hi in band]
        dom = _axis_domain(max((abs(v) for v in prefix), default=0.0),
                           lo0, hi0, half)
        return total_length(intersect_intervals(band, dom))

    if d == 1:
        val = last_len(())
        return VolumeEstimate(val, 0.0, "quadrature", 0, seed)
    if d == 2:
        val, _ = integrate.quad(lambda x1: last_len((x1,)), -top, top,
                                limit=800, epsabs=QUAD_ABS_TOL * 1e-3,
                                epsrel=1e-10)
        return VolumeEstimate(val, 0.0, "quadrature", 0, seed)
    val, _ = integrate.dblquad(lambda x2, x1: last_len((x1, x2)),
                               -top, top, -top, top,
                               epsabs=QUAD_ABS_TOL * 1e-1, epsrel=1e-8)
    return VolumeEstimate(val, 0.0, "quadrature", 0, seed)


# -- composed reports ---------------------------------------------------------

def delta_report(form: QuadraticForm, spec: ShellSpec, samples: int, seed: int,
                 method: str = "block_mc", threads: Optional[int] = None,
                 budget: int = DEFAULT_WORK_BUDGET,
                 algo: str = "auto") -> DeltaReport:
    """Lattice count vs volume and the relative remainder for one shell."""
    mode = "distribution" if spec.distribution_mode else "two_sided"
    if spec.distribution_mode:
        a = cube_minimum(form, spec.M, spec.r)
        spec_c = ShellSpec(a=a, b=spec.b, M=spec.M, r=spec.r)
    else:
        spec_c = spec
    cnt = count_lattice_points(form, spec_c, algo=algo, budget=budget,
                               threads=threads)
    vol = volume_estimate(form, spec_c, samples, seed, method=method,
                          threads=threads)
    delta = abs(cnt.count - vol.value) / vol.value
    return DeltaReport(count=cnt.count, volume=vol, delta=delta, mode=mode)


def distribution_delta(form: QuadraticForm, b, M, r, samples: int, seed: int,
                       method: str = "block_mc",
                       threads: Optional[int] = None,
                       budget: int = DEFAULT_WORK_BUDGET) -> DeltaReport:
    spec = ShellSpec(a=NEG_INF, b=b, M=tuple(M), r=r)
    return delta_report(form, spec, samples, seed, method=method,
                        threads=threads, budget=budget)
