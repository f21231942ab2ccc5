"""Region descriptors: shell-in-cube specs, membership, cube minimum."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, NotBlockType
from .forms import QuadraticForm, exact_split_blocks, split_blocks
from .scalars import Scalar, Surd, is_rational_scalar, parse_scalar, scalar_to_float

NEG_INF = -math.inf


@dataclass(frozen=True)
class ShellSpec:
    """Form values in [a, b] intersected with the cube |x|_inf <= r.

    a = -inf selects distribution-function mode (rewritten to the cube
    minimum by the volume layer).
    """
    a: Union[float, Scalar]
    b: Union[float, Scalar]
    M: tuple
    r: Union[float, Scalar]

    def __post_init__(self):
        if scalar_to_float(self.r) <= 0:
            raise ValueError("r must be positive")
        if self.a != NEG_INF and scalar_to_float(self.a) > scalar_to_float(self.b):
            raise ValueError("need a <= b")

    @property
    def r_float(self) -> float:
        return scalar_to_float(self.r)

    @property
    def M_float(self) -> np.ndarray:
        return np.array([scalar_to_float(v) for v in self.M], dtype=float)

    @property
    def distribution_mode(self) -> bool:
        return self.a == NEG_INF


@dataclass(frozen=True)
class AnnulusShellSpec:
    """r^{-1}|x|_inf in i0 and Q[x-M] in i."""
    i0: tuple
    i: tuple
    M: tuple
    r: Union[float, Scalar]

    def __post_init__(self):
        if scalar_to_float(self.i0[0]) > scalar_to_float(self.i0[1]):
            raise ValueError("empty cube interval")
        if scalar_to_float(self.i[0]) > scalar_to_float(self.i[1]):
            raise ValueError("empty value interval")
        if scalar_to_float(self.r) <= 0:
            raise ValueError("r must be positive")

    @property
    def r_float(self) -> float:
        return scalar_to_float(self.r)

    @property
    def M_float(self) -> np.ndarray:
        return np.array([scalar_to_float(v) for v in self.M], dtype=float)


def shell_spec(a, b, M, r) -> ShellSpec:
    """Parse scalars onto the exact track where possible."""
    av = NEG_INF if (a == NEG_INF or a == "-inf") else parse_scalar(a)
    return ShellSpec(a=av, b=parse_scalar(b),
                     M=tuple(parse_scalar(v) for v in M), r=parse_scalar(r))


def contains(spec, form: QuadraticForm, x) -> bool:
    """Closed membership test; boundary points count."""
    x = np.asarray(x, dtype=float)
    if x.shape != (form.dim,):
        raise DimensionMismatch(f"point has shape {x.shape}, form dim {form.dim}")
    if isinstance(spec, ShellSpec):
        if np.max(np.abs(x)) > spec.r_float:
            return False
        val = form.value(x - spec.M_float)
        lo = NEG_INF if spec.distribution_mode else scalar_to_float(spec.a)
        return lo <= val <= scalar_to_float(spec.b)
    if isinstance(spec, AnnulusShellSpec):
        s = np.max(np.abs(x)) / spec.r_float
        if not (scalar_to_float(spec.i0[0]) <= s <= scalar_to_float(spec.i0[1])):
            return False
        val = form.value(x - spec.M_float)
        return scalar_to_float(spec.i[0]) <= val <= scalar_to_float(spec.i[1])
    raise TypeError(f"unsupported spec {type(spec)!r}")


# -- cube minimum ------------------------------------------------------------

def cube_minimum(form: QuadraticForm, M, r):
    """Exact min of Q[x - M] over |x|_inf <= r for block-type (or definite)
    forms: box-constrained minimum of the positive block minus the vertex
    maximum of the subtracted block.

    Returns a Fraction on the all-rational track, float otherwise.
    """
    Mx = [parse_scalar(v) for v in M]
    rx = parse_scalar(r)
    if (form.has_rational_entries and is_rational_scalar(rx)
            and all(is_rational_scalar(v) for v in Mx)):
        return _cube_minimum_exact(form, [Fraction(v) for v in Mx], Fraction(rx))
    return _cube_minimum_float(
        form, np.array([scalar_to_float(v) for v in Mx], dtype=float),
        scalar_to_float(rx))


def _cube_minimum_exact(form: QuadraticForm, M: list, r: Fraction) -> Fraction:
    plus, minus, dp, dm = exact_split_blocks(form)
    total = Fraction(0)
    if dp:
        q = [[Fraction(v) for v in row] for row in plus]
        total += _box_qp_min_exact(q, M[:dp], r)
    if dm:
        q = [[Fraction(v) for v in row] for row in minus]
        total -= _box_vertex_max_exact(q, M[dp:], r)
    return total


def _cube_minimum_float(form: QuadraticForm, M: np.ndarray, r: float) -> float:
    plus, minus, dp, dm = split_blocks(form)
    total = 0.0
    if dp:
        total += _box_qp_min_float(plus, M[:dp], r)
    if dm:
        total -= _box_vertex_max_float(minus, M[dp:], r)
    return total


def _box_vertex_max_exact(q, M, r: Fraction) -> Fraction:
    """Max of a PD quadratic over the cube: attained at a vertex."""
    n = len(M)
    if all(q[i][j] == 0 for i in range(n) for j in range(n) if i != j):
        return sum(q[i][i] * max((r - M[i]) ** 2, (-r - M[i]) ** 2) for i in range(n))
    best = None
    for signs in itertools.product((-r, r), repeat=n):
        y = [signs[i] - M[i] for i in range(n)]
        v = sum(q[i][j] * y[i] * y[j] for i in range(n) for j in range(n))
        if best is None or v > best:
            best = v
    return best


def _box_vertex_max_float(q: np.ndarray, M: np.ndarray, r: float) -> float:
    n = len(M)
    if np.all(q == np.diag(np.diag(q))):
        d = np.diag(q)
        return float(np.sum(d * np.maximum((r - M) ** 2, (r + M) ** 2)))
    verts = np.array(list(itertools.product((-r, r), repeat=n)), dtype=float) - M
    return float(np.max(np.einsum("ij,jk,ik->i", verts, q, verts)))


def _box_qp_min_exact(q, M, r: Fraction) -> Fraction:
    """Min of (y-M)^T q (y-M) over [-r,r]^n, exact.

    Interior optimum and diagonal forms are closed-form; otherwise guess the
    active set by float coordinate descent and verify the KKT conditions in
    rational arithmetic, falling back to full active-set enumeration.
    """
    n = len(M)
    if all(-r <= M[i] <= r for i in range(n)):
        return Fraction(0)
    if all(q[i][j] == 0 for i in range(n) for j in range(n) if i != j):
        tot = Fraction(0)
        for i in range(n):
            c = min(max(M[i], -r), r)
            tot += q[i][i] * (c - M[i]) ** 2
        return tot
    qf = np.array([[float(v) for v in row] for row in q])
    Mf = np.array([float(v) for v in M])
    y = _coordinate_descent(qf, Mf, float(r))
    guess = _active_pattern(y, float(r))
    val = _solve_active_exact(q, M, r, guess)
    if val is not None:
        return val
    best = None
    for pattern in itertools.product((-1, 0, 1), repeat=n):
        val = _solve_active_exact(q, M, r, pattern)
        if val is not None and (best is None or val < best):
            best = val
    return best


def _active_pattern(y: np.ndarray, r: float, tol: float = 1e-9):
    out = []
    for v in y:
        if v >= r - tol:
            out.append(1)
        elif v <= -r + tol:
            out.append(-1)
        else:
            out.append(0)
    return tuple(out)


def _solve_active_exact(q, M, r: Fraction, pattern) -> Optional[Fraction]:
    """Solve the equality-constrained minimum for one active pattern and
    verify feasibility plus KKT signs; None when the pattern is invalid."""
    n = len(M)
    free = [i for i in range(n) if pattern[i] == 0]
    y = [Fraction(pattern[i]) * r for i in range(n)]
    if free:
        # solve q_FF (y_F - M_F) = -q_FA (y_A - M_A)
        rhs = []
        for i in free:
            s = Fraction(0)
            for j in range(n):
                if pattern[j] != 0:
                    s += q[i][j] * (y[j] - M[j])
            rhs.append(-s)
        a = [[q[i][j] for j in free] for i in free]
        sol = _solve_linear_exact(a, rhs)
        if sol is None:
            return None
        for k, i in enumerate(free):
            y[i] = M[i] + sol[k]
            if not (-r <= y[i] <= r):
                return None
    # KKT: gradient sign on active walls
    for i in range(n):
        if pattern[i] == 0:
            continue
        g = Fraction(0)
        for j in range(n):
            g += q[i][j] * (y[j] - M[j])
        if pattern[i] == 1 and g > 0:
            return None
        if pattern[i] == -1 and g < 0:
            return None
    diff = [y[i] - M[i] for i in range(n)]
    return sum(q[i][j] * diff[i] * diff[j] for i in range(n) for j in range(n))


def _solve_linear_exact(a, b):
    n = len(b)
    a = [row[:] + [b[i]] for i, row in enumerate(a)]
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            return None
        a[k], a[p] = a[p], a[k]
        piv = a[k][k]
        for i in range(n):
            if i == k:
                continue
            f = a[i][k] / piv
            if f:
                for j in range(k, n + 1):
                    a[i][j] -= f * a[k][j]
    return [a[i][n] / a[i][i] for i in range(n)]


def _coordinate_descent(q: np.ndarray, M: np.ndarray, r: float,
                        iters: int = 400) -> np.ndarray:
    y = np.clip(M, -r, r)
    n = len(M)
    for _ in range(iters):
        prev = y.copy()
        for j in range(n):
            s = q[j] @ (y - M) - q[j, j] * (y[j] - M[j])
            y[j] = min(max(M[j] - s / q[j, j], -r), r)
        if np.max(np.abs(y - prev)) < 1e-15 * max(1.0, r):
            break
    return y


def _box_qp_min_float(q: np.ndarray, M: np.ndarray, r: float) -> float:
    if np.all(np.abs(M) <= r):
        return 0.0
    if np.all(q == np.diag(np.diag(q))):
        c = np.clip(M, -r, r)
        return float(np.sum(np.diag(q) * (c - M) ** 2))
    y = _coordinate_descent(q, M, r)
    d = y - M
    return float(d @ q @ d)
