"""Minkowski successive minima of the parametric sup-norm on Z^{2d}, and
the derived diophantine functionals.

For a form Q, parameter t and window size r the norm of an integer pair
(m, n) is  F(m,n) = max( r*|m + t*Q*n|_inf , |n|_inf / r ).  The mapping
(m,n) -> (r(m+tQn), n/r) has determinant one, so minima are found by
greedy extraction (under exact rank checks) from candidate sets that are
provably value-complete below certified upper bounds:

* ball regime -- every lattice point with Euclidean norm <= sqrt(2d)*cap
  via breadth-first Fincke-Pohst on an LLL-reduced basis; cheap while the
  target minima are small;
* shell regime -- n scanned over sup-norm shells |n|_inf = s <= r*cap in
  increasing order.  For fixed n the best m is the componentwise rounding
  of -tQn; that primary vector, one single-axis rounding variant per
  coordinate, and the unit vectors (e_j, 0) form a family that attains
  every successive minimum, so nothing else is ever needed.  Since any
  candidate from shell s has value >= s/r, the scan stops as soon as the
  current upper bound is beaten by s/r.

Independence is pre-screened by rank checks modulo two fixed 30-bit
primes (vectorized) and every acceptance is confirmed by exact rational
elimination, so reported minima on the all-rational track are exact
fractions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (BudgetExceeded, DimensionTooSmall,
                     EnumerationBudgetExceeded)
from .forms import QuadraticForm
from .gridutil import grid_chunks, grid_size, shell_chunks
from .lattice import ball_volume, enumerate_ball, lll_reduce
from .scalars import is_rational_scalar, parse_scalar, scalar_to_float

FP_NODE_BUDGET = 25_000_000
SHELL_POINT_BUDGET = 1_000_000_000
_P1 = 1_073_741_789
_P2 = 1_073_741_783


@dataclass(frozen=True)
class MinimaProblem:
    form: QuadraticForm
    t: object  # scalar; Fractions keep the exact track
    r: object

    def __post_init__(self):
        rf = scalar_to_float(parse_scalar(self.r))
        if rf < 1:
            raise ValueError("r must be >= 1")
        if rf < 2:
            warnings.warn("r below 2 is outside the norm's usual range",
                          stacklevel=2)


@dataclass(frozen=True)
class MinimaResult:
    minima: tuple                 # floats, ascending
    vectors: tuple                # ((m...), (n...)) integer pairs
    product_d: float              # M_1 * ... * M_d
    exact: bool
    error_radius: float
    minima_exact: Optional[tuple] = None  # Fractions on the exact track


@dataclass(frozen=True)
class GammaResult:
    value: float
    t_argmin: float
    grid_t: tuple
    grid_values: tuple


@dataclass(frozen=True)
class MeasureResult:
    estimate: float
    resolution: float
    grid_t: tuple
    m1_values: tuple


# -- rank tracking -----------------------------------------------------------

class _Span:
    """Exact rank tracker with two-prime modular pre-screening."""

    def __init__(self, n: int):
        self.n = n
        self.rows: list[tuple[int, list[int]]] = []   # exact pivots
        self.mod: dict[int, list[tuple[int, np.ndarray]]] = {_P1: [], _P2: []}

    @property
    def rank(self) -> int:
        return len(self.rows)

    def try_add(self, vec) -> bool:
        w = [int(v) for v in vec]
        for piv, row in self.rows:
            if w[piv]:
                a, b = row[piv], w[piv]
                w = [wi * a - ri * b for wi, ri in zip(w, row)]
        for i, x in enumerate(w):
            if x:
                g = 0
                for y in w:
                    g = math.gcd(g, abs(y))
                if g > 1:
                    w = [y // g for y in w]
                self.rows.append((i, w))
                for p in (_P1, _P2):
                    self._mod_add(np.array(vec, dtype=np.int64), p)
                return True
        return False

    def _mod_add(self, vec: np.ndarray, p: int):
        w = vec % p
        for col, row in self.mod[p]:
            f = int(w[col])
            if f:
                w = (w * int(row[col]) - f * row) % p
        nz = np.nonzero(w)[0]
        # w may vanish mod p even for an exact-independent vector; keep a
        # placeholder so prefix lengths stay aligned with self.rows
        col = int(nz[0]) if nz.size else -1
        self.mod[p].append((col, w))

    def _dependence_rank_one(self, rows: np.ndarray, p: int) -> np.ndarray:
        """Per row: smallest pivot count after which it is dependent mod p
        (a large sentinel when it never is)."""
        big = len(self.mod[p]) + 1
        rank = np.full(len(rows), big, dtype=np.int64)
        w = rows % p
        alive = np.any(w != 0, axis=1)
        rank[~alive] = 0
        for j, (col, prow) in enumerate(self.mod[p]):
            if col >= 0:
                f = w[:, col]
                if f.any():
                    w = (w * int(prow[col]) - f[:, None] * prow[None, :]) % p
            newly = alive & ~np.any(w != 0, axis=1)
            rank[newly] = j + 1
            alive &= ~newly
            if not alive.any():
                break
        return rank

    def dependence_rank(self, rows: np.ndarray) -> np.ndarray:
        """Certified-from-below dependence prefix: row i is dependent on the
        span of the first k accepted vectors whenever result[i] <= k (checked
        modulo two primes, so a false 'dependent' needs a simultaneous
        vanishing mod both)."""
        if rows.size == 0:
            return np.zeros(0, dtype=np.int64)
        r1 = self._dependence_rank_one(rows, _P1)
        sentinel = len(self.mod[_P1]) + 1
        sus = r1 < sentinel
        if sus.any():
            r2 = self._dependence_rank_one(rows[sus], _P2)
            r1[sus] = np.maximum(r1[sus], r2)
        return r1

    def filter_maybe_independent(self, rows: np.ndarray,
                                 prefix: int) -> np.ndarray:
        """Boolean mask: False only when dependent modulo both primes on the
        span of the first `prefix` accepted vectors."""
        if prefix == 0 or rows.size == 0:
            return np.ones(len(rows), dtype=bool)
        return self.dependence_rank(rows) > prefix


# -- engine -------------------------------------------------------------------

class _Engine:
    def __init__(self, form: QuadraticForm, t, r):
        self.form = form
        self.d = form.dim
        self.t_scalar = parse_scalar(t)
        self.r_scalar = parse_scalar(r)
        self.tf = scalar_to_float(self.t_scalar)
        self.rf = scalar_to_float(self.r_scalar)
        self.Q = form.matrix
        self._reduced = None
        self.exact = (form.has_rational_entries
                      and is_rational_scalar(self.t_scalar)
                      and is_rational_scalar(self.r_scalar))
        if self.exact:
            qmat = form.exact_fraction_matrix()
            den = 1
            for row in qmat:
                for v in row:
                    den = den * v.denominator // math.gcd(den, v.denominator)
            self.denQ = den
            self.intQ = np.array([[int(v * den) for v in row] for row in qmat],
                                 dtype=np.int64)
            tq = Fraction(self.t_scalar)
            rq = Fraction(self.r_scalar)
            self.pt, self.qt = tq.numerator, tq.denominator
            self.pr, self.qr = rq.numerator, rq.denominator
            self.den1 = self.qr * self.qt * self.denQ
            self.den2 = self.pr
            lcm = self.den1 * self.den2 // math.gcd(self.den1, self.den2)
            self.keyD = lcm
            self.f1 = lcm // self.den1
            self.f2 = lcm // self.den2

    def float_values(self, m: np.ndarray, n: np.ndarray) -> np.ndarray:
        comp1 = self.rf * np.abs(m + self.tf * (n @ self.Q.T)).max(axis=1)
        comp2 = np.abs(n).max(axis=1) / self.rf
        return np.maximum(comp1, comp2)

    def exact_keys(self, m: np.ndarray, n: np.ndarray) -> Optional[np.ndarray]:
        """Integer sort keys = value * keyD; None if int64 would overflow."""
        if m.size == 0:
            return np.zeros(0, dtype=np.int64)
        qmax = int(np.abs(self.intQ).max())
        mmax = int(np.abs(m).max(initial=0))
        nmax = int(np.abs(n).max(initial=0))
        bound1 = abs(self.pr) * (mmax * self.qt * self.denQ
                                 + abs(self.pt) * qmax * self.d * nmax)
        bound = max(bound1 * self.f1, nmax * self.qr * self.f2)
        if bound >= 2 ** 62:
            return None
        s = n @ self.intQ.T
        num1 = np.abs(self.pr * (m * (self.qt * self.denQ) + self.pt * s)).max(axis=1)
        num2 = np.abs(n).max(axis=1) * self.qr
        return np.maximum(num1 * self.f1, num2 * self.f2)

    def value_fraction(self, key: int) -> Fraction:
        return Fraction(int(key), self.keyD)

    def basis_rows(self) -> np.ndarray:
        d, r, t = self.d, self.rf, self.tf
        b = np.zeros((2 * d, 2 * d))
        b[:d, :d] = r * np.eye(d)
        b[d:, :d] = r * t * self.Q.T
        b[d:, d:] = np.eye(d) / r
        return b

    def pool_vectors(self) -> np.ndarray:
        d = self.d
        out = []
        for j in range(d):
            v = np.zeros(2 * d, dtype=np.int64)
            v[j] = 1
            out.append(v)                  # (e_j, 0)
            w = np.zeros(2 * d, dtype=np.int64)
            w[d + j] = 1
            w[:d] = -np.round(self.tf * self.Q[:, j]).astype(np.int64)
            out.append(w)                  # rounded unit n
        reduced, U = lll_reduce(self.basis_rows())
        self._reduced, self._U = reduced, U
        out.extend(np.asarray(U, dtype=np.int64))
        return np.array(out, dtype=np.int64)

    def ball_candidates(self, cap: float) -> np.ndarray:
        radius = math.sqrt(2 * self.d) * cap
        coeffs = enumerate_ball(self._reduced, radius, FP_NODE_BUDGET)
        if coeffs.size == 0:
            return np.zeros((0, 2 * self.d), dtype=np.int64)
        return coeffs @ self._U

    def family_candidates(self, n_chunk: np.ndarray, bound: float):
        """Primary and single-axis variant vectors with value <= bound.

        Variants cost at least r/2, so they are skipped entirely when the
        bound cannot reach them.
        """
        d = self.d
        s = self.tf * (n_chunk @ self.Q.T)
        m0f = -np.round(s)
        resid = s + m0f
        absr = np.abs(resid)
        m0 = m0f.astype(np.int64)
        ninf = np.abs(n_chunk).max(axis=1) / self.rf
        prim = np.maximum(self.rf * absr.max(axis=1), ninf)
        tol = bound * (1.0 + 1e-9) + 1e-12
        parts = []
        sel = prim <= tol
        if sel.any():
            parts.append(np.concatenate([m0[sel], n_chunk[sel]], axis=1))
        if tol >= self.rf * 0.5:
            top = absr.max(axis=1, keepdims=True)
            is_top = absr >= top
            tmp = np.where(is_top, -1.0, absr)
            second = tmp.max(axis=1, keepdims=True)
            single_top = is_top.sum(axis=1, keepdims=True) == 1
            others = np.where(is_top & single_top, second, top)
            var = np.maximum(self.rf * np.maximum(others, 1.0 - absr),
                             ninf[:, None])
            for i in range(d):
                sel = var[:, i] <= tol
                if sel.any():
                    madj = m0[sel].copy()
                    step = np.where(resid[sel, i] >= 0, -1, 1).astype(np.int64)
                    madj[:, i] += step
                    parts.append(np.concatenate([madj, n_chunk[sel]], axis=1))
        if not parts:
            return np.zeros((0, 2 * d), dtype=np.int64)
        return np.concatenate(parts, axis=0)


def _canonicalize_rows(rows: np.ndarray) -> np.ndarray:
    """Flip signs so the first nonzero entry of each row is positive...
    then a lexicographic comparison picks the canonical representative."""
    if rows.size == 0:
        return rows
    nz = rows != 0
    first = np.argmax(nz, axis=1)
    lead = rows[np.arange(len(rows)), first]
    # canonical = lexicographically smaller of {v, -v}: leading entry < 0
    flip = lead > 0
    out = rows.copy()
    out[flip] = -out[flip]
    return out


class _Greedy:
    """Sequential minima extraction over candidates sorted by (value, lex)."""

    def __init__(self, engine: _Engine, k_target: int):
        self.eng = engine
        self.k = k_target
        self.span = _Span(2 * engine.d)
        self.values: list[float] = []
        self.keys: list = []
        self.vectors: list[tuple] = []

    def _sorted(self, cand: np.ndarray):
        m, n = cand[:, :self.eng.d], cand[:, self.eng.d:]
        vals = self.eng.float_values(m, n)
        keys = self.eng.exact_keys(m, n) if self.eng.exact else None
        canon = _canonicalize_rows(cand)
        sort_cols = tuple(canon[:, c] for c in range(canon.shape[1] - 1, -1, -1))
        order = np.lexsort(sort_cols + ((keys if keys is not None else vals),))
        return canon[order], vals[order], (keys[order] if keys is not None else None)

    def _run_core(self, cand: np.ndarray):
        self.span = _Span(2 * self.eng.d)
        self.values, self.keys, self.vectors = [], [], []
        canon, vals, keys = self._sorted(cand)
        pos = 0
        batch = 2048
        while pos < len(canon) and self.span.rank < self.k:
            rows = canon[pos:pos + batch]
            mask = self.span.filter_maybe_independent(rows, self.span.rank)
            for i in np.nonzero(mask)[0]:
                if self.span.rank >= self.k:
                    break
                tup = tuple(int(v) for v in rows[i])
                if self.span.try_add(tup):
                    self.values.append(float(vals[pos + i]))
                    self.keys.append(None if keys is None else int(keys[pos + i]))
                    self.vectors.append(tup)
            pos += batch

    def run(self, cand: np.ndarray, select: int = 8192):
        """Extraction over the candidate array, prefiltering by value so
        only the cheapest few thousand rows are sorted and rank-checked."""
        if len(cand) <= select:
            self._run_core(cand)
            return
        vals = self.eng.float_values(cand[:, :self.eng.d], cand[:, self.eng.d:])
        while True:
            if select >= len(cand):
                self._run_core(cand)
                return
            tau = np.partition(vals, select)[select] * (1.0 + 1e-12)
            self._run_core(cand[vals <= tau])
            if self.complete and self.bound() <= tau:
                return
            select *= 8

    @property
    def complete(self) -> bool:
        return self.span.rank >= self.k

    def bound(self) -> float:
        return self.values[self.k - 1] if self.complete else math.inf

    def prefix_for(self, vals: np.ndarray) -> np.ndarray:
        """#accepted with value <= v, vectorized over candidate values."""
        acc = np.array(self.values)
        return np.searchsorted(acc, vals * (1.0 + 1e-12), side="right")


def _ball_estimate(d: int, cap: float) -> float:
    return ball_volume(2 * d, math.sqrt(2 * d) * cap) * 1.5 + 10


def _compute_minima(form: QuadraticForm, t, r, k_target: int):
    eng = _Engine(form, t, r)
    d = eng.d
    pool = eng.pool_vectors()
    greedy = _Greedy(eng, k_target)
    greedy.run(pool)
    if not greedy.complete:
        raise EnumerationBudgetExceeded("candidate pool is rank deficient")
    cap = greedy.bound() * (1.0 + 1e-9)
    # iterative deepening: enumerate the smallest certified-sufficient ball
    done = False
    cap_try = cap
    while _ball_estimate(d, cap_try) > FP_NODE_BUDGET / 8 and cap_try > 1e-9:
        cap_try *= 0.75
    while not done and _ball_estimate(d, cap_try) <= FP_NODE_BUDGET:
        try:
            extra = eng.ball_candidates(cap_try)
        except EnumerationBudgetExceeded:
            break
        cand = np.concatenate([pool, extra], axis=0) if extra.size else pool
        greedy.run(cand)
        if greedy.complete and greedy.bound() <= cap_try:
            done = True
        elif cap_try >= cap:
            break
        else:
            cap_try = min(cap, cap_try * 1.3)
    if not done:
        _shell_scan(eng, greedy, pool, cap)
    if not greedy.complete:
        raise EnumerationBudgetExceeded("greedy failed to reach target rank")
    vals = greedy.values[:k_target]
    keys = greedy.keys[:k_target]
    vecs = greedy.vectors[:k_target]
    return eng, vals, keys, vecs


def _shell_scan(eng: _Engine, greedy: _Greedy, pool: np.ndarray, cap: float):
    """Stream n over sup-norm shells, pruning against accepted prefixes.

    A candidate with value v can only change the result when it is
    independent of the accepted vectors with values <= v; in particular
    candidates whose prefix already covers the target rank are dropped
    without any rank work.
    """
    kept = [pool]
    scanned = 0
    s = 1
    while True:
        bound = min(cap, greedy.bound())
        if s / eng.rf > bound * (1.0 + 1e-9):
            break
        shell_pts = 0
        fresh = []
        for pts in shell_chunks(eng.d, s):
            shell_pts += len(pts)
            cand = eng.family_candidates(pts, bound)
            if not len(cand):
                continue
            vals = eng.float_values(cand[:, :eng.d], cand[:, eng.d:])
            prefix_counts = greedy.prefix_for(vals)
            useful = prefix_counts < greedy.k
            cand, prefix_counts = cand[useful], prefix_counts[useful]
            if not len(cand):
                continue
            dep_rank = greedy.span.dependence_rank(cand)
            mask = dep_rank > prefix_counts
            if mask.any():
                fresh.append(cand[mask])
        scanned += shell_pts
        if scanned > SHELL_POINT_BUDGET:
            raise EnumerationBudgetExceeded(
                f"shell scan exceeded {SHELL_POINT_BUDGET} points")
        if fresh:
            kept.extend(fresh)
            greedy.run(np.concatenate(kept, axis=0))
        s += 1


def _error_radius(eng: _Engine, vecs) -> float:
    if eng.exact:
        return 0.0
    mmax = max((max(abs(v) for v in tup[:eng.d]) for tup in vecs), default=0)
    nmax = max((max(abs(v) for v in tup[eng.d:]) for tup in vecs), default=0)
    rowsum = float(np.abs(eng.Q).sum(axis=1).max())
    scale = eng.rf * (mmax + abs(eng.tf) * rowsum * nmax) + nmax / eng.rf
    return 64.0 * np.finfo(float).eps * max(1.0, scale)


def successive_minima(p: MinimaProblem) -> MinimaResult:
    """All 2d successive minima with attaining vectors."""
    form = p.form
    if form.dim > 8:
        raise BudgetExceeded(form.dim, 8)
    eng, vals, keys, vecs = _compute_minima(form, p.t, p.r, 2 * form.dim)
    d = form.dim
    exact_vals = None
    if eng.exact and all(k is not None for k in keys):
        exact_vals = tuple(eng.value_fraction(k) for k in keys)
        vals = [float(v) for v in exact_vals]
    is_exact = exact_vals is not None
    return MinimaResult(
        minima=tuple(vals),
        vectors=tuple((tup[:d], tup[d:]) for tup in vecs),
        product_d=float(np.prod(vals[:d])),
        exact=is_exact,
        error_radius=0.0 if is_exact else _error_radius(eng, vecs),
        minima_exact=exact_vals)


def minima_prefix(form: QuadraticForm, t, r, k: int) -> list[float]:
    """First k minima values (internal fast path)."""
    _, vals, _, _ = _compute_minima(form, t, r, k)
    return vals


def first_minimum(form: QuadraticForm, t, r) -> float:
    return minima_prefix(form, t, r, 1)[0]


def minima_product(form: QuadraticForm, t, r) -> float:
    vals = minima_prefix(form, t, r, form.dim)
    return float(np.prod(vals))


# -- derived functionals -----------------------------------------------------


def gamma(form: QuadraticForm, r, T, grid: int) -> GammaResult:
    """Approximate inf of r^d M_1(t)...M_d(t) over T^{-1/(d-4)} <= |t| <= T,
    on a log grid with one golden-section refinement at the argmin.  The
    norm is even in t, so only t > 0 is scanned."""
    d = form.dim
    if d <= 4:
        raise DimensionTooSmall("gamma needs d > 4")
    if T < 1:
        raise ValueError("T must be >= 1")
    if grid < 2:
        raise ValueError("grid must be >= 2")
    rf = scalar_to_float(parse_scalar(r))
    lo = T ** (-1.0 / (d - 4))
    hi = float(T)
    if math.isclose(lo, hi, rel_tol=1e-12):
        ts = np.array([hi])
    else:
        ts = np.geomspace(lo, hi, grid)

    def f(t: float) -> float:
        return rf ** d * minima_product(form, t, rf)

    vals = np.array([f(t) for t in ts])
    k = int(np.argmin(vals))
    best_t, best_v = float(ts[k]), float(vals[k])
    if ts.size > 1:
        la = math.log(ts[max(0, k - 1)])
        lb = math.log(ts[min(ts.size - 1, k + 1)])
        phi = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = lb - phi * (lb - la)
        x2 = la + phi * (lb - la)
        f1, f2 = f(math.exp(x1)), f(math.exp(x2))
        for _ in range(24):
            if f1 <= f2:
                lb, x2, f2 = x2, x1, f1
                x1 = lb - phi * (lb - la)
                f1 = f(math.exp(x1))
            else:
                la, x1, f1 = x1, x2, f2
                x2 = la + phi * (lb - la)
                f2 = f(math.exp(x2))
        for x, fx in ((x1, f1), (x2, f2)):
            if fx < best_v:
                best_v, best_t = fx, math.exp(x)
    return GammaResult(value=best_v, t_argmin=best_t,
                       grid_t=tuple(float(t) for t in ts),
                       grid_values=tuple(float(v) for v in vals))


def dioph_D(form: QuadraticForm, t, nu, budget: int = 40_000_000) -> float:
    """nu * min over 0 < |n|_inf <= nu of the nearest-integer sup-distance
    of t*Q*n."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    d = form.dim
    half = int(math.floor(nu + 1e-12))
    tf = scalar_to_float(parse_scalar(t))
    if grid_size(d, half) <= budget:
        best = math.inf
        for pts in grid_chunks(d, half):
            mask = np.any(pts != 0, axis=1)
            if not mask.any():
                continue
            w = tf * (pts[mask].astype(float) @ form.matrix.T)
            dist = np.abs(w - np.round(w)).max(axis=1)
            best = min(best, float(dist.min()))
        return float(nu) * best
    # enumeration-assisted: scale the norm so the constraint box is a ball
    theta0 = math.inf
    for j in range(d):
        w = tf * form.matrix[:, j]
        theta0 = min(theta0, float(np.abs(w - np.round(w)).max()))
    if theta0 <= 0:
        return 0.0
    rho = math.sqrt(nu / theta0)
    eng = _Engine(form, tf, rho)
    eng.pool_vectors()
    lam = math.sqrt(nu * theta0) * (1.0 + 1e-9)
    cand = eng.ball_candidates(lam)
    best = theta0
    if cand.size:
        n = cand[:, d:]
        keep = (np.abs(n).max(axis=1) <= nu) & np.any(n != 0, axis=1)
        if keep.any():
            w = tf * (n[keep].astype(float) @ form.matrix.T)
            dist = np.abs(w - np.round(w)).max(axis=1)
            best = min(best, float(dist.min()))
    return float(nu) * best


def minima_measure(form: QuadraticForm, r, interval: tuple, tau: float,
                   grid: int) -> MeasureResult:
    """Lebesgue-measure estimate of {t in [kappa,xi] : M_1(t) <= tau} by
    uniform-grid evaluation with trapezoidal cell attribution."""
    kappa, xi = float(interval[0]), float(interval[1])
    if not (0 < kappa < xi):
        raise ValueError("need 0 < kappa < xi")
    if grid < 16:
        raise ValueError("grid must be >= 16")
    rf = scalar_to_float(parse_scalar(r))
    ts = np.linspace(kappa, xi, grid)
    m1 = np.array([first_minimum(form, float(t), rf) for t in ts])
    ind = (m1 <= tau).astype(float)
    h = (xi - kappa) / (grid - 1)
    measure = float(h * 0.5 * (ind[:-1] + ind[1:]).sum())
    return MeasureResult(estimate=measure, resolution=h,
                         grid_t=tuple(float(t) for t in ts),
                         m1_values=tuple(float(v) for v in m1))
