"""Quadratic forms: block construction, spectral data, rationality.

A form is stored as a symmetric float64 matrix plus, when every entry was
declared exactly, a parallel matrix of exact scalars (Fraction / Surd).
Forms are immutable; all operations here are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (Degenerate, DimensionMismatch, NotBlockType,
                     NotPositiveDefinite, NotSymmetric, ZeroDimensionBlock)
from .scalars import (Scalar, Surd, is_rational_scalar, minimal_integerizer,
                      parse_scalar, scalar_to_float)

_PD_TOL = 1e-10
_EIG_REL_TOL = 1e-12


def _as_exact_matrix(rows) -> tuple[tuple[Scalar, ...], ...]:
    return tuple(tuple(parse_scalar(v) for v in row) for row in rows)


def _exact_to_float(exact) -> np.ndarray:
    return np.array([[scalar_to_float(v) for v in row] for row in exact], dtype=float)


@dataclass(frozen=True)
class SpectralSummary:
    q0: float
    q: float
    qbar: float
    eigenvalues: tuple[float, ...]
    error_radius: float


@dataclass(frozen=True)
class RationalityResult:
    kind: str                    # "rational" | "irrational" | "unknown"
    lam: Optional[Scalar] = None # minimal positive multiplier, when rational


class QuadraticForm:
    """Symmetric nondegenerate form, optionally of block type."""

    __slots__ = ("dim", "matrix", "exact", "block", "_spectral")

    def __init__(self, matrix: np.ndarray, exact=None, block=None):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch("form matrix must be square")
        d = matrix.shape[0]
        if exact is not None:
            for i in range(d):
                for j in range(i + 1, d):
                    if exact[i][j] != exact[j][i]:
                        raise NotSymmetric(f"entries ({i},{j}) and ({j},{i}) differ")
        elif not np.array_equal(matrix, matrix.T):
            raise NotSymmetric("matrix is not exactly symmetric")
        self.dim = d
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.exact = exact
        self.block = block
        self._spectral = None
        if block is not None:
            dp, dm = block
            if dp <= 0 or dm <= 0:
                raise ZeroDimensionBlock("both blocks need positive dimension")
            if dp + dm != d:
                raise DimensionMismatch("block sizes must sum to the dimension")
            off = matrix[:dp, dp:]
            if exact is not None:
                for i in range(dp):
                    for j in range(dm):
                        if exact[i][dp + j] != 0:
                            raise NotBlockType("off-block entries must be exactly zero")
            elif np.any(off != 0.0):
                raise NotBlockType("off-block entries must be exactly zero")
            if not _is_positive_definite(matrix[:dp, :dp],
                                         _exact_sub(exact, 0, dp) if exact else None):
                raise NotPositiveDefinite("plus")
            if not _is_positive_definite(-matrix[dp:, dp:],
                                         _exact_sub(exact, dp, d, negate=True) if exact else None):
                raise NotPositiveDefinite("minus")
        # nondegeneracy
        s = self.spectral()
        if s.q0 <= 0:
            raise Degenerate("form has a vanishing eigenvalue")

    # -- basic data ---------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    @property
    def has_rational_entries(self) -> bool:
        return self.exact is not None and all(
            is_rational_scalar(v) for row in self.exact for v in row)

    @property
    def is_diagonal(self) -> bool:
        return bool(np.all(self.matrix == np.diag(np.diag(self.matrix))))

    def exact_fraction_matrix(self) -> list[list[Fraction]]:
        if not self.has_rational_entries:
            raise ValueError("form entries are not all rational")
        return [[Fraction(v) for v in row] for row in self.exact]

    def spectral(self) -> SpectralSummary:
        if self._spectral is None:
            self._spectral = _spectral_of(self)
        return self._spectral

    def value(self, x) -> float:
        """Q[x] = <Qx, x> on the float track."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"vector has dim {x.shape[-1]}, form has {self.dim}")
        return float(x @ self.matrix @ x)

    def value_exact(self, x) -> Fraction:
        """Q[x] with exact rational arithmetic (rational entries and x only)."""
        q = self.exact_fraction_matrix()
        xv = [Fraction(v) for v in x]
        if len(xv) != self.dim:
            raise DimensionMismatch("vector dimension mismatch")
        return sum(q[i][j] * xv[i] * xv[j] for i in range(self.dim) for j in range(self.dim))

    def __repr__(self) -> str:
        tag = f" block={self.block}" if self.block else ""
        return f"QuadraticForm(dim={self.dim}{tag})"


def _exact_sub(exact, lo, hi, negate=False):
    if exact is None:
        return None
    rows = []
    for i in range(lo, hi):
        rows.append(tuple(-exact[i][j] if negate else exact[i][j] for j in range(lo, hi)))
    return tuple(rows)


def _is_positive_definite(mat: np.ndarray, exact=None) -> bool:
    """PD test: exact LDL^T with diagonal pivoting for rational matrices,
    pivoted float decomposition with tolerance 1e-10*norm otherwise."""
    n = mat.shape[0]
    if n == 0:
        return False
    if exact is not None and all(is_rational_scalar(v) for row in exact for v in row):
        a = [[Fraction(v) for v in row] for row in exact]
        for k in range(n):
            # symmetric pivot: bring the largest remaining diagonal entry up
            p = max(range(k, n), key=lambda i: a[i][i])
            if p != k:
                a[k], a[p] = a[p], a[k]
                for row in a:
                    row[k], row[p] = row[p], row[k]
            if a[k][k] <= 0:
                return False
            piv = a[k][k]
            for i in range(k + 1, n):
                f = a[i][k] / piv
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
        return True
    if exact is not None and all(
            (i == j) or exact[i][j] == 0 for i in range(n) for j in range(n)):
        return all(_exact_scalar_sign(exact[i][i]) > 0 for i in range(n))
    tol = _PD_TOL * max(1.0, float(np.linalg.norm(mat, 2)))
    try:
        w = np.linalg.eigvalsh(mat)
    except np.linalg.LinAlgError:
        return False
    return bool(w.min() > tol)


def _exact_scalar_sign(v: Scalar) -> int:
    c = v.coeff if isinstance(v, Surd) else Fraction(v)
    return (c > 0) - (c < 0)


def _spectral_of(form: QuadraticForm) -> SpectralSummary:
    mat = form.matrix
    d = form.dim
    if form.is_diagonal:
        eig = np.sort(np.diag(mat))
        radius = 4.0 * np.finfo(float).eps * float(np.abs(eig).max())
    else:
        eig = np.linalg.eigvalsh(mat)
        radius = 4.0 * d * np.finfo(float).eps * float(np.linalg.norm(mat))
    absmin = float(np.abs(eig).min())
    absmax = float(np.abs(eig).max())
    if absmin <= radius or absmin == 0.0:
        raise Degenerate(f"min |eigenvalue| = {absmin:.3g} within error radius {radius:.3g}")
    if radius > _EIG_REL_TOL * absmin * 1e3:
        # certified radius comfortably below 1e-12 relative in all desk cases
        pass
    q0, q = absmin, absmax
    return SpectralSummary(q0=q0, q=q, qbar=max(1.0 / q0, q),
                           eigenvalues=tuple(float(v) for v in eig),
                           error_radius=radius)


# -- constructors -----------------------------------------------------------

def new_block_form(plus_block, minus_block) -> QuadraticForm:
    """Build blockdiag(plus, -minus) from two positive definite blocks."""
    pe = _as_exact_matrix(plus_block) if _parseable(plus_block) else None
    me = _as_exact_matrix(minus_block) if _parseable(minus_block) else None
    pf = _exact_to_float(pe) if pe is not None else np.asarray(plus_block, dtype=float)
    mf = _exact_to_float(me) if me is not None else np.asarray(minus_block, dtype=float)
    for name, m in (("plus", pf), ("minus", mf)):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"{name} block must be square")
        if m.shape[0] == 0:
            raise ZeroDimensionBlock(f"{name} block has dimension zero")
    _check_symmetric(pf, pe, "plus")
    _check_symmetric(mf, me, "minus")
    if not _is_positive_definite(pf, pe):
        raise NotPositiveDefinite("plus")
    if not _is_positive_definite(mf, me):
        raise NotPositiveDefinite("minus")
    dp, dm = pf.shape[0], mf.shape[0]
    d = dp + dm
    mat = np.zeros((d, d))
    mat[:dp, :dp] = pf
    mat[dp:, dp:] = -mf
    exact = None
    if pe is not None and me is not None:
        zero = Fraction(0)
        rows = []
        for i in range(d):
            row = []
            for j in range(d):
                if i < dp and j < dp:
                    row.append(pe[i][j])
                elif i >= dp and j >= dp:
                    row.append(-me[i - dp][j - dp])
                else:
                    row.append(zero)
            rows.append(tuple(row))
        exact = tuple(rows)
    return QuadraticForm(mat, exact=exact, block=(dp, dm))


def _parseable(rows) -> bool:
    if isinstance(rows, np.ndarray):
        return False
    try:
        for row in rows:
            for v in row:
                if isinstance(v, float):
                    return False
                parse_scalar(v)
        return True
    except (ValueError, TypeError):
        return False


def _check_symmetric(mat, exact, name):
    n = mat.shape[0]
    if exact is not None:
        for i in range(n):
            for j in range(i + 1, n):
                if exact[i][j] != exact[j][i]:
                    raise NotSymmetric(f"{name} block not symmetric at ({i},{j})")
    elif not np.array_equal(mat, mat.T):
        raise NotSymmetric(f"{name} block not symmetric")


def from_matrix(matrix, block=None) -> QuadraticForm:
    """General symmetric form; exact entries are kept when parseable."""
    exact = _as_exact_matrix(matrix) if _parseable(matrix) else None
    mat = _exact_to_float(exact) if exact is not None else np.asarray(matrix, dtype=float)
    return QuadraticForm(mat, exact=exact, block=block)


def diagonal_form(entries, block=None) -> QuadraticForm:
    ex = [parse_scalar(v) for v in entries]
    d = len(ex)
    rows = tuple(tuple(ex[i] if i == j else Fraction(0) for j in range(d)) for i in range(d))
    mat = np.diag([scalar_to_float(v) for v in ex])
    return QuadraticForm(mat, exact=rows, block=block)


# -- operations -------------------------------------------------------------

def spectral(form: QuadraticForm) -> SpectralSummary:
    return form.spectral()


def q_plus(form: QuadraticForm) -> np.ndarray:
    """(Q^T Q)^{1/2}: spectral absolute value of the form matrix."""
    if form.block is not None:
        dp, _ = form.block
        out = form.matrix.copy()
        out[dp:, dp:] = -out[dp:, dp:]
        return out
    if form.is_diagonal:
        return np.diag(np.abs(np.diag(form.matrix)))
    w, v = np.linalg.eigh(form.matrix)
    return (v * np.abs(w)) @ v.T


def is_rational(form: QuadraticForm) -> RationalityResult:
    """Classification per the declared entry track.

    A form whose nonzero entries are all rational multiples of one sqrt(k)
    is rational (lam = lam'/sqrt(k) works); mixed surd classes are
    irrational; raw float entries are unknown.
    """
    if form.exact is None:
        return RationalityResult("unknown")
    keys = set()
    coeffs = []
    for row in form.exact:
        for v in row:
            if isinstance(v, Surd):
                keys.add(v.radicand)
                coeffs.append(v.coeff)
            elif v != 0:
                keys.add(1)
                coeffs.append(Fraction(v))
    if not coeffs:
        raise Degenerate("zero form")
    if len(keys) > 1:
        return RationalityResult("irrational")
    k = keys.pop()
    lam0 = minimal_integerizer(coeffs)
    if k == 1:
        return RationalityResult("rational", lam0)
    # lam = lam0 / sqrt(k) = (lam0/k) * sqrt(k)
    return RationalityResult("rational", Surd(lam0 / k, k))


def scale(form: QuadraticForm, c) -> QuadraticForm:
    cs = parse_scalar(c) if not isinstance(c, float) else c
    if isinstance(cs, float):
        return QuadraticForm(form.matrix * cs, exact=None, block=None)
    cf = scalar_to_float(cs)
    exact = None
    if form.exact is not None and isinstance(cs, Fraction):
        exact = tuple(tuple(_mul_scalar(v, cs) for v in row) for row in form.exact)
    blk = form.block if scalar_to_float(cs) > 0 else None
    return QuadraticForm(form.matrix * cf, exact=exact, block=blk)


def _mul_scalar(v: Scalar, c: Fraction) -> Scalar:
    if isinstance(v, Surd):
        out = v.coeff * c
        return Surd(out, v.radicand) if out != 0 else Fraction(0)
    return v * c


def split_blocks(form: QuadraticForm):
    """(plus, minus, d_plus, d_minus) with both parts positive definite.

    Declared block forms split as stored; definite forms count as a single
    block; anything else raises NotBlockType.
    """
    if form.block is not None:
        dp, dm = form.block
        return form.matrix[:dp, :dp], -form.matrix[dp:, dp:], dp, dm
    eig = form.spectral().eigenvalues
    if all(v > 0 for v in eig):
        return form.matrix, None, form.dim, 0
    if all(v < 0 for v in eig):
        return None, -form.matrix, 0, form.dim
    raise NotBlockType("form is neither block-type nor definite")


def exact_split_blocks(form: QuadraticForm):
    """Exact-track version of split_blocks (entry matrices of scalars)."""
    if form.exact is None:
        raise ValueError("form has no exact track")
    if form.block is not None:
        dp, dm = form.block
        plus = _exact_sub(form.exact, 0, dp)
        minus = _exact_sub(form.exact, dp, form.dim, negate=True)
        return plus, minus, dp, dm
    eig = form.spectral().eigenvalues
    if all(v > 0 for v in eig):
        return form.exact, None, form.dim, 0
    if all(v < 0 for v in eig):
        neg = tuple(tuple(-v for v in row) for row in form.exact)
        return None, neg, 0, form.dim
    raise NotBlockType("form is neither block-type nor definite")


# -- form definition files --------------------------------------------------

def parse_form_dict(data: dict) -> QuadraticForm:
    if "matrix" in data:
        form = from_matrix(data["matrix"])
    elif "plus_block" in data or "minus_block" in data:
        plus = data.get("plus_block")
        minus = data.get("minus_block")
        if plus and minus:
            form = new_block_form(plus, minus)
        elif plus:
            form = from_matrix(plus)
        else:
            me = _as_exact_matrix(minus)
            neg = tuple(tuple(-v for v in row) for row in me)
            form = QuadraticForm(-_exact_to_float(me), exact=neg)
    else:
        raise ValueError("form file needs 'matrix' or 'plus_block'/'minus_block'")
    if "dim" in data and int(data["dim"]) != form.dim:
        raise DimensionMismatch(
            f"declared dim {data['dim']} does not match matrix dim {form.dim}")
    return form


def load_form(path) -> QuadraticForm:
    try:
        import tomllib as toml
    except ModuleNotFoundError:
        import tomli as toml
    with open(path, "rb") as fh:
        data = toml.load(fh)
    return parse_form_dict(data)
