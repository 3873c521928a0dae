"""Integral quadratic forms, duals, and the hyperbolic change of variables.

A form F in n+1 variables is stored through its doubled Gram matrix
A = 2*M_F (integer, symmetric, even diagonal), so F(x) = x^T A x / 2 is an
exact integer for integer x and the gradient is A x.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .util import ceil_div_frac, floor_div_frac, parse_rational

Matrix = tuple  # tuple of row-tuples


# ----- exact rational linear algebra -----

def mat_mul_vec(m: Matrix, v: Sequence) -> tuple:
    return tuple(sum(m[i][j] * v[j] for j in range(len(v))) for i in range(len(m)))


def mat_det(m: Matrix) -> Fraction:
    # fraction-free would be faster; sizes here are tiny
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def mat_inv(m: Matrix) -> Matrix:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def mat_adjugate_int(m: Matrix) -> Matrix:
    """Adjugate of an integer matrix, exact (det * inverse)."""
    det = mat_det(m)
    if det == 0:
        raise ValueError("degenerate matrix has no usable adjugate here")
    inv = mat_inv(m)
    out = []
    for row in inv:
        r = []
        for x in row:
            v = x * det
            if v.denominator != 1:
                raise ValueError("adjugate of a non-integer matrix requested")
            r.append(int(v))
        out.append(tuple(r))
    return tuple(out)


def kernel_basis(rows: Sequence[Sequence[Fraction]], n: int) -> list[tuple]:
    """Basis of {v in Q^n : row · v = 0 for each row}, exact."""
    a = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fc]
        basis.append(tuple(v))
    return basis


# ----- quadratic forms -----

@dataclass(frozen=True)
class QuadraticForm:
    nvars: int
    doubled_gram: Matrix

    def __post_init__(self):
        a = self.doubled_gram
        if len(a) != self.nvars or any(len(row) != self.nvars for row in a):
            raise ValueError("doubled Gram matrix has wrong shape")
        for i in range(self.nvars):
            if a[i][i] % 2 != 0:
                raise ValueError("doubled Gram matrix must have even diagonal")
            for j in range(self.nvars):
                if a[i][j] != a[j][i]:
                    raise ValueError("doubled Gram matrix must be symmetric")
                if not isinstance(a[i][j], int):
                    raise ValueError("doubled Gram matrix must be integral")
        if self.det_doubled == 0:
            raise ValueError("degenerate form")

    @classmethod
    def from_coeffs(cls, nvars: int, coeffs: Sequence[Sequence[int]]) -> "QuadraticForm":
        a = [[0] * nvars for _ in range(nvars)]
        for i, j, c in coeffs:
            i, j, c = int(i), int(j), int(c)
            if not (0 <= i <= j < nvars):
                raise ValueError(f"bad coefficient triple ({i},{j},{c})")
            if i == j:
                a[i][i] += 2 * c
            else:
                a[i][j] += c
                a[j][i] += c
        return cls(nvars, tuple(tuple(row) for row in a))

    @property
    def det_doubled(self) -> int:
        d = mat_det(self.doubled_gram)
        return int(d)

    def evaluate(self, x: Sequence) -> int:
        if len(x) != self.nvars:
            raise ValueError("dimension mismatch")
        a = self.doubled_gram
        s = 0
        for i in range(self.nvars):
            if x[i]:
                s += x[i] * sum(a[i][j] * x[j] for j in range(self.nvars))
        if isinstance(s, Fraction):
            return s / 2
        return s // 2

    def gradient(self, x: Sequence) -> tuple:
        if len(x) != self.nvars:
            raise ValueError("dimension mismatch")
        return mat_mul_vec(self.doubled_gram, x)

    def bilinear(self, u: Sequence, v: Sequence) -> Fraction:
        """B(u, v) with F(x) = B(x, x)."""
        return Fraction(sum(gu * vv for gu, vv in zip(self.gradient(u), v)), 2)


def load_form(source) -> QuadraticForm:
    """Form file: JSON with fields nvars and coeffs = [[i, j, c], ...]."""
    if isinstance(source, dict):
        data = source
    else:
        with open(source) as fh:
            data = json.load(fh)
    if "nvars" not in data or "coeffs" not in data:
        raise ValueError("form file needs fields 'nvars' and 'coeffs'")
    return QuadraticForm.from_coeffs(int(data["nvars"]), data["coeffs"])


def dump_form(form: QuadraticForm) -> dict:
    coeffs = []
    a = form.doubled_gram
    for i in range(form.nvars):
        if a[i][i]:
            coeffs.append([i, i, a[i][i] // 2])
        for j in range(i + 1, form.nvars):
            if a[i][j]:
                coeffs.append([i, j, a[i][j]])
    return {"nvars": form.nvars, "coeffs": coeffs}


# ----- dual form -----

@dataclass(frozen=True)
class DualForm:
    base: QuadraticForm
    adjugate_doubled: Matrix

    def eval_scaled(self, c: Sequence[int]) -> int:
        """2^n F*(c), always an integer for integer c."""
        if len(c) != self.base.nvars:
            raise ValueError("dimension mismatch")
        a = self.adjugate_doubled
        n = self.base.nvars
        s = 0
        for i in range(n):
            if c[i]:
                s += c[i] * sum(a[i][j] * c[j] for j in range(n))
        return s


def dual_form(form: QuadraticForm) -> DualForm:
    adj = mat_adjugate_int(form.doubled_gram)
    return DualForm(form, adj)


# ----- hyperbolic (Witt) frame -----

@dataclass(frozen=True)
class WittFrame:
    form: QuadraticForm
    base_point: tuple  # ξ, rational, F(ξ) = 0, ξ0 ≠ 0
    matrix: Matrix  # M, rational; t = M x
    matrix_inv: Matrix  # columns ξ, v1, v2..vn
    f2_gram: Matrix  # rational symmetric; F2(y) = y^T S y with S_ij = B(v_i, v_j)

    @property
    def nvars(self) -> int:
        return self.form.nvars

    @property
    def is_identity(self) -> bool:
        n = self.nvars
        return all(self.matrix[i][j] == (1 if i == j else 0)
                   for i in range(n) for j in range(n))

    def t_coords(self, x: Sequence) -> tuple:
        return mat_mul_vec(self.matrix, x)

    def f2_evaluate(self, y: Sequence) -> Fraction:
        s = self.f2_gram
        m = len(s)
        if len(y) != m:
            raise ValueError("dimension mismatch")
        return Fraction(sum(y[i] * s[i][j] * y[j] for i in range(m) for j in range(m)))

    def f2_diagonal_int(self):
        """Diagonal coefficients (d_2..d_n) if F2 is diagonal with integer
        entries, else None. Gates the fast enumeration kernel."""
        s = self.f2_gram
        m = len(s)
        diag = []
        for i in range(m):
            for j in range(m):
                if i != j and s[i][j] != 0:
                    return None
            d = Fraction(s[i][i])
            if d.denominator != 1:
                return None
            diag.append(int(d))
        return tuple(diag)

    def det_m(self) -> Fraction:
        return abs(mat_det(self.matrix))


def witt_frame(form: QuadraticForm, xi: Sequence) -> WittFrame:
    n1 = form.nvars
    xi = tuple(parse_rational(v) for v in xi)
    if len(xi) != n1:
        raise ValueError("dimension mismatch")
    if all(v == 0 for v in xi):
        raise ValueError("base point must be nonzero")
    if xi[0] == 0:
        raise ValueError("base point must have nonzero first coordinate")
    if form.evaluate(xi) != 0:
        raise ValueError("base point is not on the quadric")

    # v1 with B(v1, ξ) ≠ 0; exists for nondegenerate F
    grad_xi = form.gradient(xi)  # B(v, ξ) = v·grad_xi / 2
    idx = next((i for i in range(n1) if grad_xi[i] != 0), None)
    if idx is None:
        raise ValueError("internal error: degenerate form slipped through")
    v1 = [Fraction(int(i == idx)) for i in range(n1)]
    b = Fraction(grad_xi[idx], 2)
    lam = -Fraction(form.evaluate(v1)) / (2 * b)  # kill F(v1), keeps B(v1, ξ)
    v1 = [v1[i] + lam * xi[i] for i in range(n1)]
    v1 = [v / (2 * b) for v in v1]  # now 2B(v1, ξ) = 1

    # complement: B(v, ξ) = 0 and B(v, v1) = 0
    rows = [form.gradient(xi), form.gradient(v1)]
    comp = kernel_basis(rows, n1)
    if len(comp) != n1 - 2:
        raise ValueError("internal error: complement has wrong dimension")

    cols = [xi, tuple(v1)] + comp
    minv = tuple(tuple(cols[j][i] for j in range(n1)) for i in range(n1))
    m = mat_inv(minv)
    s = tuple(tuple(form.bilinear(comp[i], comp[j]) for j in range(n1 - 2))
              for i in range(n1 - 2))
    frame = WittFrame(form, xi, m, minv, s)
    if mat_det(s) == 0:
        raise ValueError("internal error: degenerate reduced form")
    return frame


def height(frame: WittFrame, x: Sequence[int]) -> Fraction:
    g = 0
    for v in x:
        g = math.gcd(g, int(v))
    if g != 1:
        raise ValueError("height requires a primitive integer vector")
    t = frame.t_coords(x)
    return max(abs(Fraction(v)) for v in t)


# ----- zoom neighbourhoods -----

@dataclass(frozen=True)
class ZoomSpec:
    box: tuple  # n-1 pairs (a_j, b_j) of Fractions
    radius: Fraction  # R

    def __post_init__(self):
        box = tuple((parse_rational(a), parse_rational(b)) for a, b in self.box)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "radius", parse_rational(self.radius))
        if self.radius < 1:
            raise ValueError("zoom radius must be >= 1")
        for a, b in box:
            if a > b:
                raise ValueError("interval endpoints out of order")

    @property
    def corner_max(self) -> Fraction:
        return max(max(abs(a), abs(b)) for a, b in self.box)

    def volume(self) -> Fraction:
        v = Fraction(1)
        for a, b in self.box:
            v *= b - a
        return v

    def meets_threshold(self, frame: WittFrame) -> bool:
        """Advisory check of the frame-dependent radius threshold: the box
        corners must satisfy sup |F2| <= 1 after scaling by 1/R, and
        max(|a_j|, |b_j|) <= R."""
        r = self.radius
        if self.corner_max > r:
            return False
        s = frame.f2_gram
        m = len(s)
        c = [max(abs(a), abs(b)) for a, b in self.box]
        bound = sum(abs(s[i][j]) * c[i] * c[j] for i in range(m) for j in range(m))
        return bound <= r * r

    def int_range(self, j: int, t0) -> tuple[int, int]:
        """Integer t_j range [lo, hi] for axis j (0-based within the box)
        at chart coordinate t0 != 0: R t_j / t0 in [a_j, b_j]."""
        a, b = self.box[j]
        t0 = Fraction(t0)
        if t0 > 0:
            lo, hi = a * t0 / self.radius, b * t0 / self.radius
        else:
            lo, hi = b * t0 / self.radius, a * t0 / self.radius
        return ceil_div_frac(lo), floor_div_frac(hi)


class OutsideChartError(ValueError):
    pass


def zoom_contains(frame: WittFrame, zoom: ZoomSpec, x: Sequence) -> bool:
    t = frame.t_coords(x)
    if t[0] == 0:
        raise OutsideChartError("point outside the t0 != 0 chart")
    r = zoom.radius
    for j, (a, b) in enumerate(zoom.box):
        ratio = r * Fraction(t[j + 2]) / Fraction(t[0])
        if not (a <= ratio <= b):
            return False
    return True
