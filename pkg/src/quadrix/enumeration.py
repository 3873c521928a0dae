"""Integer points on the affine cone inside a zoom window with congruence
conditions: streams, counts N_W / N_{W^o} / N_V, and the lattice bound.

The window lives in the t0 != 0 chart: a point qualifies when F(x) = 0,
x ≡ Γ mod L, max_i |t_i| ≤ B, and R t_j / t0 lies in the box for j ≥ 2.
Two enumerators are provided. The naive one scans an x-box derived from the
frame and filters every predicate; the zoom-aware one walks t0, intersects
each reduced axis with its exact window range, and solves the conjugate
coordinate from F = 0 by exact division. Counting for identity frames with a
diagonal three-variable reduced form runs on a compiled kernel that replaces
the innermost axis by a counting table of square residues mod t0·L.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .forms import (OutsideChartError, WittFrame, ZoomSpec, height,
                    zoom_contains)
from .modarith import moebius, mod_inverse
from .util import check_budget, parse_rational

try:
    import numba
    from numba import njit, prange
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

SAMPLE_CAP = 1000


@dataclass(frozen=True)
class AdelicWindow:
    frame: WittFrame
    zoom: ZoomSpec
    L: int
    residue: tuple

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be a positive integer")
        res = tuple(int(v) % self.L for v in self.residue)
        if len(res) != self.frame.nvars:
            raise ValueError("residue dimension mismatch")
        if self.frame.form.evaluate(res) % self.L != 0:
            raise ValueError("residue must lie on the cone mod L")
        object.__setattr__(self, "residue", res)

    def with_residue(self, res: Sequence[int]) -> "AdelicWindow":
        return AdelicWindow(self.frame, self.zoom, self.L, tuple(res))

    def residue_is_primitive(self) -> bool:
        g = self.L
        for v in self.residue:
            g = math.gcd(g, v)
        return g == 1


@dataclass(frozen=True)
class CountResult:
    B: Fraction
    count: int
    enumerator: str
    points_sample: Optional[tuple] = None


def window_contains(window: AdelicWindow, x: Sequence[int], B) -> bool:
    """Post-hoc check of every window predicate for a candidate point."""
    B = parse_rational(B)
    x = tuple(int(v) for v in x)
    if all(v == 0 for v in x):
        return False
    if window.frame.form.evaluate(x) != 0:
        return False
    if any((v - r) % window.L for v, r in zip(x, window.residue)):
        return False
    t = window.frame.t_coords(x)
    if t[0] == 0:
        return False
    if max(abs(Fraction(v)) for v in t) > B:
        return False
    return zoom_contains(window.frame, window.zoom, x)


# ----- naive enumerator -----

def _hyperbolic_shape(window: AdelicWindow) -> Optional[int]:
    """Coefficient a01 when the raw form is a01*x0*x1 + F2(x2..xn)."""
    a = window.frame.form.doubled_gram
    n = len(a)
    if n < 3 or a[0][1] == 0 or a[0][0] or a[1][1]:
        return None
    if any(a[0][j] or a[1][j] for j in range(2, n)):
        return None
    return a[0][1]


def _naive_bounds(window: AdelicWindow, B: Fraction) -> list[int]:
    minv = window.frame.matrix_inv
    n = len(minv)
    return [math.floor(B * sum(abs(Fraction(minv[i][j])) for j in range(n)))
            for i in range(n)]


def _tail_eval(a, x: tuple) -> int:
    n = len(a)
    s = 0
    for i in range(2, n):
        s += (a[i][i] // 2) * x[i - 2] * x[i - 2]
        for j in range(i + 1, n):
            s += a[i][j] * x[i - 2] * x[j - 2]
    return s


def _naive_points(window: AdelicWindow, B: Fraction,
                  budget: int | None = None) -> list[tuple]:
    bounds = _naive_bounds(window, B)
    n = len(bounds)
    a01 = _hyperbolic_shape(window)
    out = []
    if a01 is not None:
        check_budget(math.prod(2 * b + 1 for b in bounds[2:])
                     + (2 * bounds[0] + 1) * (2 * bounds[1] + 1),
                     budget, "naive enumeration")
        a = window.frame.form.doubled_gram
        table: dict[int, list[tuple]] = {}
        for tail in itertools.product(*[range(-b, b + 1) for b in bounds[2:]]):
            table.setdefault(_tail_eval(a, tail), []).append(tail)
        for x0 in range(-bounds[0], bounds[0] + 1):
            for x1 in range(-bounds[1], bounds[1] + 1):
                for tail in table.get(-a01 * x0 * x1, ()):
                    x = (x0, x1) + tail
                    if window_contains(window, x, B):
                        out.append(x)
    else:
        check_budget(math.prod(2 * b + 1 for b in bounds), budget,
                     "naive enumeration")
        for x in itertools.product(*[range(-b, b + 1) for b in bounds]):
            if window_contains(window, x, B):
                out.append(x)
    return sorted(out)


# ----- zoom-aware enumerator -----

def _axis_values(window: AdelicWindow, j: int, t0: int, bint: int) -> range:
    lo, hi = window.zoom.int_range(j, t0)
    lo, hi = max(lo, -bint), min(hi, bint)
    r = window.residue[j + 2]
    lo += (r - lo) % window.L
    return range(lo, hi + 1, window.L)


def _zoom_points_one_sign(window: AdelicWindow, B: Fraction) -> list[tuple]:
    """Points with t0 > 0 for an identity frame."""
    frame = window.frame
    a = frame.form.doubled_gram
    lres = window.residue
    bint = math.floor(B)
    out = []
    for x0 in range(1, bint + 1):
        if (x0 - lres[0]) % window.L:
            continue
        axes = [_axis_values(window, j, x0, bint) for j in range(frame.nvars - 2)]
        for tail in itertools.product(*axes):
            s = _tail_eval(a, tail)
            if s % x0:
                continue
            x1 = -s // x0
            if abs(x1) > B or (x1 - lres[1]) % window.L:
                continue
            out.append((x0, x1) + tail)
    return out


def _zoom_points(window: AdelicWindow, B: Fraction) -> list[tuple]:
    if not window.frame.is_identity or _hyperbolic_shape(window) != 1:
        raise ValueError("zoom-aware enumeration needs an identity frame")
    pos = _zoom_points_one_sign(window, B)
    neg_res = tuple(-v % window.L for v in window.residue)
    neg = _zoom_points_one_sign(window.with_residue(neg_res), B)
    return sorted(pos + [tuple(-v for v in x) for x in neg])


# ----- compiled counting kernel (identity frame, diagonal 3-axis tail) -----

if _HAVE_NUMBA:
    @njit(cache=True)
    def _isqrt_floor(m):
        if m < 0:
            return -1
        t = int(math.sqrt(m))
        while t * t > m:
            t -= 1
        while (t + 1) * (t + 1) <= m:
            t += 1
        return t

    @njit(cache=True)
    def _seg_count(vals, a, b, u, v):
        """#elements of sorted vals[a:b] lying in the closed interval [u, v]."""
        lo_i, hi_i = a, b
        while lo_i < hi_i:
            mid = (lo_i + hi_i) // 2
            if vals[mid] < u:
                lo_i = mid + 1
            else:
                hi_i = mid
        left = lo_i
        lo_i, hi_i = a, b
        while lo_i < hi_i:
            mid = (lo_i + hi_i) // 2
            if vals[mid] <= v:
                lo_i = mid + 1
            else:
                hi_i = mid
        return lo_i - left

    @njit(cache=True, parallel=True)
    def _kernel_count(x0s, lo, hi, d2, d3, d4, L, g1, bint, exact_mask):
        total = 0
        for i in prange(len(x0s)):
            q = x0s[i]
            Q = q * L
            target = (-q * g1) % Q
            if target < 0:
                target += Q
            sub = 0
            if exact_mask[i]:
                table = np.zeros(Q, dtype=np.int64)
                for y2 in range(lo[i, 0], hi[i, 0] + 1, L):
                    r = (d2 * y2 * y2) % Q
                    if r < 0:
                        r += Q
                    table[r] += 1
                for y3 in range(lo[i, 1], hi[i, 1] + 1, L):
                    r3 = (d3 * y3 * y3) % Q
                    for y4 in range(lo[i, 2], hi[i, 2] + 1, L):
                        r = (target - r3 - d4 * y4 * y4) % Q
                        if r < 0:
                            r += Q
                        sub += table[r]
            else:
                # the |x1| <= B bound is active: index the first axis by the
                # residue of d2*y2^2 mod Q and resolve the bound by binary
                # search over |y2| in each residue class
                counts = np.zeros(Q + 1, dtype=np.int64)
                for y2 in range(lo[i, 0], hi[i, 0] + 1, L):
                    r = (d2 * y2 * y2) % Q
                    if r < 0:
                        r += Q
                    counts[r + 1] += 1
                offs = np.cumsum(counts)
                fill = offs[:Q].copy()
                vals = np.empty(offs[Q], dtype=np.int64)
                for y2 in range(lo[i, 0], hi[i, 0] + 1, L):
                    r = (d2 * y2 * y2) % Q
                    if r < 0:
                        r += Q
                    vals[fill[r]] = y2
                    fill[r] += 1
                smax = bint * q
                for y3 in range(lo[i, 1], hi[i, 1] + 1, L):
                    s3 = d3 * y3 * y3
                    for y4 in range(lo[i, 2], hi[i, 2] + 1, L):
                        s34 = s3 + d4 * y4 * y4
                        r = (target - s34) % Q
                        if r < 0:
                            r += Q
                        a, b = offs[r], offs[r + 1]
                        if a == b:
                            continue
                        # d2*y2^2 in [-smax - s34, smax - s34]
                        a1 = -smax - s34
                        a2 = smax - s34
                        if d2 > 0:
                            m1 = -(-a1 // d2)
                            m2 = a2 // d2
                        else:
                            m1 = -(-a2 // d2)
                            m2 = a1 // d2
                        if m1 < 0:
                            m1 = 0
                        if m2 < m1:
                            continue
                        v_hi = _isqrt_floor(m2)
                        if m1 == 0:
                            u_lo = 0
                        else:
                            u_lo = _isqrt_floor(m1 - 1) + 1
                        if u_lo > v_hi:
                            continue
                        if u_lo == 0:
                            sub += _seg_count(vals, a, b, -v_hi, v_hi)
                        else:
                            sub += _seg_count(vals, a, b, -v_hi, -u_lo)
                            sub += _seg_count(vals, a, b, u_lo, v_hi)
            total += sub
        return total



def _kernel_eligible(window: AdelicWindow) -> bool:
    if not _HAVE_NUMBA or not window.frame.is_identity:
        return False
    if _hyperbolic_shape(window) != 1 or window.frame.nvars != 5:
        return False
    return window.frame.f2_diagonal_int() is not None


def _kernel_count_one_sign(window: AdelicWindow, B: Fraction) -> int:
    d2, d3, d4 = window.frame.f2_diagonal_int()
    L = window.L
    res = window.residue
    bint = math.floor(B)
    x0s, los, his, exact = [], [], [], []
    for x0 in range(1, bint + 1):
        if (x0 - res[0]) % L:
            continue
        row_lo, row_hi = [], []
        smax = 0
        for j in range(3):
            rng = _axis_values(window, j, x0, bint)
            if len(rng) == 0:
                break
            row_lo.append(rng[0])
            row_hi.append(rng[-1])
            smax += abs((d2, d3, d4)[j]) * max(rng[0] ** 2, rng[-1] ** 2)
        else:
            x0s.append(x0)
            los.append(row_lo)
            his.append(row_hi)
            # solved coordinate bound |F2|/x0 <= B automatic?
            exact.append(smax <= B * x0)
    if not x0s:
        return 0
    return int(_kernel_count(
        np.array(x0s, dtype=np.int64),
        np.array(los, dtype=np.int64), np.array(his, dtype=np.int64),
        d2, d3, d4, L, res[1], bint,
        np.array(exact, dtype=np.bool_)))


def _kernel_total(window: AdelicWindow, B: Fraction) -> int:
    pos = _kernel_count_one_sign(window, B)
    neg_res = tuple(-v % window.L for v in window.residue)
    neg = _kernel_count_one_sign(window.with_residue(neg_res), B)
    return pos + neg


# ----- public counting API -----

def enumerate_cone_points(window: AdelicWindow, B, mode: str = "auto",
                          budget: int | None = None) -> list[tuple]:
    """Sorted list of the window's integer cone points of height <= B."""
    B = parse_rational(B)
    if B < 1:
        return []
    if mode == "naive":
        return _naive_points(window, B, budget)
    if mode == "zoom_aware":
        return _zoom_points(window, B)
    if mode != "auto":
        raise ValueError(f"unknown mode {mode!r}")
    if window.frame.is_identity and _hyperbolic_shape(window) == 1:
        return _zoom_points(window, B)
    return _naive_points(window, B, budget)


def count_NW(window: AdelicWindow, B, mode: str = "auto",
             sample: bool = False, budget: int | None = None) -> CountResult:
    B = parse_rational(B)
    if B < 1:
        return CountResult(B, 0, mode)
    if mode == "auto" and not sample and _kernel_eligible(window):
        return CountResult(B, _kernel_total(window, B), "zoom_aware")
    pts = enumerate_cone_points(window, B, mode, budget)
    used = mode if mode != "auto" else (
        "zoom_aware" if window.frame.is_identity
        and _hyperbolic_shape(window) == 1 else "naive")
    return CountResult(B, len(pts), used,
                       tuple(pts[:SAMPLE_CAP]) if sample else None)


def count_NWo(window: AdelicWindow, B, method: str = "mobius",
              mode: str = "auto", budget: int | None = None) -> CountResult:
    """Primitive-point count, by Moebius inversion or by direct filtering."""
    B = parse_rational(B)
    if not window.residue_is_primitive():
        raise ValueError("primitive counts need a residue class in W^o(Z/L)")
    if method == "direct":
        pts = [x for x in enumerate_cone_points(window, B, mode, budget)
               if math.gcd(*[abs(v) for v in x]) == 1]
        return CountResult(B, len(pts), "direct")
    if method != "mobius":
        raise ValueError(f"unknown method {method!r}")
    total = 0
    d = 1
    while d <= B:
        mu = moebius(d)
        if mu and math.gcd(d, window.L) == 1:
            dbar = mod_inverse(d, window.L)
            res = tuple(dbar * v % window.L for v in window.residue)
            total += mu * count_NW(window.with_residue(res), B / d,
                                   mode, budget=budget).count
        d += 1
    return CountResult(B, total, "mobius")


def count_NV(frame: WittFrame, zoom: ZoomSpec, L: int,
             Lambda: Sequence[int], B, method: str = "assembly",
             mode: str = "auto", budget: int | None = None) -> CountResult:
    """Projective count: primitive points mod +-1 in the congruence class
    of Lambda up to units."""
    B = parse_rational(B)
    lam = tuple(int(v) % L for v in Lambda)
    g = L
    for v in lam:
        g = math.gcd(g, v)
    if g != 1 or frame.form.evaluate(lam) % L != 0:
        raise ValueError("Lambda has no valid lift to the punctured cone mod L")
    if method == "direct":
        base = AdelicWindow(frame, zoom, 1, (0,) * frame.nvars)
        pts = [x for x in enumerate_cone_points(base, B, mode, budget)
               if math.gcd(*[abs(v) for v in x]) == 1]
        units = [u for u in range(L) if math.gcd(u, L) == 1]
        hits = [x for x in pts
                if any(all((v - u * w) % L == 0 for v, w in zip(x, lam))
                       for u in units)]
        if len(hits) % 2:
            raise AssertionError("unpaired primitive point in a +-symmetric window")
        return CountResult(B, len(hits) // 2, "direct")
    if method != "assembly":
        raise ValueError(f"unknown method {method!r}")
    total = 0
    for u in range(L) if L > 1 else [0]:
        if L > 1 and math.gcd(u, L) != 1:
            continue
        res = tuple(u * v % L for v in lam) if L > 1 else lam
        w = AdelicWindow(frame, zoom, L, res)
        total += count_NWo(w, B, "mobius", mode, budget).count
    if total % 2:
        raise AssertionError("odd assembly total in a +-symmetric window")
    return CountResult(B, total // 2, "assembly")


def lattice_upper_bound(n: int, B, R, L) -> Fraction:
    """1 + B^{n+1}/(L^{n+1} R^n) + sum_{k=1}^{n} B^k/(L^k R^{k-1})."""
    B, R, L = parse_rational(B), parse_rational(R), parse_rational(L)
    if B < 1 or R < 1 or L < 1:
        raise ValueError("bound needs B, R, L >= 1")
    val = 1 + B ** (n + 1) / (L ** (n + 1) * R**n)
    for k in range(1, n + 1):
        val += B**k / (L**k * R ** (k - 1))
    return val
