"""Projective distances to a rational base point, empirical approximation
constants, the repulsion inequality, and the explicit conic witness family.

Distances are exact rationals at every place: the real distance in the
t-chart is max_{i>=1} |t_i/t_0|, the p-adic one the corresponding maximum of
p-adic absolute values. The point sample for minima is the R = 1 zoom window
around the base point; any cone point outside it has real distance >= 1 and
therefore d^2 H >= 1, so window minima below 1 are true minima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .forms import OutsideChartError, WittFrame, ZoomSpec, height
from .enumeration import (AdelicWindow, _kernel_eligible,
                          enumerate_cone_points)

try:
    from numba import njit, prange
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


@dataclass(frozen=True)
class Place:
    kind: str  # real | prime
    p: Optional[int] = None

    def __post_init__(self):
        if self.kind == "real":
            if self.p is not None:
                raise ValueError("the real place takes no prime")
        elif self.kind == "prime":
            if self.p is None or self.p < 2:
                raise ValueError("prime place needs a prime p")
        else:
            raise ValueError(f"unknown place kind {self.kind!r}")


REAL = Place("real")


def place_of(spec) -> Place:
    if isinstance(spec, Place):
        return spec
    if spec in ("real", "oo", "inf"):
        return REAL
    return Place("prime", int(spec))


@dataclass(frozen=True)
class ApproxSample:
    point: tuple
    height: Fraction
    distance: Fraction


def _val_p(x: Fraction, p: int) -> int:
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has infinite valuation")
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def distance(frame: WittFrame, P: Sequence, place: Place) -> Fraction:
    """Projective distance from P to the frame's base point, exact."""
    t = frame.t_coords(P)
    if t[0] == 0:
        raise OutsideChartError("point outside the t0 != 0 chart")
    rest = [Fraction(v) for v in t[1:]]
    if all(v == 0 for v in rest):
        return Fraction(0)
    t0 = Fraction(t[0])
    if place.kind == "real":
        return max(abs(v / t0) for v in rest)
    p = place.p
    vmin = min(_val_p(v, p) for v in rest if v != 0)
    e = _val_p(t0, p) - vmin
    return Fraction(p) ** e


def sample_of(frame: WittFrame, x: Sequence[int], place: Place) -> ApproxSample:
    return ApproxSample(tuple(x), height(frame, x), distance(frame, x, place))


# ----- enumerated window sample -----

def _unit_window(frame: WittFrame, B) -> AdelicWindow:
    box = tuple(((-1, 1)) for _ in range(frame.nvars - 2))
    return AdelicWindow(frame, ZoomSpec(box, 1), 1, (0,) * frame.nvars)


def _sample_points(frame: WittFrame, B) -> list[tuple]:
    """Primitive points of the R = 1 window with t1 != 0, height <= B."""
    w = _unit_window(frame, B)
    out = []
    for x in enumerate_cone_points(w, B, "auto"):
        if math.gcd(*[abs(v) for v in x]) != 1:
            continue
        t = frame.t_coords(x)
        if t[1] == 0:
            continue
        out.append(x)
    return out


@dataclass(frozen=True)
class RepulsionResult:
    place: Place
    B: Fraction
    min_value: Optional[Fraction]
    argmin: Optional[tuple]
    n_points: int


if _HAVE_NUMBA:
    @njit(cache=True)
    def _gcd2(a, b):
        while b:
            a, b = b, a % b
        return a

    @njit(cache=True)
    def _valp(n, p):
        v = 0
        while n % p == 0:
            n //= p
            v += 1
        return v

    @njit(cache=True, parallel=True)
    def _approx_scan(bint, d2, d3, d4, pcode, gammas):
        """Per-x0 minima of d^2 H (as num/den) and of gamma*ln(d)+ln(H)
        over primitive window points with x1 != 0, plus argmins."""
        nb = bint
        ng = len(gammas)
        min_num = np.full(nb + 1, -1, dtype=np.int64)
        min_den = np.ones(nb + 1, dtype=np.int64)
        args = np.zeros((nb + 1, 5), dtype=np.int64)
        gmin = np.full((nb + 1, ng), np.inf)
        for x0 in prange(1, nb + 1):
            for y2 in range(-x0, x0 + 1):
                g2 = _gcd2(x0, abs(y2))
                s2 = d2 * y2 * y2
                for y3 in range(-x0, x0 + 1):
                    g3 = _gcd2(g2, abs(y3))
                    s3 = s2 + d3 * y3 * y3
                    for y4 in range(-x0, x0 + 1):
                        s = s3 + d4 * y4 * y4
                        if s % x0:
                            continue
                        x1 = -(s // x0)
                        if x1 == 0 or x1 > nb or -x1 > nb:
                            continue
                        if g3 > 1 and _gcd2(_gcd2(g3, abs(x1)), abs(y4)) > 1:
                            continue
                        ax1 = abs(x1)
                        h = x0 if x0 >= ax1 else ax1
                        m = ax1
                        for v in (abs(y2), abs(y3), abs(y4)):
                            if v > m:
                                m = v
                        if pcode == 0:
                            num = m * m * h
                            den = x0 * x0
                            dval = m / x0
                        else:
                            vmin = _valp(ax1, pcode)
                            for v in (abs(y2), abs(y3), abs(y4)):
                                if v != 0:
                                    w = _valp(v, pcode)
                                    if w < vmin:
                                        vmin = w
                            e = _valp(x0, pcode) - vmin
                            if e >= 0:
                                num = pcode ** (2 * e) * h
                                den = 1
                            else:
                                num = h
                                den = pcode ** (-2 * e)
                            dval = float(pcode) ** e
                        if (min_num[x0] < 0
                                or num * min_den[x0] < min_num[x0] * den):
                            min_num[x0] = num
                            min_den[x0] = den
                            args[x0, 0] = x0
                            args[x0, 1] = x1
                            args[x0, 2] = y2
                            args[x0, 3] = y3
                            args[x0, 4] = y4
                        if ng:
                            ld = math.log(dval)
                            lh = math.log(float(h))
                            for k in range(ng):
                                lv = gammas[k] * ld + lh
                                if lv < gmin[x0, k]:
                                    gmin[x0, k] = lv
        return min_num, min_den, args, gmin


def _scan_eligible(frame: WittFrame) -> bool:
    return (_HAVE_NUMBA and frame.is_identity and frame.nvars == 5
            and frame.f2_diagonal_int() is not None
            and frame.form.doubled_gram[0][1] == 1)


def _fast_scan(frame: WittFrame, place: Place, bint: int, gammas):
    d2, d3, d4 = frame.f2_diagonal_int()
    pcode = 0 if place.kind == "real" else place.p
    g = np.asarray(gammas, dtype=np.float64)
    nums, dens, args, gmin = _approx_scan(bint, d2, d3, d4, pcode, g)
    best = None
    arg = None
    total_rows = 0
    for x0 in range(1, bint + 1):
        if nums[x0] < 0:
            continue
        total_rows += 1
        v = Fraction(int(nums[x0]), int(dens[x0]))
        if best is None or v < best:
            best = v
            arg = tuple(int(c) for c in args[x0])
    gout = np.exp(np.min(gmin[1:], axis=0)) if bint >= 1 else None
    return best, arg, gout


def repulsion_min(frame: WittFrame, place, B) -> RepulsionResult:
    """Minimum of d^2 H over the window sample, exclusions per the
    regular-locus definition (points with t1 = 0 are outside it)."""
    place = place_of(place)
    B = Fraction(B)
    bint = math.floor(B)
    if _scan_eligible(frame) and bint >= 1:
        best, arg, _ = _fast_scan(frame, place, bint, ())
        return RepulsionResult(place, B, best, arg, -1)
    pts = _sample_points(frame, B)
    best, arg = None, None
    for x in pts:
        d = distance(frame, x, place)
        v = d * d * height(frame, x)
        if best is None or v < best:
            best, arg = v, x
    return RepulsionResult(place, B, best, arg, len(pts))


@dataclass(frozen=True)
class AlphaRow:
    gamma: float
    minima: tuple  # (B, min value) pairs
    slope: float
    verdict: str  # shrinking | bounded-away


@dataclass(frozen=True)
class AlphaTable:
    place: Place
    rows: tuple
    bracket: tuple  # (gamma_lo, gamma_hi)


SHRINK_SLOPE = -0.1


def alpha_empirical(frame: WittFrame, place, gamma_grid: Sequence[float],
                    B_schedule: Sequence[int]) -> AlphaTable:
    """Track min d^gamma H over the window sample along a height schedule;
    a grid value is called shrinking when the log-log slope is below -0.1.
    The alpha bracket is the crossover interval, never a point estimate."""
    place = place_of(place)
    gammas = sorted(float(g) for g in gamma_grid)
    schedule = sorted(int(b) for b in B_schedule)
    if not gammas or not schedule:
        raise ValueError("need nonempty gamma grid and height schedule")
    per_b = []
    for b in schedule:
        if _scan_eligible(frame):
            _, _, gout = _fast_scan(frame, place, b, gammas)
            per_b.append([float(v) for v in gout])
        else:
            pts = _sample_points(frame, b)
            samples = [(float(distance(frame, x, place)),
                        float(height(frame, x))) for x in pts]
            per_b.append([min((d**g * h for d, h in samples),
                              default=float("inf")) for g in gammas])
    rows = []
    logb = np.log(np.array(schedule, dtype=np.float64))
    for k, g in enumerate(gammas):
        mins = [per_b[i][k] for i in range(len(schedule))]
        finite = [m for m in mins if math.isfinite(m)]
        if len(finite) == len(mins) and len(mins) >= 2:
            slope = float(np.polyfit(logb, np.log(np.array(mins)), 1)[0])
        else:
            slope = float("nan")
        verdict = ("shrinking" if math.isfinite(slope)
                   and slope <= SHRINK_SLOPE else "bounded-away")
        rows.append(AlphaRow(g, tuple(zip(schedule, mins)), slope, verdict))
    lo = None
    hi = None
    for row in rows:
        if row.verdict == "bounded-away":
            lo = row.gamma
        elif hi is None:
            hi = row.gamma
    bracket = (lo if lo is not None else gammas[0],
               hi if hi is not None else gammas[-1])
    return AlphaTable(place, tuple(rows), bracket)


def conic_witness(frame: WittFrame, k_max: int,
                  direction: Optional[Sequence[int]] = None) -> list[tuple]:
    """P_k = (k^2, -F2(v), k*v) for an integer direction with F2(v) != 0;
    each lies on the cone with d ~ 1/k and H ~ k^2."""
    m = frame.nvars - 2
    if direction is None:
        for i in range(m):
            v = tuple(int(i == j) for j in range(m))
            if frame.f2_evaluate(v) != 0:
                direction = v
                break
        else:
            raise ValueError("no unit direction with F2 != 0")
    v = tuple(int(c) for c in direction)
    f2v = frame.f2_evaluate(v)
    if f2v == 0 or f2v.denominator != 1:
        raise ValueError("direction must have nonzero integer F2 value")
    out = []
    for k in range(1, k_max + 1):
        out.append((k * k, -int(f2v)) + tuple(k * c for c in v))
    return out
