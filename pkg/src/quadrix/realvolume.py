"""Archimedean densities: the singular integral of a zoom window, the real
Tamagawa measure, and the expected main term of the counting function."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .forms import WittFrame, ZoomSpec
from .localdensities import SeriesValue, finite_tamagawa, singular_series


@dataclass(frozen=True)
class RealMeasureValue:
    value: float
    method: str  # closed_form | quadrature
    est_error: float
    exact: Optional[Fraction] = None


def _integrand(y: Sequence[float], power: int) -> float:
    m = max(1.0, max(abs(v) for v in y))
    return m ** (-power)


def _simpson_cell(f, lo, hi, dim: int) -> float:
    """Tensor Simpson rule on one cell."""
    vol = math.prod(h - a for a, h in zip(lo, hi))
    if vol == 0.0:
        return 0.0
    nodes = [(a, 0.5 * (a + h), h) for a, h in zip(lo, hi)]
    weights = (1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0)
    total = 0.0
    idx = [0] * dim
    while True:
        w = 1.0
        pt = []
        for d in range(dim):
            w *= weights[idx[d]]
            pt.append(nodes[d][idx[d]])
        total += w * f(pt)
        d = 0
        while d < dim:
            idx[d] += 1
            if idx[d] < 3:
                break
            idx[d] = 0
            d += 1
        else:
            break
    return total * vol


MAX_CELLS = 4000


def _children(lo, hi, dim: int):
    mids = [0.5 * (a + h) for a, h in zip(lo, hi)]
    for corner in range(1 << dim):
        clo, chi = [], []
        for d in range(dim):
            if corner >> d & 1:
                clo.append(mids[d])
                chi.append(hi[d])
            else:
                clo.append(lo[d])
                chi.append(mids[d])
        yield clo, chi


def _cell_estimate(f, lo, hi, dim: int) -> tuple[float, float]:
    """One-level Richardson pair: refined value and error estimate."""
    coarse = _simpson_cell(f, lo, hi, dim)
    fine = sum(_simpson_cell(f, clo, chi, dim)
               for clo, chi in _children(lo, hi, dim))
    return fine, abs(fine - coarse)


def _adaptive_region(f, cells, dim: int, tol: float,
                     max_cells: int = MAX_CELLS) -> tuple[float, float]:
    """Worst-cell-first refinement with a deterministic heap order."""
    import heapq
    heap = []
    serial = 0
    for lo, hi in cells:
        v, e = _cell_estimate(f, lo, hi, dim)
        heapq.heappush(heap, (-e, serial, v, lo, hi))
        serial += 1
    while len(heap) < max_cells:
        total_err = sum(-item[0] for item in heap)
        if total_err <= tol:
            break
        nege, _, val, lo, hi = heapq.heappop(heap)
        if -nege == 0.0:
            heapq.heappush(heap, (nege, serial, val, lo, hi))
            serial += 1
            break
        for clo, chi in _children(lo, hi, dim):
            v, e = _cell_estimate(f, clo, chi, dim)
            heapq.heappush(heap, (-e, serial, v, clo, chi))
            serial += 1
    total = math.fsum(item[2] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return total, err


def singular_integral(frame: WittFrame, zoom: ZoomSpec,
                      tol: float = 1e-8) -> RealMeasureValue:
    """I_R over the window. Exact once the scaled box sits inside the unit
    cube; adaptive quadrature otherwise."""
    n = frame.nvars - 1
    detm = frame.det_m()
    r = zoom.radius
    if zoom.volume() == 0:
        return RealMeasureValue(0.0, "closed_form", 0.0, Fraction(0))
    if r >= zoom.corner_max:
        exact = 2 * zoom.volume() / ((n - 1) * detm * r ** (n - 1))
        return RealMeasureValue(float(exact), "closed_form", 0.0, exact)
    # integrate over y in box / R with the height weight active
    dim = n - 1
    lo = [float(a / r) for a, _ in zoom.box]
    hi = [float(b / r) for _, b in zoom.box]
    # split at the unit-cube breakpoints so each cell is smooth across them
    cuts = []
    for d in range(dim):
        pts = {lo[d], hi[d]}
        for c in (-1.0, 1.0):
            if lo[d] < c < hi[d]:
                pts.add(c)
        cuts.append(sorted(pts))
    f = lambda y: _integrand(y, n - 2)
    cells = []
    idx = [0] * dim
    while True:
        cells.append(([cuts[d][idx[d]] for d in range(dim)],
                      [cuts[d][idx[d] + 1] for d in range(dim)]))
        d = 0
        while d < dim:
            idx[d] += 1
            if idx[d] < len(cuts[d]) - 1:
                break
            idx[d] = 0
            d += 1
        else:
            break
    total, err = _adaptive_region(f, cells, dim, tol)
    scale = 2.0 / ((n - 1) * float(detm))
    return RealMeasureValue(scale * total, "quadrature", scale * err)


def real_tamagawa(frame: WittFrame, zoom: ZoomSpec,
                  tol: float = 1e-8) -> RealMeasureValue:
    base = singular_integral(frame, zoom, tol)
    n = frame.nvars - 1
    scale = Fraction(n - 1, 2)
    return RealMeasureValue(float(scale) * base.value, base.method,
                            float(scale) * base.est_error,
                            None if base.exact is None else scale * base.exact)


@dataclass(frozen=True)
class MainTermValue:
    quadric: float
    cone: float
    I_R: float
    omega_real: float
    omega_finite: Fraction
    series_cone: Fraction
    note: str


def main_term(frame: WittFrame, zoom: ZoomSpec, L: int,
              Lambda: Sequence[int], B, prime_cutoff: int = 100,
              k_max: int = 12, budget: int | None = None) -> MainTermValue:
    """Expected counts: (B^{n-1}/(n-1)) * omega_R * omega_f for the quadric
    and B^{n-1} * I_R * (cone singular series) for the cone."""
    n = frame.nvars - 1
    B = Fraction(B)
    lam = tuple(int(v) % L for v in Lambda) if L > 1 else tuple(Lambda)
    sint = singular_integral(frame, zoom)
    omega_r = Fraction(n - 1, 2) * (sint.exact if sint.exact is not None
                                    else Fraction(sint.value))
    fin = finite_tamagawa(frame.form, L, lam if L > 1 else None,
                          prime_cutoff, k_max, budget)
    ser = singular_series(frame.form, L, lam if L > 1 else None,
                          prime_cutoff, k_max, budget)
    quadric = float(B ** (n - 1) / (n - 1) * omega_r * fin.value)
    cone = float(B ** (n - 1) * (sint.exact if sint.exact is not None
                                 else Fraction(sint.value)) * ser.value)
    return MainTermValue(quadric, cone, sint.value, float(omega_r),
                         fin.value, ser.value, fin.note)
