"""Counting zeros of F modulo prime powers and the local density zoo.

Counts N(m) = #{x mod m : F(x) = 0 mod m} are computed either by direct
enumeration or by convolving the value distributions of the form's
independent pieces (connected components of the Gram graph, each in one or
two variables). Cone densities handle the non-primitive stratum through the
exact recursion: vectors divisible by p at level k are p^{n+1} copies of
level k-2, so the limit density is assembled from the stabilized
primitive-stratum density b* as b* / (1 - p^{1-n}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .forms import QuadraticForm
from .modarith import euler_phi, factorize, moebius
from .util import BudgetError, check_budget

_CONV_INT64_LIMIT = 2**62


@dataclass(frozen=True)
class ValueDistribution:
    modulus: int
    counts: tuple  # counts[r] = #inputs with piece value = r mod modulus

    @property
    def domain_size(self) -> int:
        return sum(self.counts)


def _pieces(form: QuadraticForm) -> Optional[list[tuple]]:
    """Split variables into connected components of the Gram graph;
    components of size 1 or 2 support convolution counting."""
    n = form.nvars
    a = form.doubled_gram
    seen = [False] * n
    pieces = []
    for i in range(n):
        if seen[i]:
            continue
        comp = [i]
        seen[i] = True
        stack = [i]
        while stack:
            u = stack.pop()
            for v in range(n):
                if not seen[v] and a[u][v] != 0:
                    seen[v] = True
                    comp.append(v)
                    stack.append(v)
        if len(comp) > 2:
            return None
        pieces.append(tuple(sorted(comp)))
    return pieces


def _piece_values(form: QuadraticForm, piece: tuple, m: int,
                  residues: Optional[tuple] = None, step: int = 1) -> np.ndarray:
    """Array of piece values mod m over inputs x_i = residues_i mod step."""
    a = form.doubled_gram
    if residues is None:
        residues = (0,) * len(piece)
        step = 1
    rngs = [np.arange(r % step, m, step, dtype=np.int64) for r in residues]
    if len(piece) == 1:
        i = piece[0]
        x = rngs[0]
        vals = (a[i][i] // 2) * x * x
    else:
        i, j = piece
        x = rngs[0][:, None]
        y = rngs[1][None, :]
        vals = (a[i][i] // 2) * x * x + a[i][j] * x * y + (a[j][j] // 2) * y * y
        vals = vals.reshape(-1)
    return vals % m


def value_distribution(form: QuadraticForm, piece: Sequence[int], m: int,
                       budget: int | None = None) -> ValueDistribution:
    piece = tuple(sorted(int(i) for i in piece))
    if len(piece) not in (1, 2):
        raise ValueError("pieces must have one or two variables")
    check_budget(m ** len(piece), budget, "value distribution")
    vals = _piece_values(form, piece, m)
    counts = np.bincount(vals, minlength=m)
    return ValueDistribution(m, tuple(int(c) for c in counts))


def _cyclic_convolve(a: list[int], b: list[int], m: int) -> list[int]:
    if max(a, default=0) * max(b, default=0) * min(len(a), len(b)) < _CONV_INT64_LIMIT:
        lin = np.convolve(np.array(a, dtype=np.int64), np.array(b, dtype=np.int64))
        out = np.zeros(m, dtype=np.int64)
        for start in range(0, len(lin), m):
            seg = lin[start:start + m]
            out[:len(seg)] += seg
        return [int(v) for v in out]
    out = [0] * m
    for s, av in enumerate(a):
        if av:
            for t, bv in enumerate(b):
                if bv:
                    out[(s + t) % m] += av * bv
    return out


def count_zeros_mod(form: QuadraticForm, m: int,
                    constraint: Optional[tuple] = None,
                    method: str = "auto", budget: int | None = None) -> int:
    """#{x mod m : F(x) = 0 mod m, x = lam mod d} with constraint = (d, lam).

    method: "auto" (convolution when the form decomposes), "convolution",
    or "direct" (enumeration oracle).
    """
    if m < 1:
        raise ValueError("modulus must be positive")
    d, lam = (1, (0,) * form.nvars) if constraint is None else constraint
    d = int(d)
    if d < 1 or m % d != 0:
        raise ValueError("constraint modulus must divide m")
    lam = tuple(int(v) % d for v in lam)
    if m == 1:
        return 1

    pieces = _pieces(form) if method in ("auto", "convolution") else None
    if method == "convolution" and pieces is None:
        raise ValueError("form does not decompose into small pieces")

    if method == "direct" or pieces is None:
        return _count_direct(form, m, d, lam, budget)

    acc = None
    for piece in pieces:
        check_budget((m // d) ** len(piece), budget, "piece distribution")
        vals = _piece_values(form, piece, m, tuple(lam[i] for i in piece), d)
        counts = [int(c) for c in np.bincount(vals, minlength=m)]
        acc = counts if acc is None else _cyclic_convolve(acc, counts, m)
    return acc[0]


def _count_direct(form: QuadraticForm, m: int, d: int, lam: tuple,
                  budget: int | None = None) -> int:
    nv = form.nvars
    per_axis = m // d
    check_budget(per_axis**nv, budget, "direct zero count")
    axes = [np.arange(lam[i] % d, m, d, dtype=np.int64) for i in range(nv)]
    # accumulate F chunked over the first axis
    rest = np.stack([g.reshape(-1) for g in np.meshgrid(*axes[1:], indexing="ij")]) \
        if nv > 1 else np.zeros((0, 1), dtype=np.int64)
    a = form.doubled_gram
    tail = np.zeros(rest.shape[1], dtype=np.int64)
    for i in range(1, nv):
        if a[i][i]:
            tail = tail + (a[i][i] // 2) * rest[i - 1] * rest[i - 1]
        for j in range(i + 1, nv):
            if a[i][j]:
                tail = tail + a[i][j] * rest[i - 1] * rest[j - 1]
    lin = np.zeros(rest.shape[1], dtype=np.int64)
    for j in range(1, nv):
        if a[0][j]:
            lin = lin + a[0][j] * rest[j - 1]
    total = 0
    c00 = a[0][0] // 2
    for x0 in axes[0]:
        x0 = int(x0)
        total += int(np.count_nonzero((c00 * x0 * x0 + x0 * lin + tail) % m == 0))
    return total


# ----- densities -----

@dataclass(frozen=True)
class DensityValue:
    p: int
    density: Fraction
    stabilized_at: int
    constraint: Optional[tuple] = None


def _ordp(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def _primitive_count(form: QuadraticForm, p: int, k: int,
                     budget: int | None = None) -> int:
    """#{x mod p^k primitive : F(x) = 0 mod p^k}."""
    n1 = form.nvars
    total = count_zeros_mod(form, p**k, budget=budget)
    if k == 1:
        return total - 1
    return total - p**n1 * count_zeros_mod(form, p ** (k - 2), budget=budget)


def _stab_primitive_density(form: QuadraticForm, p: int, k_max: int,
                            budget: int | None = None) -> tuple[Fraction, int]:
    """Stabilized primitive-stratum density b* = Nprim(p^k)/p^{nk}."""
    n = form.nvars - 1
    if p != 2 and form.det_doubled % p != 0:
        # smooth reduction: every mod-p zero lifts, so level 1 is exact
        return Fraction(count_zeros_mod(form, p, budget=budget) - 1, p**n), 1
    prev = None
    for k in range(1, k_max + 1):
        b = Fraction(_primitive_count(form, p, k, budget), p ** (n * k))
        if prev is not None and b == prev:
            return b, k - 1
        prev = b
    raise BudgetError(f"primitive density did not stabilize mod {p}^{k_max}")


def sigma_p_W(form: QuadraticForm, p: int, L: int = 1,
              Gamma: Optional[Sequence[int]] = None, k_max: int = 12,
              budget: int | None = None) -> DensityValue:
    """Cone density: lim_k #{x mod p^k : F(x)=0, x=Gamma mod p^{m_p}} / p^{nk}."""
    n = form.nvars - 1
    m_p = _ordp(L, p)
    if m_p == 0 or Gamma is None:
        bstar, level = _stab_primitive_density(form, p, k_max, budget)
        dens = bstar / (1 - Fraction(1, p ** (n - 1)))
        return DensityValue(p, dens, level)
    lam = tuple(int(v) % p**m_p for v in Gamma)
    if all(v % p == 0 for v in lam):
        # non-primitive residue class: peel one factor of p off the class
        inner = sigma_p_W(form, p, p ** (m_p - 1),
                          tuple(v // p for v in lam), k_max, budget)
        prim = _stab_constrained(form, p, m_p, lam, k_max, budget,
                                 primitive_only=True)
        dens = prim[0] + inner.density / p ** (n - 1)
        return DensityValue(p, dens, max(prim[1], inner.stabilized_at),
                            (p**m_p, lam))
    val, level = _stab_constrained(form, p, m_p, lam, k_max, budget)
    return DensityValue(p, val, level, (p**m_p, lam))


def _stab_constrained(form: QuadraticForm, p: int, m_p: int, lam: tuple,
                      k_max: int, budget: int | None = None,
                      primitive_only: bool = False) -> tuple[Fraction, int]:
    n = form.nvars - 1
    n1 = form.nvars
    prev = None
    for k in range(m_p, k_max + 1):
        cnt = count_zeros_mod(form, p**k, (p**m_p, lam), budget=budget)
        if primitive_only:
            # subtract the x = p*y stratum inside the class (class is = 0 mod p)
            if k >= 2:
                sub = count_zeros_mod(form, p ** (k - 2),
                                      (p ** max(m_p - 1, 0),
                                       tuple(v // p for v in lam)),
                                      budget=budget) if k - 2 >= max(m_p - 1, 0) \
                    else None
                if sub is None:
                    prev = None
                    continue
                cnt -= p**n1 * sub
            else:
                cnt -= 1 if all(v == 0 for v in lam) else 0
        dens = Fraction(cnt, p ** (n * k))
        if prev is not None and dens == prev:
            return dens, k - 1
        prev = dens
    raise BudgetError(f"constrained density did not stabilize mod {p}^{k_max}")


def sigma_p_V(form: QuadraticForm, p: int, L: int = 1,
              Lambda: Optional[Sequence[int]] = None, k_max: int = 12,
              budget: int | None = None) -> DensityValue:
    """Projective density: primitive vectors mod p^k, counted modulo units."""
    m_p = _ordp(L, p)
    if m_p == 0 or Lambda is None:
        bstar, level = _stab_primitive_density(form, p, k_max, budget)
        return DensityValue(p, bstar / (1 - Fraction(1, p)), level)
    lam = tuple(int(v) % p**m_p for v in Lambda)
    if all(v % p == 0 for v in lam):
        raise ValueError("projective constraint class must be primitive mod p")
    pm = p**m_p
    n = form.nvars - 1
    prev = None
    units = [u for u in range(pm) if u % p != 0]
    for k in range(m_p, k_max + 1):
        cnt = sum(count_zeros_mod(form, p**k,
                                  (pm, tuple(u * v % pm for v in lam)),
                                  budget=budget) for u in units)
        dens = Fraction(cnt * p, p ** (n * k) * (p - 1))
        if prev is not None and dens == prev:
            return DensityValue(p, dens, k - 1, (pm, lam))
        prev = dens
    raise BudgetError(f"projective density did not stabilize mod {p}^{k_max}")


def count_V_Fp(form: QuadraticForm, p: int, budget: int | None = None) -> int:
    """Projective point count over F_p at a prime of good reduction."""
    if p == 2 or form.det_doubled % p == 0:
        raise ValueError("bad reduction prime")
    n_affine = count_zeros_mod(form, p, method="auto", budget=budget)
    return (n_affine - 1) // (p - 1)


def trace_formula_count(form: QuadraticForm, p: int) -> tuple[int, int]:
    """(base term, measured sign): (p^n-1)/(p-1) plus sign*p^{(n-1)/2} for odd n."""
    n = form.nvars - 1
    base = (p**n - 1) // (p - 1)
    actual = count_V_Fp(form, p)
    if n % 2 == 0:
        return base, 0
    dev = actual - base
    half = p ** ((n - 1) // 2)
    if dev == half:
        return base, 1
    if dev == -half:
        return base, -1
    raise AssertionError("trace formula deviation is not +-p^{(n-1)/2}")


# ----- singular series and Tamagawa products -----

@dataclass(frozen=True)
class SeriesValue:
    value: Fraction
    cutoff: int
    factors: tuple  # DensityValue per prime <= cutoff
    note: str = ""


def _primes_upto(x: int) -> list[int]:
    sieve = np.ones(x + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(x**0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return [int(i) for i in np.nonzero(sieve)[0]]


def singular_series(form: QuadraticForm, L: int = 1,
                    Gamma: Optional[Sequence[int]] = None,
                    prime_cutoff: int = 100, k_max: int = 12,
                    budget: int | None = None) -> SeriesValue:
    """Truncated Euler product of cone densities, exact per factor."""
    factors = []
    value = Fraction(1)
    for p in _primes_upto(prime_cutoff):
        g = Gamma if L % p == 0 else None
        dv = sigma_p_W(form, p, L, g, k_max, budget)
        factors.append(dv)
        value *= dv.density
    return SeriesValue(value, prime_cutoff, tuple(factors),
                       note=f"Euler product truncated at p <= {prime_cutoff}")


def finite_tamagawa(form: QuadraticForm, L: int = 1,
                    Lambda: Optional[Sequence[int]] = None,
                    prime_cutoff: int = 100, k_max: int = 12,
                    budget: int | None = None) -> SeriesValue:
    """Truncated product of (1 - 1/p) * sigma_p(V), constrained at p | L."""
    factors = []
    value = Fraction(1)
    for p in _primes_upto(prime_cutoff):
        lam = Lambda if L % p == 0 else None
        dv = sigma_p_V(form, p, L, lam, k_max, budget)
        factors.append(dv)
        value *= (1 - Fraction(1, p)) * dv.density
    return SeriesValue(value, prime_cutoff, tuple(factors),
                       note=f"Tamagawa product truncated at p <= {prime_cutoff}")


# ----- the series identity -----

@dataclass(frozen=True)
class SeriesCheckReport:
    partial_sum: Fraction
    product_value: Fraction
    rel_diff: float
    X: int
    tail_note: str
    local_sums: dict = field(default_factory=dict)  # (p, t) -> Fraction
    partial_history: tuple = ()


def local_sum_table(form: QuadraticForm, L: int, lam: Sequence[int], X: int,
                    budget: int | None = None) -> dict:
    """S_{p^t}(0) for all p <= X and p^t <= X (plus t = 0 entries at p | L),
    from the finite-level counting identity: the partial sums over t <= k
    telescope the constrained zero counts mod p^{k+2m_p}."""
    n = form.nvars - 1
    table: dict[tuple[int, int], Fraction] = {}
    primes = set(_primes_upto(X))
    for p, _ in factorize(L) if L > 1 else []:
        primes.add(p)
    for p in sorted(primes):
        m_p = _ordp(L, p)
        t_max = 0
        while p ** (t_max + 1) <= X:
            t_max += 1
        lam_p = tuple(int(v) % p**m_p for v in lam) if m_p else (0,) * form.nvars
        prev = None
        for k in range(0, t_max + 1):
            cnt = count_zeros_mod(form, p ** (k + 2 * m_p),
                                  (p**m_p, lam_p) if m_p else None,
                                  budget=budget)
            a_k = Fraction(cnt * p ** (2 * n * m_p), p ** (n * (k + 2 * m_p)))
            if k == 0:
                table[(p, 0)] = a_k
            else:
                table[(p, k)] = p ** ((n + 1) * k) * (a_k - prev)
            prev = a_k
    return table


def singser_identity_check(form: QuadraticForm, L: int, lam: Sequence[int],
                           X: int, k_max: int = 12,
                           budget: int | None = None,
                           checkpoints: Sequence[int] = ()) -> SeriesCheckReport:
    n = form.nvars - 1
    table = local_sum_table(form, L, lam, X, budget)
    lfac = {p for p, _ in factorize(L)} if L > 1 else set()

    def s_q0(q: int) -> Fraction:
        val = Fraction(1)
        seen = set()
        for p, e in factorize(q) if q > 1 else []:
            val *= table[(p, e)]
            seen.add(p)
        for p in lfac - seen:
            val *= table[(p, 0)]
        return val

    partial = Fraction(0)
    history = []
    marks = sorted(set(checkpoints) | {X})
    for q in range(1, X + 1):
        partial += s_q0(q) / q ** (n + 1)
        if q in marks:
            history.append((q, partial))
    series = singular_series(form, L, tuple(lam), prime_cutoff=X,
                             k_max=k_max, budget=budget)
    product = L ** (2 * n) * series.value
    rel = float(abs(partial - product) / abs(product)) if product else float("inf")
    return SeriesCheckReport(
        partial, product, rel, X,
        tail_note=f"expected tail decay ~ X^{(3 - n) / 2:g} at X = {X}",
        local_sums=table, partial_history=tuple(history))
