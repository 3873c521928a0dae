"""Twisted quadratic exponential sums: direct evaluation, the coprime
CRT factorization into two factors, and the Gauss-sum closed form.

The inner sum over units a is always a Ramanujan sum once the constrained
summation variable is fixed, so every direct evaluator accumulates exact
integer weights per phase residue and only converts to complex at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .forms import DualForm, QuadraticForm, dual_form
from .modarith import (e_q, gauss_sum_closed, jacobi, mod_inverse,
                       ramanujan_sum)
from .util import check_budget, csum


@dataclass(frozen=True)
class ExpSumInput:
    form: QuadraticForm
    q: int
    L: int
    lam: tuple
    c: tuple

    def __post_init__(self):
        nv = self.form.nvars
        if self.q < 1 or self.L < 1:
            raise ValueError("q and L must be positive")
        if len(self.lam) != nv or len(self.c) != nv:
            raise ValueError("dimension mismatch")
        lam = tuple(int(v) % self.L for v in self.lam)  # canonical rep in [0, L)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "c", tuple(int(v) for v in self.c))
        g = 0
        for v in lam:
            g = math.gcd(g, v)
        if math.gcd(g, self.L) != 1:
            raise ValueError("lambda must be primitive mod L")
        if self.form.evaluate(lam) % self.L != 0:
            raise ValueError("L must divide F(lambda)")

    @property
    def k(self) -> int:
        return self.form.evaluate(self.lam) // self.L

    def split(self) -> tuple[int, int]:
        from .modarith import split_coprime
        return split_coprime(self.q, 2 * self.L * self.form.det_doubled)


@dataclass(frozen=True)
class ExpSumValue:
    value: complex
    q1: int
    q2: int
    method: str
    residual: float = 0.0


def h_poly(form: QuadraticForm, lam, L: int, y) -> int:
    fl = form.evaluate(lam)
    if fl % L != 0:
        raise ValueError("L must divide F(lambda)")
    g = form.gradient(lam)
    return fl // L + sum(gi * yi for gi, yi in zip(g, y))


@lru_cache(maxsize=32)
def _grid(q: int, nv: int):
    if nv == 0:
        return np.zeros((0, 1), dtype=np.int64)
    return np.indices((q,) * nv, dtype=np.int64).reshape(nv, -1)


def _form_arrays(form: QuadraticForm, rest, x0):
    """F(sigma) split as quadratic in x0 against the tail coordinates."""
    a = form.doubled_gram
    nv = form.nvars
    c00 = a[0][0] // 2
    lin = np.zeros(rest.shape[1], dtype=np.int64)
    for j in range(1, nv):
        if a[0][j]:
            lin = lin + a[0][j] * rest[j - 1]
    tail = np.zeros(rest.shape[1], dtype=np.int64)
    for i in range(1, nv):
        if a[i][i]:
            tail = tail + (a[i][i] // 2) * rest[i - 1] * rest[i - 1]
        for j in range(i + 1, nv):
            if a[i][j]:
                tail = tail + a[i][j] * rest[i - 1] * rest[j - 1]
    return c00 * x0 * x0 + x0 * lin + tail


def _dotvec(vec, rest, x0):
    out = np.full(rest.shape[1], vec[0] * x0, dtype=np.int64)
    for j in range(1, len(vec)):
        if vec[j]:
            out = out + vec[j] * rest[j - 1]
    return out


def _phase_total(coef: np.ndarray, q: int) -> tuple[complex, float]:
    residual = float(np.max(np.abs(coef - np.round(coef)))) if len(coef) else 0.0
    value = csum(w * e_q(v, q) for v, w in enumerate(coef) if w)
    return value, residual


def s_q_direct(inp: ExpSumInput, budget: int | None = None) -> ExpSumValue:
    form, q, L = inp.form, inp.q, inp.L
    nv = form.nvars
    Q = q * L
    check_budget(Q**nv, budget, "direct exponential sum")
    rt = np.array([ramanujan_sum(q, r) for r in range(q)], dtype=np.float64)
    g = form.gradient(inp.lam)
    k = inp.k
    rest = _grid(Q, nv - 1)
    coef = np.zeros(Q, dtype=np.float64)
    gdot_rest = _dotvec(g, rest, 0)
    cdot_rest = _dotvec(inp.c, rest, 0)
    for x0 in range(Q):
        fv = _form_arrays(form, rest, x0)
        hv = k + g[0] * x0 + gdot_rest
        mask = hv % L == 0
        u = (hv + L * fv) % Q
        up = (u[mask] // L) % q
        v = (inp.c[0] * x0 + cdot_rest[mask]) % Q
        coef += np.bincount(v, weights=rt[up], minlength=Q)
    value, residual = _phase_total(coef, Q)
    q1, q2 = inp.split()
    return ExpSumValue(value, q1, q2, "direct", residual)


def _split_residues(inp: ExpSumInput) -> tuple[int, int, int, int]:
    q1, q2 = inp.split()
    k = inp.k
    k1 = (k * mod_inverse(q2 * inp.L, q1)) % q1 if q1 > 1 else 0
    k2 = (k * mod_inverse(q1, q2 * inp.L)) % (q2 * inp.L)
    return q1, q2, k1, k2


def s1_direct(inp: ExpSumInput, budget: int | None = None) -> complex:
    form, L = inp.form, inp.L
    nv = form.nvars
    q1, q2, k1, _ = _split_residues(inp)
    if q1 == 1:
        return 1.0 + 0.0j
    check_budget(q1**nv, budget, "first factor sum")
    rt = np.array([ramanujan_sum(q1, r) for r in range(q1)], dtype=np.float64)
    g = form.gradient(inp.lam)
    rest = _grid(q1, nv - 1)
    coef = np.zeros(q1, dtype=np.float64)
    gdot_rest = _dotvec(g, rest, 0)
    cdot_rest = _dotvec(inp.c, rest, 0)
    w2 = (q2 * L) ** 2
    for x0 in range(q1):
        fv = _form_arrays(form, rest, x0)
        u = (w2 * fv + q2 * (g[0] * x0 + gdot_rest + k1)) % q1
        v = (inp.c[0] * x0 + cdot_rest) % q1
        coef += np.bincount(v, weights=rt[u], minlength=q1)
    value, _ = _phase_total(coef, q1)
    return value


def s2_direct(inp: ExpSumInput, budget: int | None = None) -> complex:
    form, L = inp.form, inp.L
    nv = form.nvars
    q1, q2, _, k2 = _split_residues(inp)
    Q = q2 * L
    check_budget(Q**nv, budget, "second factor sum")
    rt = np.array([ramanujan_sum(q2, r) for r in range(q2)], dtype=np.float64)
    g = form.gradient(inp.lam)
    k = inp.k
    rest = _grid(Q, nv - 1)
    coef = np.zeros(Q, dtype=np.float64)
    gdot_rest = _dotvec(g, rest, 0)
    cdot_rest = _dotvec(inp.c, rest, 0)
    for x0 in range(Q):
        gd = g[0] * x0 + gdot_rest
        mask = (k + q1 * gd) % L == 0
        fv = _form_arrays(form, rest, x0)
        u = (q1 * q1 * L * fv + q1 * (gd + k2)) % Q
        up = (u[mask] // L) % q2
        v = (inp.c[0] * x0 + cdot_rest[mask]) % Q
        coef += np.bincount(v, weights=rt[up], minlength=Q)
    value, _ = _phase_total(coef, Q)
    return value


def s_q_factored(inp: ExpSumInput, budget: int | None = None) -> ExpSumValue:
    q1, q2 = inp.split()
    value = s1_direct(inp, budget) * s2_direct(inp, budget)
    return ExpSumValue(value, q1, q2, "factored")


def s1_closed_form(inp: ExpSumInput) -> complex:
    """Gauss-sum evaluation of the coprime factor."""
    form, L = inp.form, inp.L
    n = form.nvars - 1
    q1, q2 = inp.split()
    if q1 == 1:
        return 1.0 + 0.0j
    det = form.det_doubled  # = 2^{n+1} * Delta_F
    iota = gauss_sum_closed(q1) ** (form.nvars)
    # front symbol (2/q1)^{(n+1)(n+4)} (Delta_F/q1)^{n+2}, read off from the
    # substitution chain through the complete-sum evaluation; cross-checked
    # numerically against the direct sum for both parities of n
    delta_mod = det % q1 * mod_inverse(pow(2, n + 1, q1), q1) % q1
    r = pow(2, (n + 1) * (n + 4), q1) * pow(delta_mod, n + 2, q1) % q1
    jac = jacobi(r, q1)
    lamc = sum(l * c for l, c in zip(inp.lam, inp.c))
    phase = e_q(-mod_inverse(q2 * L * L, q1) * lamc, q1)
    m = dual_form(form).eval_scaled(inp.c)  # 2^n F*(c)
    if n % 2 == 1:
        inner = complex(ramanujan_sum(q1, m))
    else:
        inner = csum(jacobi(a, q1) * e_q(-a * m, q1)
                     for a in range(q1) if math.gcd(a, q1) == 1)
    return iota * jac * phase * inner


def t_q_direct(g_form: QuadraticForm, m: int, c, q: int,
               budget: int | None = None) -> complex:
    nv = g_form.nvars
    if q == 1:
        return 1.0 + 0.0j
    check_budget(q ** (nv + 1), budget, "complete quadratic sum")
    rt = np.array([ramanujan_sum(q, r) for r in range(q)], dtype=np.float64)
    rest = _grid(q, nv - 1)
    coef = np.zeros(q, dtype=np.float64)
    cdot_rest = _dotvec(tuple(c), rest, 0)
    for x0 in range(q):
        fv = _form_arrays(g_form, rest, x0)
        u = (fv - m) % q
        v = (c[0] * x0 + cdot_rest) % q
        coef += np.bincount(v, weights=rt[u], minlength=q)
    value, _ = _phase_total(coef, q)
    return value


def t_q_closed(g_form: QuadraticForm, m: int, c, q: int) -> complex:
    nv = g_form.nvars
    n = nv - 1
    if q == 1:
        return 1.0 + 0.0j
    det = g_form.det_doubled  # = 2^{n+1} * Delta_G
    if math.gcd(q, 2 * det) != 1:
        raise ValueError("closed form requires gcd(q, 2*Delta_G) = 1")
    front = (gauss_sum_closed(q) * jacobi(2, q)) ** nv * jacobi(det % q, q)
    mstar = dual_form(g_form).eval_scaled(tuple(c))  # 2^n G*(c)
    scale = (2 * det) % q  # 2^{n+2} Delta_G mod q
    terms = []
    for a in range(1, q + 1):
        if math.gcd(a, q) != 1:
            continue
        inv = mod_inverse(a * scale, q)
        terms.append(jacobi(a, q) ** nv * e_q(-a * m - inv * mstar, q))
    return front * csum(terms)


def lattice_condition(form: QuadraticForm, c, lam, L: int) -> bool:
    """Support condition: c lies in the lattice {b * grad F(lambda) mod L}."""
    g = form.gradient(lam)
    for b in range(L):
        if all((ci - b * gi) % L == 0 for ci, gi in zip(c, g)):
            return True
    return False


def s_q0_congruence_sum(form: QuadraticForm, qf: int, l: int, lam,
                        budget: int | None = None) -> int:
    """The c = 0 sum in its congruence shape: sum over units a mod qf and
    xi mod qf*l^2 with xi = lambda mod l and F(xi) = 0 mod l^2 of
    e_qf(a F(xi) / l^2). Used for the multiplicativity cross-checks; the
    full sum is the case (qf, l) = (q, L)."""
    nv = form.nvars
    u = qf * l * l
    check_budget(u**nv, budget, "congruence-shaped sum")
    rt = np.array([ramanujan_sum(qf, r) for r in range(qf)], dtype=np.float64)
    lam = tuple(int(v) % l for v in lam) if l > 1 else tuple(0 for _ in lam)
    rest = _grid(u, nv - 1)
    rest_ok = np.ones(rest.shape[1], dtype=bool)
    for j in range(1, nv):
        rest_ok &= rest[j - 1] % l == lam[j]
    rest = rest[:, rest_ok]
    total = 0.0
    for x0 in range(lam[0] % l if l > 1 else 0, u, l):
        fv = _form_arrays(form, rest, x0)
        sel = fv % (l * l) == 0
        total += float(np.sum(rt[(fv[sel] // (l * l)) % qf]))
    out = int(round(total))
    assert abs(total - out) < 1e-6
    return out
