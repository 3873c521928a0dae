import math

import pytest
from hypothesis import given, settings, strategies as st

from quadrix.forms import QuadraticForm, dual_form
from quadrix.expsums import (ExpSumInput, h_poly, lattice_condition,
                             s1_closed_form, s1_direct, s2_direct,
                             s_q0_congruence_sum, s_q_direct, s_q_factored,
                             t_q_closed, t_q_direct)
from quadrix.util import BudgetError

F2 = QuadraticForm.from_coeffs(2, [[0, 1, 1]])
F3 = QuadraticForm.from_coeffs(3, [[0, 1, 1], [2, 2, 1]])
F5 = QuadraticForm.from_coeffs(
    5, [[0, 1, 1], [2, 2, 1], [3, 3, 1], [4, 4, -1]])

# residues satisfying L | F(lam), gcd(lam, L) = 1, on F3
LAMBDAS = {1: [(1, 0, 0)], 2: [(1, 0, 0), (1, 2, 0), (0, 1, 0)],
           3: [(1, 0, 0), (1, 2, 1), (0, 1, 0)], 4: [(1, 0, 0), (1, 4, 2)]}


def test_input_validation():
    with pytest.raises(ValueError):
        ExpSumInput(F3, 2, 2, (0, 0, 0), (0, 0, 0))  # lam not primitive
    with pytest.raises(ValueError):
        ExpSumInput(F3, 2, 2, (1, 1, 0), (0, 0, 0))  # 2 does not divide F=1
    with pytest.raises(ValueError):
        ExpSumInput(F3, 0, 1, (0, 0, 0), (0, 0, 0))
    inp = ExpSumInput(F3, 3, 2, (3, 2, 2), (0, 0, 0))
    assert inp.lam == (1, 0, 0)  # canonical representative in [0, L)


def test_h_poly():
    assert h_poly(F2, (1, 0), 1, (0, 0)) == 0  # F(lam)/L at y = 0
    assert h_poly(F2, (1, 0), 1, (0, 1)) == 1  # grad F(lam) = (0, 1)
    assert h_poly(F3, (1, 2, 1), 3, (0, 0, 0)) == 1  # F = 3, k = 1
    with pytest.raises(ValueError):
        h_poly(F3, (1, 1, 0), 2, (0, 0, 0))


def test_direct_trivial_values():
    assert s_q_direct(ExpSumInput(F3, 1, 1, (0, 0, 0), (0, 0, 0))).value == 1
    # q = 2, L = 1 hand enumeration on x0 x1: 3 terms 1 and one term -1
    v = s_q_direct(ExpSumInput(F2, 2, 1, (1, 0), (0, 0)))
    assert abs(v.value - 2) < 1e-9


def test_budget_refusal():
    with pytest.raises(BudgetError):
        s_q_direct(ExpSumInput(F5, 40, 3, (1, 0, 0, 0, 0), (0,) * 5),
                   budget=10**6)


@settings(deadline=None, max_examples=40)
@given(st.integers(2, 24), st.sampled_from([1, 2, 3]),
       st.integers(0, 2), st.lists(st.integers(-2, 2), min_size=3, max_size=3))
def test_factorization_identity(q, L, lam_idx, c):
    lam = LAMBDAS[L][lam_idx % len(LAMBDAS[L])]
    inp = ExpSumInput(F3, q, L, lam, tuple(c))
    direct = s_q_direct(inp).value
    factored = s1_direct(inp) * s2_direct(inp)
    assert abs(direct - factored) <= 1e-6 * (q * L) ** 3
    assert abs(s_q_factored(inp).value - factored) < 1e-12


@settings(deadline=None, max_examples=40)
@given(st.integers(2, 24), st.sampled_from([1, 2, 3]),
       st.integers(0, 2), st.lists(st.integers(-2, 2), min_size=3, max_size=3))
def test_s1_closed_form(q, L, lam_idx, c):
    lam = LAMBDAS[L][lam_idx % len(LAMBDAS[L])]
    inp = ExpSumInput(F3, q, L, lam, tuple(c))
    q1, _ = inp.split()
    assert abs(s1_direct(inp) - s1_closed_form(inp)) <= 1e-6 * q1**3


def test_s1_special_values():
    # n even, F*(c) = 0: square modulus 9 gives 9^{(n+1)/2} phi(9) = 162,
    # non-square modulus 3 gives 0
    inp9 = ExpSumInput(F3, 9, 1, (1, 0, 0), (1, 0, 0))
    assert abs(abs(s1_direct(inp9)) - 162) < 1e-6
    inp3 = ExpSumInput(F3, 3, 1, (1, 0, 0), (1, 0, 0))
    assert abs(s1_direct(inp3)) < 1e-9
    # q1 = 1 convention
    assert s1_closed_form(ExpSumInput(F3, 2, 1, (1, 0, 0), (0, 0, 0))) == 1


def _tau(q):
    return sum(1 for d in range(1, q + 1) if q % d == 0)


@settings(deadline=None, max_examples=30)
@given(st.integers(2, 24), st.sampled_from([1, 2]),
       st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_s1_bound(q, L, c):
    lam = LAMBDAS[L][0]
    inp = ExpSumInput(F3, q, L, lam, tuple(c))
    q1, _ = inp.split()
    if q1 == 1:
        return
    mstar = dual_form(F3).eval_scaled(tuple(c))
    bound = q1 ** 2 * _tau(q1) * math.sqrt(math.gcd(q1, abs(mstar) or q1))
    assert abs(s1_direct(inp)) <= bound + 1e-6


def test_s2_bound_ratio():
    # the second factor obeys |S2| <= C q2^{(n+3)/2} L^n gcd(q2, L)^{1/2}
    # with one fitted constant across the grid
    ratios = []
    for q in range(2, 13):
        for L in (1, 2):
            inp = ExpSumInput(F3, q, L, LAMBDAS[L][0], (1, 1, 0))
            _, q2 = inp.split()
            denom = q2 ** 2.5 * L**2 * math.sqrt(math.gcd(q2, L))
            ratios.append(abs(s2_direct(inp)) / denom)
    assert max(ratios) < 50


def test_support_condition():
    for q in (2, 3, 4, 6):
        for L in (2, 3, 4):
            for lam in LAMBDAS[L]:
                for c0 in range(L):
                    for c1 in range(L):
                        for c2 in range(L):
                            c = (c0, c1, c2)
                            inp = ExpSumInput(F3, q, L, lam, c)
                            if not lattice_condition(F3, c, lam, L):
                                v = s_q_direct(inp).value
                                assert abs(v) <= 1e-6 * (q * L) ** 3


def test_lattice_condition_examples():
    assert lattice_condition(F3, (5, -7, 11), (1, 0, 0), 1)
    lam = (1, 0, 0)
    assert lattice_condition(F3, F3.gradient(lam), lam, 4)
    assert not lattice_condition(F2, (1, 0), (1, 0), 2)


def test_t_q_values():
    g1 = QuadraticForm.from_coeffs(1, [[0, 0, 1]])
    assert t_q_direct(g1, 0, (0,), 1) == 1
    assert abs(t_q_direct(g1, 0, (0,), 3)) < 1e-9


@settings(deadline=None, max_examples=30)
@given(st.integers(-6, 6), st.lists(st.integers(-4, 4), min_size=2, max_size=2),
       st.sampled_from([5, 7]))
def test_t_q_closed_vs_direct(m, c, q):
    g = QuadraticForm.from_coeffs(2, [[0, 0, 1], [1, 1, 3]])
    assert abs(t_q_direct(g, m, tuple(c), q)
               - t_q_closed(g, m, tuple(c), q)) < 1e-8


def test_t_q_closed_precondition():
    g = QuadraticForm.from_coeffs(2, [[0, 0, 1], [1, 1, 3]])
    with pytest.raises(ValueError):
        t_q_closed(g, 0, (0, 0), 6)


def test_congruence_sum_values():
    # frozen direct-summation values on F3 at c = 0
    zero = (0, 0, 0)
    assert s_q0_congruence_sum(F3, 1, 1, zero) == 1
    assert s_q0_congruence_sum(F3, 4, 1, zero) == 16
    assert s_q0_congruence_sum(F3, 9, 1, zero) == 162
    assert s_q0_congruence_sum(F3, 25, 1, zero) == 2500
    # agreement with the direct twisted sum at c = 0
    for q, L, lam in [(9, 1, (1, 0, 0)), (3, 2, (1, 0, 0)), (5, 2, (0, 1, 0))]:
        inp = ExpSumInput(F3, q, L, lam, zero)
        assert abs(s_q_direct(inp).value
                   - s_q0_congruence_sum(F3, q, L, lam)) < 1e-6


def test_congruence_sum_multiplicative():
    zero = (0, 0, 0)
    # coprime split of the modulus q L^2: 36 = 4 * 9 with L = 1
    assert s_q0_congruence_sum(F3, 36, 1, zero) == \
        s_q0_congruence_sum(F3, 4, 1, zero) * \
        s_q0_congruence_sum(F3, 9, 1, zero) == 2592
    # odd q with the L = 2 part split off: q L^2 = q * 4
    for q in (9, 25):
        lam = (1, 0, 0)
        assert s_q0_congruence_sum(F3, q, 2, lam) == \
            s_q0_congruence_sum(F3, q, 1, zero) * \
            s_q0_congruence_sum(F3, 1, 2, lam)
