import cmath
import math

import pytest
from hypothesis import given, strategies as st

from quadrix.modarith import (crt_combine, e_q, egcd, euler_phi, factorize,
                              gauss_sum, gauss_sum_closed, jacobi, mod_inverse,
                              moebius, ramanujan_sum, split_coprime)


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_egcd_bezout(a, b):
    g, s, t = egcd(a, b)
    assert g == a * s + b * t
    assert g == math.gcd(a, b) or g == -math.gcd(a, b)


@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_mod_inverse(a, m):
    if math.gcd(a, m) == 1:
        assert a * mod_inverse(a, m) % m == 1 % m
    else:
        with pytest.raises(ValueError):
            mod_inverse(a, m)


@given(st.integers(2, 10**9))
def test_factorize_product(n):
    assert math.prod(p**e for p, e in factorize(n)) == n


def test_factorize_large_semiprime():
    n = 1000003 * 1000033
    assert factorize(n) == [(1000003, 1), (1000033, 1)]


def test_euler_phi_values():
    assert [euler_phi(n) for n in (1, 2, 6, 9, 10)] == [1, 1, 2, 6, 4]


def test_moebius_values():
    assert [moebius(n) for n in (1, 2, 4, 6, 30)] == [1, -1, 0, 1, -1]


def test_jacobi_small_table():
    assert jacobi(2, 15) == 1
    assert jacobi(2, 7) == 1
    assert jacobi(3, 7) == -1
    assert jacobi(0, 9) == 0
    with pytest.raises(ValueError):
        jacobi(3, 4)


@given(st.integers(-50, 50), st.integers(-50, 50),
       st.sampled_from([3, 5, 7, 9, 11, 15, 21]))
def test_jacobi_multiplicative(a, b, q):
    assert jacobi(a * b, q) == jacobi(a, q) * jacobi(b, q)


def _jacobi_direct(a, p):
    # odd prime p: count square roots
    a %= p
    if a == 0:
        return 0
    return 1 if any(x * x % p == a for x in range(p)) else -1


@given(st.integers(0, 100), st.sampled_from([3, 5, 7, 11, 13, 17]))
def test_jacobi_vs_euler_criterion(a, p):
    assert jacobi(a, p) == _jacobi_direct(a, p)


@given(st.sampled_from([1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 25]))
def test_gauss_sum_closed_matches_direct(q):
    assert abs(gauss_sum(q) - gauss_sum_closed(q)) < 1e-9


def test_ramanujan_direct_oracle():
    # direct unit summation, including the q = 4, m = 2 value -2
    for q in range(1, 30):
        for m in range(-5, 12):
            direct = sum(e_q(a * m, q) for a in range(q)
                         if math.gcd(a, q) == 1)
            assert abs(ramanujan_sum(q, m) - direct.real) < 1e-9
            assert abs(direct.imag) < 1e-9
    assert ramanujan_sum(4, 2) == -2
    assert ramanujan_sum(9, 3) == -3
    assert ramanujan_sum(12, 0) == euler_phi(12)


@given(st.integers(1, 10**6), st.integers(1, 10**4))
def test_split_coprime(q, a):
    q1, q2 = split_coprime(q, a)
    assert q1 * q2 == q
    assert math.gcd(q1, a) == 1
    # q2 has the same prime support as gcd-part: every prime of q2 divides a
    for p, _ in factorize(q2) if q2 > 1 else []:
        assert a % p == 0


def test_crt_combine():
    x, m = crt_combine([(2, 3), (3, 5), (2, 7)])
    assert m == 105 and x == 23
    with pytest.raises(ValueError):
        crt_combine([(1, 4), (2, 6)])


@given(st.integers(-100, 100), st.integers(1, 50))
def test_e_q_unit_circle(k, q):
    z = e_q(k, q)
    assert abs(abs(z) - 1) < 1e-12
    assert abs(z ** q - 1) < 1e-9 * q
