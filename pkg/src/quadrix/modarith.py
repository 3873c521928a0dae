"""Exact modular arithmetic: inverses, CRT, Jacobi symbols, Gauss and
Ramanujan sums, and the coprime splitting q = q1 q2 with q2 | A^inf."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

from .util import csum

TRIAL_LIMIT = 10**6


def egcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def mod_inverse(a: int, m: int) -> int:
    if m < 1:
        raise ValueError("modulus must be positive")
    if m == 1:
        return 0
    g, s, _ = egcd(a % m, m)
    if g != 1:
        raise ValueError(f"{a} is not invertible mod {m}")
    return s % m


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    x, c = 2, 1
    while True:
        y, d = x, 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
        x, c = 2, c + 1


def factorize(n: int) -> list[tuple[int, int]]:
    """Sorted (prime, exponent) pairs; trial division then Pollard rho."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 5
    while d * d <= n and d <= TRIAL_LIMIT:
        for p in (d, d + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        d += 6
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if _is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.extend([d, m // d])
    return sorted(out.items())


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Modulus:
    value: int
    factorization: tuple

    @classmethod
    def of(cls, n: int) -> "Modulus":
        return cls(n, tuple(factorize(n)))


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    phi = 1
    for p, e in factorize(n):
        phi *= (p - 1) * p ** (e - 1)
    return phi


@lru_cache(maxsize=None)
def moebius(n: int) -> int:
    mu = 1
    for _, e in factorize(n):
        if e > 1:
            return 0
        mu = -mu
    return mu


def jacobi(a: int, q: int) -> int:
    if q <= 0 or q % 2 == 0:
        raise ValueError("Jacobi symbol needs an odd positive lower argument")
    a %= q
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if q % 8 in (3, 5):
                result = -result
        a, q = q, a
        if a % 4 == 3 and q % 4 == 3:
            result = -result
        a %= q
    return result if q == 1 else 0


def e_q(k, q: int) -> complex:
    return cmath.exp(2j * cmath.pi * (k % q) / q)


def gauss_sum(q: int) -> complex:
    """Quadratic Gauss sum, direct compensated summation."""
    if q < 1:
        raise ValueError("modulus must be positive")
    return csum(e_q(x * x, q) for x in range(q))


def gauss_sum_closed(q: int) -> complex:
    """Closed form for odd q: sqrt(q) if q = 1 mod 4, i sqrt(q) if q = 3 mod 4."""
    if q % 2 == 0:
        raise ValueError("closed form implemented for odd q only")
    if q % 4 == 1:
        return complex(math.sqrt(q), 0.0)
    return complex(0.0, math.sqrt(q))


def ramanujan_sum(q: int, m: int) -> int:
    """Sum over units a mod q of e_q(a m), an exact integer."""
    if q < 1:
        raise ValueError("modulus must be positive")
    g = math.gcd(m % q, q) if q > 1 else 1
    d = q // g
    mu = moebius(d)
    if mu == 0:
        return 0
    return mu * (euler_phi(q) // euler_phi(d))


def split_coprime(q: int, a: int) -> tuple[int, int]:
    """q = q1 q2 with gcd(q1, a) = 1 and every prime of q2 dividing a."""
    if q < 1 or a == 0:
        raise ValueError("need q >= 1 and a != 0")
    q1, q2 = q, 1
    a = abs(a)
    while True:
        g = math.gcd(q1, a)
        if g == 1:
            return q1, q2
        q1 //= g
        q2 *= g


def crt_combine(residues) -> tuple[int, int]:
    """Combine [(value, modulus), ...] with pairwise coprime moduli."""
    residues = list(residues)
    if not residues:
        raise ValueError("need at least one residue")
    x, m = residues[0]
    x %= m
    for v, n in residues[1:]:
        g, s, _ = egcd(m, n)
        if g != 1:
            raise ValueError("moduli are not pairwise coprime")
        x = (x + m * ((s * ((v - x) % n)) % n)) % (m * n)
        m *= n
    return x, m
