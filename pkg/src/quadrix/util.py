"""Shared plumbing: budgets, exact rational parsing, compensated sums."""

from __future__ import annotations

import math
import os
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_TERM_BUDGET = 10**8


class BudgetError(RuntimeError):
    """Raised when a computation would exceed its configured term budget."""


def term_budget(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    env = os.environ.get("QUADRIX_BUDGET")
    if env is not None:
        return int(env)
    return DEFAULT_TERM_BUDGET


def check_budget(nterms: int, budget: int | None = None, what: str = "sum") -> None:
    cap = term_budget(budget)
    if nterms > cap:
        raise BudgetError(f"{what} needs {nterms} terms, budget is {cap}")


def parse_rational(s) -> Fraction:
    """Parse "p/q" strings (also plain ints / Fractions) into a Fraction."""
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(str(s))


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def csum(terms: Iterable[complex]) -> complex:
    # compensated: fsum on the real and imaginary parts separately
    re, im = [], []
    for t in terms:
        t = complex(t)
        re.append(t.real)
        im.append(t.imag)
    return complex(math.fsum(re), math.fsum(im))


def floor_div_frac(a: Fraction) -> int:
    return a.numerator // a.denominator


def ceil_div_frac(a: Fraction) -> int:
    return -((-a.numerator) // a.denominator)


def ivec(x: Sequence) -> tuple:
    return tuple(int(v) for v in x)
