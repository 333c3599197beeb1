"""Exact combinatorics of the extended coupon collector.

Hyperharmonic numbers here are the iterated sums

    H_0(n) = 1,   H_r(n) = sum_{k=1..n} H_{r-1}(k) / k,

so ``H_1(n)`` is the n-th harmonic number and ``H_r(n) = E U_r`` for the
number ``U_r`` of empty spots in album ``r`` when album 0 completes. (Not the
other sequence that also goes by this name.)

Rational arithmetic uses :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

EULER_GAMMA = 0.57721566490153286061

EXACT_RECURSION_MAX_N = 10_000
ALTERNATING_MAX_N = 200
PGF_MAX_N, PGF_MAX_R = 12, 3
ORACLE_MAX_N, ORACLE_MAX_R = 6, 2


class GuardError(ValueError):
    """An input exceeds the cost guard of an exact routine."""


@dataclass(frozen=True)
class HyperharmonicValue:
    n: int
    r: int
    approx: float
    method: str
    exact: Fraction | None = None

    def __str__(self) -> str:
        if self.exact is None:
            return f"{self.approx:.12g}"
        return f"{self.exact.numerator}/{self.exact.denominator} ≈ {self.approx:.6f}"


@dataclass(frozen=True)
class PmfVector:
    offset: int
    probs: tuple

    def as_dict(self) -> dict:
        return {self.offset + i: p for i, p in enumerate(self.probs) if p != 0}

    def mean(self):
        return sum((self.offset + i) * p for i, p in enumerate(self.probs))

    def as_float(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])


def _check(n: int, r: int):
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")


def hyperharmonic_recursive(n: int, r: int, mode: str = "exact") -> HyperharmonicValue:
    _check(n, r)
    if mode == "exact":
        if n > EXACT_RECURSION_MAX_N:
            raise GuardError(f"exact recursion limited to n <= {EXACT_RECURSION_MAX_N} (got n={n})")
        row = [Fraction(1)] * n
        for _ in range(r):
            acc = Fraction(0)
            nxt = []
            for k, h in enumerate(row, start=1):
                acc += h / k
                nxt.append(acc)
            row = nxt
        return HyperharmonicValue(n, r, float(row[-1]), "recursion", row[-1])
    if mode == "float":
        return HyperharmonicValue(n, r, float(hyperharmonic_table(n, r)[-1]), "float-recursion")
    raise ValueError(f"mode must be 'exact' or 'float', got {mode!r}")


def hyperharmonic_table(n: int, r: int) -> np.ndarray:
    """Float values ``H_r(1..n)`` via running sums, O(n r)."""
    k = np.arange(1, n + 1, dtype=float)
    row = np.ones(n)
    for _ in range(r):
        row = np.cumsum(row / k)
    return row


def hyperharmonic_alternating(n: int, r: int) -> HyperharmonicValue:
    """``sum_k C(n,k) (-1)^(k+1) / k^r``, exact only.

    In floats this sum cancels catastrophically for n beyond ~30.
    """
    _check(n, r)
    if n > ALTERNATING_MAX_N:
        raise GuardError(f"alternating sum limited to n <= {ALTERNATING_MAX_N} (got n={n})")
    total = sum(
        Fraction(math.comb(n, k) * (-1) ** (k + 1), k ** r) for k in range(1, n + 1)
    )
    return HyperharmonicValue(n, r, float(total), "alternating", total)


def asymptotic_ratio(n: int, r: int) -> float:
    """``r! H_r(n) / ln^r n``; tends to 1, but only like O(1/ln n)."""
    if n < 2:
        raise ValueError("asymptotic_ratio needs n >= 2")
    if r == 0:
        return 1.0
    h = hyperharmonic_recursive(n, r, mode="float").approx
    return math.factorial(r) * h / math.log(n) ** r


# -- closed-form probability generating function of U_r ---------------------

@lru_cache(maxsize=None)
def _fact(k: int) -> int:
    return math.factorial(k)


def _poly_mul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


@lru_cache(maxsize=None)
def _u_minus_one_pow(c: int) -> tuple:
    return tuple(Fraction(math.comb(c, j) * (-1) ** (c - j)) for j in range(c + 1))


def exact_u_pgf_coefficients(n: int, r: int) -> PmfVector:
    """Coefficients of ``E u^{U_r}`` expanded from the multinomial-sum formula.

    The sum runs over ``a + b + c_1 + ... + c_r = n - 1``; empty products are
    1 and ``0! = 1``. Returns the PMF of ``U_r`` on ``0..n``.
    """
    _check(n, r)
    if r < 1:
        raise ValueError("the PGF formula is for r >= 1")
    if n > PGF_MAX_N or r > PGF_MAX_R:
        raise GuardError(f"PGF evaluation limited to n <= {PGF_MAX_N}, r <= {PGF_MAX_R}")
    m = n - 1
    poly = [Fraction(0)] * (m + 1)
    for cs in product(range(m + 1), repeat=r):
        sc = sum(cs)
        if sc > m:
            continue
        w = sum(k * c for k, c in enumerate(cs, start=1))
        denom_c = 1
        for k, c in enumerate(cs, start=1):
            denom_c *= _fact(k) ** c * _fact(c)
        base = Fraction(_fact(w), denom_c)
        for a in range(m - sc + 1):
            b = m - sc - a
            coef = Fraction(_fact(m), _fact(a) * _fact(b)) * base
            coef *= (-1) ** b
            coef /= Fraction(n - a) ** (1 + w)
            for j, pj in enumerate(_u_minus_one_pow(sc)):
                poly[j] += coef * pj
    # multiply by n u
    probs = [Fraction(0)] + [n * p for p in poly]
    return PmfVector(0, tuple(probs))


def exact_u_pgf(n: int, r: int, u) -> float:
    """Evaluate ``E u^{U_r}`` exactly at rational ``u`` (floats are converted)."""
    uq = Fraction(u)
    if not 0 <= uq <= 1:
        raise ValueError("u must lie in [0, 1]")
    coeffs = exact_u_pgf_coefficients(n, r).probs
    val = Fraction(0)
    for c in reversed(coeffs):
        val = val * uq + c
    return float(val)


# -- absorbing Markov chain oracle ---------------------------------------------

def oracle_u_pmf(n: int, r: int) -> PmfVector:
    """Exact PMF of ``U_r`` from the absorbing chain on capped-count multisets.

    State: ``m[j]`` = number of types seen ``j`` times (``j`` capped at
    ``r + 1``). A uniform draw moves one type from ``j`` to ``j + 1``; draws
    of capped types are self-loops and are divided out. Absorption happens
    when no type has count 0; then ``U_r = #{types with count <= r}``.
    """
    _check(n, r)
    if n > ORACLE_MAX_N or r > ORACLE_MAX_R:
        raise GuardError(f"oracle limited to n <= {ORACLE_MAX_N}, r <= {ORACLE_MAX_R}")
    cap = r + 1
    start = (n,) + (0,) * cap
    frontier = {start: Fraction(1)}
    pmf = [Fraction(0)] * (n + 1)
    # every non-loop move raises sum_j j*m[j] by one, so process level by level
    while frontier:
        nxt: dict = {}
        for state, prob in frontier.items():
            stay = Fraction(state[cap], n)
            if stay == 1:
                continue
            for j in range(cap):
                if state[j] == 0:
                    continue
                p = prob * Fraction(state[j], n) / (1 - stay)
                s = list(state)
                s[j] -= 1
                s[j + 1] += 1
                s = tuple(s)
                if s[0] == 0:
                    pmf[sum(s[1:cap])] += p
                else:
                    nxt[s] = nxt.get(s, Fraction(0)) + p
        frontier = nxt
    return PmfVector(0, tuple(pmf))


# -- completion-time expectations ------------------------------------------------

def expected_t_asymptotic(n: int, r: int) -> float:
    """``n ln n + r n ln ln n + (gamma - ln r!) n``, the expansion without o(n)."""
    if n < 2:
        raise ValueError("expected_t_asymptotic needs n >= 2")
    if r < 0:
        raise ValueError("r must be >= 0")
    ln = math.log(n)
    lln_term = r * n * math.log(ln) if r else 0.0
    return n * ln + lln_term + (EULER_GAMMA - math.lgamma(r + 1)) * n


def expected_t0_exact(n: int) -> Fraction:
    """Classical ``E T_0 = n H_1(n)``."""
    return n * hyperharmonic_recursive(n, 1).exact
