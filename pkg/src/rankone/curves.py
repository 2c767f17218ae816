"""Short Weierstrass curves y^2 = x^3 + Ax + B: normalization, height, minimal models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import FactoredInteger, factor, valuation


class SingularCurve(ValueError):
    pass


class WrongReductionType(ValueError):
    pass


def discriminant(A: int, B: int) -> int:
    return -4 * A**3 - 27 * B**2


def height_of(A: int, B: int) -> int:
    return max(4 * abs(A) ** 3, 27 * B * B)


@dataclass(frozen=True, order=False)
class CurveModel:
    A: int
    B: int

    def __post_init__(self):
        if discriminant(self.A, self.B) == 0:
            raise SingularCurve(f"singular pair ({self.A}, {self.B})")

    @property
    def height(self) -> int:
        return height_of(self.A, self.B)

    @property
    def delta(self) -> int:
        return discriminant(self.A, self.B)

    @property
    def sort_key(self) -> tuple[int, int, int, int]:
        return (self.height, abs(self.A), self.A, self.B)

    def __str__(self) -> str:
        return f"[{self.A},{self.B}]"


def height(E: CurveModel) -> int:
    return E.height


def _common_prime_candidates(A: int, B: int) -> list[int]:
    """Primes l that could satisfy l^4 | A and l^6 | B."""
    if B == 0:
        return list(factor(A).primes)
    if A == 0:
        return list(factor(B).primes)
    g = math.gcd(A, B)
    return list(factor(g).primes) if abs(g) > 1 else []


def normalize(A: int, B: int) -> CurveModel:
    if discriminant(A, B) == 0:
        raise SingularCurve(f"singular pair ({A}, {B})")
    for ell in _common_prime_candidates(A, B):
        q4, q6 = ell**4, ell**6
        while A % q4 == 0 and B % q6 == 0:
            A //= q4
            B //= q6
    return CurveModel(A, B)


def is_normalized(A: int, B: int) -> bool:
    return all(
        not (A % ell**4 == 0 and B % ell**6 == 0)
        for ell in _common_prime_candidates(A, B)
    )


def twist(E: CurveModel, D: int) -> CurveModel:
    if D == 0:
        raise ValueError("twist by 0")
    return normalize(E.A * D * D, E.B * D**3)


# ------------------------------------------------------- minimal models


def kraus_integral(c4: int, c6: int) -> bool:
    """Do (c4, c6) arise from an integral Weierstrass model?"""
    num = c4**3 - c6**2
    if num == 0 or num % 1728:
        return False
    if c6 != 0 and valuation(c6, 3) == 2:
        return False
    if c6 % 4 == 3:
        return True
    return c4 % 16 == 0 and c6 % 32 in (0, 8)


def ainvariants_from_c4c6(c4: int, c6: int) -> tuple[int, int, int, int, int] | None:
    """Integral (a1,a2,a3,a4,a6) with reduced a1,a2,a3 realizing (c4, c6)."""
    for a1 in (0, 1):
        for a2 in (-1, 0, 1):
            b2 = a1 * a1 + 4 * a2
            num4 = b2 * b2 - c4
            if num4 % 24:
                continue
            b4 = num4 // 24
            num6 = -(b2**3) + 36 * b2 * b4 - c6
            if num6 % 216:
                continue
            b6 = num6 // 216
            for a3 in (0, 1):
                if (b4 - a1 * a3) % 2 or (b6 - a3 * a3) % 4:
                    continue
                return (a1, a2, a3, (b4 - a1 * a3) // 2, (b6 - a3 * a3) // 4)
    return None


@dataclass(frozen=True)
class MinimalModelData:
    c4: int
    c6: int
    delta_min: FactoredInteger
    u: int
    ainvs: tuple[int, int, int, int, int]
    conductor: FactoredInteger  # computed exponents only
    conductor_uncomputed: tuple[int, ...]  # primes whose exponent is not computed

    def is_minimal_at(self, ell: int) -> bool:
        """Is the short model itself minimal at ell?"""
        return self.u % ell != 0

    def reduction_symbol(self, ell: int) -> str:
        v = self.delta_min.valuation(ell)
        if v == 0:
            return "good"
        if self.c4 % ell:
            return "multiplicative"
        return "additive"

    @property
    def semistable(self) -> bool:
        return all(self.c4 % ell for ell in self.delta_min.primes)

    @property
    def conductor_odd_part(self) -> int | None:
        if any(ell != 2 for ell in self.conductor_uncomputed):
            return None
        return self.conductor.odd_part().value


def _scale_search(c4: int, c6: int) -> int:
    best = 1
    for a in range(4):
        for b in range(4):
            u = 2**a * 3**b
            if u <= best:
                continue
            if c4 % u**4 or c6 % u**6:
                continue
            if kraus_integral(c4 // u**4, c6 // u**6):
                best = u
    return best


@lru_cache(maxsize=200_000)
def _minimal_model_cached(A: int, B: int) -> MinimalModelData:
    E = normalize(A, B)
    c4, c6 = -48 * E.A, -864 * E.B
    u = _scale_search(c4, c6)
    c4m, c6m = c4 // u**4, c6 // u**6
    dfac = factor(E.delta)
    factors = dict(dfac.factors)
    factors[2] = factors.get(2, 0) + 4
    for ell in (2, 3):
        e = valuation(u, ell)
        if e:
            factors[ell] -= 12 * e
    factors = {p: e for p, e in factors.items() if e > 0}
    dmin = FactoredInteger(dfac.sign, tuple(sorted(factors.items())))
    ainvs = ainvariants_from_c4c6(c4m, c6m)
    if ainvs is None:  # pragma: no cover - guarded by kraus_integral
        raise ArithmeticError(f"no integral model for {E}")
    cond, unknown = [], []
    for ell, _ in dmin.factors:
        if c4m % ell:
            cond.append((ell, 1))
        elif ell >= 5:
            cond.append((ell, 2))
        else:
            unknown.append(ell)
    return MinimalModelData(
        c4m, c6m, dmin, u, ainvs, FactoredInteger(1, tuple(cond)), tuple(unknown)
    )


def minimal_model(E: CurveModel) -> MinimalModelData:
    return _minimal_model_cached(E.A, E.B)


# --------------------------------------------------------- point counts


@lru_cache(maxsize=64)
def _square_table(ell: int) -> np.ndarray:
    table = np.zeros(ell, dtype=bool)
    xs = np.arange(ell, dtype=np.int64)
    table[(xs * xs) % ell] = True
    return table


def count_points_ainvs(ainvs, ell: int) -> int:
    a1, a2, a3, a4, a6 = (int(a) % ell for a in ainvs)
    if ell == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                lhs = y * y + a1 * x * y + a3 * y
                rhs = x**3 + a2 * x * x + a4 * x + a6
                n += (lhs - rhs) % 2 == 0
        return n
    xs = np.arange(ell, dtype=np.int64)
    x2 = xs * xs % ell
    x3 = x2 * xs % ell
    lin = (a1 * xs + a3) % ell
    g = (4 * (x3 + a2 * x2 + a4 * xs + a6) + lin * lin) % ell
    sq = _square_table(ell)
    chi = np.where(g == 0, 0, np.where(sq[g], 1, -1))
    return int(1 + ell + chi.sum())


def count_points_mod(E: CurveModel, ell: int, budget: int = 10**6) -> int:
    if ell > budget:
        raise ValueError(f"prime {ell} exceeds the exhaustive-count budget")
    mm = minimal_model(E)
    if mm.delta_min.valuation(ell):
        raise WrongReductionType(f"{E} has bad reduction at {ell}")
    return count_points_ainvs(mm.ainvs, ell)


def a_ell(E: CurveModel, ell: int) -> int:
    return ell + 1 - count_points_mod(E, ell)


def is_good_ordinary(E: CurveModel, p: int) -> bool:
    mm = minimal_model(E)
    if mm.delta_min.valuation(p):
        return False
    return a_ell(E, p) % p != 0


# ----------------------------------------------- points over Z / l^k


@dataclass(frozen=True)
class AffinePointModN:
    """A point of y^2 = x^3 + Ax + B over Z/modulus.

    Points in the kernel of reduction are stored by their formal parameter
    z = -x/y (a multiple of the prime) with ``at_infinity`` set; z = 0 is O.
    """

    modulus: int
    x: int = 0
    y: int = 0
    at_infinity: bool = False

    @property
    def label(self) -> str:
        if self.at_infinity:
            return "O" if self.x == 0 else f"z{self.x}"
        return f"{self.x},{self.y}"

    @property
    def order_key(self) -> tuple:
        if self.at_infinity:
            return (0, 0, 0) if self.x == 0 else (2, self.x, 0)
        return (1, self.x, self.y)
