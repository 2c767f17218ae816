"""Census counters, the counting inequalities, and the final proportion."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

EVEN, ODD = 0, 1


@dataclass(frozen=True)
class CensusEntry:
    """One family member with whatever parity information is available."""

    A: int
    B: int
    w: int | None = None
    s5: int | None = None
    s5_twist: int | None = None

    @property
    def parity(self) -> int | None:
        # with trivial p-torsion, s_p is even iff w = +1, and the twist has the opposite parity
        if self.w is not None:
            return EVEN if self.w == 1 else ODD
        if self.s5 is not None:
            return self.s5 % 2
        if self.s5_twist is not None:
            return 1 - self.s5_twist % 2
        return None


@dataclass
class CensusTally:
    X: int
    N: int = 0
    N_even: int = 0
    N_odd: int = 0
    N_parity_unknown: int = 0
    N_i: Counter = field(default_factory=Counter)
    N_i_twist: Counter = field(default_factory=Counter)
    # members of known parity lacking Selmer data, by parity
    no_s5: list = field(default_factory=lambda: [0, 0])
    no_s5_twist: list = field(default_factory=lambda: [0, 0])
    inconsistent: int = 0

    @property
    def coverage(self) -> Fraction:
        return Fraction(sum(self.N_i.values()), self.N) if self.N else Fraction(1)

    @property
    def coverage_twist(self) -> Fraction:
        return Fraction(sum(self.N_i_twist.values()), self.N) if self.N else Fraction(1)

    def add(self, e: CensusEntry) -> None:
        self.N += 1
        par = e.parity
        if par is None:
            self.N_parity_unknown += 1
        elif par == EVEN:
            self.N_even += 1
        else:
            self.N_odd += 1
        if e.s5 is not None:
            self.N_i[e.s5] += 1
            if par is not None and e.s5 % 2 != par:
                self.inconsistent += 1
        elif par is not None:
            self.no_s5[par] += 1
        if e.s5_twist is not None:
            self.N_i_twist[e.s5_twist] += 1
            if par is not None and e.s5_twist % 2 == par:
                self.inconsistent += 1
        elif par is not None:
            self.no_s5_twist[par] += 1

    def merge(self, other: "CensusTally") -> "CensusTally":
        if other.X != self.X:
            raise ValueError("tallies at different heights")
        return CensusTally(
            self.X,
            self.N + other.N,
            self.N_even + other.N_even,
            self.N_odd + other.N_odd,
            self.N_parity_unknown + other.N_parity_unknown,
            self.N_i + other.N_i,
            self.N_i_twist + other.N_i_twist,
            [a + b for a, b in zip(self.no_s5, other.no_s5)],
            [a + b for a, b in zip(self.no_s5_twist, other.no_s5_twist)],
            self.inconsistent + other.inconsistent,
        )

    def to_json(self) -> dict:
        return {
            "X": self.X,
            "N": self.N,
            "N_even": self.N_even,
            "N_odd": self.N_odd,
            "N_parity_unknown": self.N_parity_unknown,
            "N_i": {str(k): v for k, v in sorted(self.N_i.items())},
            "N_i_twist": {str(k): v for k, v in sorted(self.N_i_twist.items())},
            "coverage": float(self.coverage),
            "coverage_twist": float(self.coverage_twist),
            "inconsistent_records": self.inconsistent,
        }

    @classmethod
    def synthetic(cls, N_even, N_odd, N0, N1, N0D, N1D, X: int = 0) -> "CensusTally":
        """A fully covered tally with the given counts (others put at rank 2 or 3)."""
        if not (N0 <= N_even and N1 <= N_odd and N1D <= N_even and N0D <= N_odd):
            raise ValueError("inadmissible synthetic counts")
        t = cls(X, N_even + N_odd, N_even, N_odd)
        t.N_i = Counter({0: N0, 1: N1, 2: N_even - N0, 3: N_odd - N1})
        t.N_i_twist = Counter({0: N0D, 1: N1D, 2: N_even - N1D, 3: N_odd - N0D})
        t.N_i, t.N_i_twist = +t.N_i, +t.N_i_twist
        return t


def tally(X: int, entries: Iterable[CensusEntry]) -> CensusTally:
    t = CensusTally(X)
    for e in entries:
        t.add(e)
    return t


# ---------------------------------------------------------------- bounds


def _floor(q: Fraction) -> int:
    return math.floor(q)


def _ceil(q: Fraction) -> int:
    return math.ceil(q)


@dataclass(frozen=True)
class Effective:
    """Counts with every unknown set to its least favourable admissible value."""

    N: int
    N_even: int
    N_odd: int
    N0: int
    N1: int
    N0D: int
    N1D: int


def _effective_for_ntilde(t: CensusTally) -> Effective:
    # unknown-parity members counted as even with s = 0 and twist s = 1;
    # missing data counted toward N_0, N_1 (resp. N_1^D, N_0^D) in their parity class
    u = t.N_parity_unknown
    return Effective(
        t.N,
        t.N_even + u,
        t.N_odd,
        t.N_i[0] + t.no_s5[EVEN] + u,
        t.N_i[1] + t.no_s5[ODD],
        t.N_i_twist[0] + t.no_s5_twist[ODD],
        t.N_i_twist[1] + t.no_s5_twist[EVEN] + u,
    )


def ntilde1_formula(N, N_even, N_odd, N0, N1, p) -> Fraction:
    return Fraction(N, p - 1) - (N_even - N0) - (p + 1) * (N_odd - N1)


def ntilde1_twist_formula(N, N_even, N_odd, N0D, N1D, p) -> Fraction:
    # transcribed as displayed: N_odd pairs with N_0^D and N_even with N_1^D
    return Fraction(N, p - 1) - (N_odd - N0D) - (p + 1) * (N_even - N1D)


@dataclass(frozen=True)
class NTildeBounds:
    p: int
    ntilde1: int
    ntilde1_twist: int
    exact: Fraction
    exact_twist: Fraction
    worst_case: bool
    error_terms: str = "o(X^(5/6)) terms set to 0 (asymptotic-only)"


def bound_ntilde1(t: CensusTally, p: int = 5) -> NTildeBounds:
    e = _effective_for_ntilde(t)
    a = ntilde1_formula(e.N, e.N_even, e.N_odd, e.N0, e.N1, p)
    b = ntilde1_twist_formula(e.N, e.N_even, e.N_odd, e.N0D, e.N1D, p)
    worst = t.coverage < 1 or t.coverage_twist < 1 or t.N_parity_unknown > 0
    return NTildeBounds(p, _ceil(a), _ceil(b), a, b, worst)


@dataclass(frozen=True)
class BoundReport:
    p: int
    ntilde1_upper: int
    ntilde1_twist_upper: int
    nsat_lower: int
    nsat_twist_lower: int
    nsat_second_line: int
    nsat_twist_second_line: int
    combined_chain_lower: int
    combined_lower: int
    exact: dict
    worst_case: bool
    tally_consistent: bool  # both Ntilde upper bounds are >= 0, as counts must be
    error_terms: str = "o(X^(5/6)) terms set to 0 (asymptotic-only)"

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "exact"}
        out["exact"] = {k: str(v) for k, v in self.exact.items()}
        return out


def _chains(N, N_even, N_odd, N0, N1, N0D, N1D, p):
    nt = ntilde1_formula(N, N_even, N_odd, N0, N1, p)
    ntD = ntilde1_twist_formula(N, N_even, N_odd, N0D, N1D, p)
    sat1 = N1 - nt
    sat2 = N_odd - Fraction(N, p - 1) + N_even - N0
    satD1 = N1D - ntD + N0 - N_even
    satD2 = N_even - Fraction(N, p - 1) + N0 - N_even
    return nt, ntD, sat1, sat2, satD1, satD2


def bound_nsat(t: CensusTally, p: int = 5) -> BoundReport:
    u = t.N_parity_unknown
    # least favourable values; N_0 enters the two chains with opposite signs,
    # so the twisted chain takes it at its minimum and the sum takes it as it cancels
    e = _effective_for_ntilde(t)
    nt, ntD, sat1, sat2, _, _ = _chains(e.N, e.N_even, e.N_odd, e.N0, e.N1, e.N0D, e.N1D, p)
    N0_min = t.N_i[0]
    _, _, _, _, satD1, satD2 = _chains(e.N, e.N_even, e.N_odd, N0_min, e.N1, e.N0D, e.N1D, p)
    combined_chain = sat1 + satD1 + (e.N0 - N0_min)  # N_0 cancels in the sum
    prop = Fraction(t.N) * (1 - Fraction(2, p - 1))
    worst = t.coverage < 1 or t.coverage_twist < 1 or u > 0
    exact = {
        "ntilde1": nt,
        "ntilde1_twist": ntD,
        "nsat": sat1,
        "nsat_second_line": sat2,
        "nsat_twist": satD1,
        "nsat_twist_second_line": satD2,
        "combined_chain": combined_chain,
        "combined": prop,
    }
    return BoundReport(
        p,
        _ceil(nt),
        _ceil(ntD),
        max(0, _floor(sat1)),
        max(0, _floor(satD1)),
        max(0, _floor(sat2)),
        max(0, _floor(satD2)),
        max(0, _floor(combined_chain)),
        max(0, _floor(prop)),
        exact,
        worst,
        nt >= 0 and ntD >= 0,
    )


# ------------------------------------------------------- corollaries


@dataclass(frozen=True)
class FractionBound:
    value: Fraction
    alpha: Fraction
    clamped: bool


def odd_rank_one_fraction(avg_selmer, p: int, rho) -> FractionBound:
    """Least fraction of Selmer rank one among odd-parity curves under an average bound.

    Every curve contributes at least 1 to the average, odd ones at least p,
    odd ones of rank >= 3 at least p^3.
    """
    avg, rho = Fraction(avg_selmer), Fraction(rho)
    if avg < 1 or not (0 < rho <= 1):
        raise ValueError("need avg >= 1 and 0 < rho <= 1")
    alpha = (avg - (1 - rho) - p * rho) / ((p**3 - p) * rho)
    if alpha < 0:
        return FractionBound(Fraction(1), alpha, True)
    if alpha > 1:
        return FractionBound(Fraction(0), alpha, True)
    return FractionBound(1 - alpha, alpha, False)


@dataclass(frozen=True)
class ProportionReport:
    ratio: Fraction
    p: int
    D: int
    proportion: Fraction  # scaling |D|^5
    proportion_variant: float  # scaling |D|^(25/6)

    def to_json(self) -> dict:
        return {
            "cF_over_cE": str(self.ratio),
            "p": self.p,
            "D": self.D,
            "proportion_D5": str(self.proportion),
            "proportion_D5_float": float(self.proportion),
            "proportion_D25_6": self.proportion_variant,
        }


def final_proportion(cF, cE, p: int = 5, D: int = -39) -> ProportionReport:
    if cE == 0:
        raise ZeroDivisionError("c(E) is zero")
    r = Fraction(cF) / Fraction(cE)
    factor = 1 - Fraction(2, p - 1)
    main = r * factor / abs(D) ** 5
    variant = float(r * factor) / abs(D) ** (25 / 6)
    return ProportionReport(r, p, D, main, variant)


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    constant: float  # count / X^(5/6) at the top of the ladder
    points: tuple


def fit_growth(Xs, counts) -> GrowthFit:
    xs = [x for x, c in zip(Xs, counts) if c > 0]
    cs = [c for c in counts if c > 0]
    if len(xs) < 2:
        raise ValueError("need two nonzero counts to fit")
    slope, intercept = np.polyfit(np.log(np.array(xs, float)), np.log(np.array(cs, float)), 1)
    return GrowthFit(float(slope), float(intercept), cs[-1] / xs[-1] ** (5 / 6), tuple(zip(Xs, counts)))
