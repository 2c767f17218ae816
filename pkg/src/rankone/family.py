"""Congruence-defined families of curves, the special family, and height enumeration."""

from __future__ import annotations

import configparser
import heapq
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .arith import FactorizationError, factor, is_square_mod_prime, primes_up_to
from .curves import CurveModel, count_points_ainvs, discriminant, is_normalized, minimal_model
from .localdata import ADDITIVE, GOOD, NONSPLIT, SPLIT, classify_reduction

GOOD_ORDINARY = "good_ordinary"
MULTIPLICATIVE = "multiplicative"
REDUCTION_KINDS = (GOOD, GOOD_ORDINARY, SPLIT, NONSPLIT, MULTIPLICATIVE, ADDITIVE)


@dataclass(frozen=True)
class ResidueCondition:
    ell: int
    modulus: int
    A_residues: frozenset[int] | None = None  # None means unrestricted
    B_residues: frozenset[int] | None = None

    def holds(self, A: int, B: int) -> bool:
        m = self.modulus
        return (self.A_residues is None or A % m in self.A_residues) and (
            self.B_residues is None or B % m in self.B_residues
        )


@dataclass(frozen=True)
class FamilySpec:
    name: str
    residues: tuple[ResidueCondition, ...] = ()
    squarefree: tuple[int, int] | None = None  # (scale s, sign) with Delta = s * Delta1
    coprime: tuple[int, ...] = ()
    square_mod: tuple[int, ...] = ()
    reductions: tuple[tuple[int, str], ...] = ()
    infinity: str = "either"  # sign of Delta: "+", "-" or "either"

    def __post_init__(self):
        # canonical order so that equal families compare equal
        object.__setattr__(self, "residues", tuple(sorted(self.residues, key=lambda r: (r.ell, r.modulus))))
        object.__setattr__(self, "reductions", tuple(sorted(self.reductions)))
        object.__setattr__(self, "coprime", tuple(sorted(self.coprime)))
        object.__setattr__(self, "square_mod", tuple(sorted(self.square_mod)))
        for rc in self.residues:
            if rc.A_residues is not None and not rc.A_residues:
                raise ValueError("empty residue set")
            if rc.B_residues is not None and not rc.B_residues:
                raise ValueError("empty residue set")
        for _, kind in self.reductions:
            if kind not in REDUCTION_KINDS:
                raise ValueError(f"unknown reduction kind {kind}")
        if self.infinity not in ("+", "-", "either"):
            raise ValueError("infinity must be +, - or either")

    @property
    def is_all(self) -> bool:
        return not (
            self.residues or self.squarefree or self.coprime or self.square_mod or self.reductions
        ) and self.infinity == "either"

    def local_primes(self) -> set[int]:
        out = {rc.ell for rc in self.residues}
        out |= set(self.coprime) | set(self.square_mod) | {ell for ell, _ in self.reductions}
        return out

    def local_predicate(self, ell: int) -> Callable[[int, int], bool]:
        """Conditions of the family that live at the prime ell."""
        res = [rc for rc in self.residues if rc.ell == ell]
        red = [kind for l2, kind in self.reductions if l2 == ell]
        cop = ell in self.coprime
        sq = ell in self.square_mod
        sf = self.squarefree

        def pred(A: int, B: int) -> bool:
            if not all(rc.holds(A, B) for rc in res):
                return False
            D = discriminant(A, B)
            if D == 0:
                return False
            if (cop or sq) and D % ell == 0:
                return False
            if sq and not is_square_mod_prime(D, ell):
                return False
            if sf and ell % 2:
                # only the l-part of the scale is visible at l
                vs = _exponent(sf[0], ell)
                if D % ell**vs or D % ell ** (vs + 2) == 0:
                    return False
            for kind in red:
                if not _reduction_ok(CurveModel(A, B), ell, kind):
                    return False
            return True

        return pred


def _reduction_ok(E: CurveModel, ell: int, kind: str) -> bool:
    red = classify_reduction(E, ell)
    if kind == GOOD_ORDINARY:
        if red.kind != GOOD:
            return False
        mm = minimal_model(E)
        return (ell + 1 - count_points_ainvs(mm.ainvs, ell)) % ell != 0
    if kind == MULTIPLICATIVE:
        return red.is_multiplicative
    return red.kind == kind


def builtin_family_F() -> FamilySpec:
    return FamilySpec(
        name="F",
        residues=(ResidueCondition(2, 32, frozenset({8, 24}), frozenset({16})),),
        squarefree=(256, 1),
        coprime=(3, 5, 13),
        square_mod=(3, 13),
        reductions=((7, NONSPLIT), (5, GOOD_ORDINARY)),
        infinity="+",
    )


def all_curves_family() -> FamilySpec:
    return FamilySpec(name="all")


# ----------------------------------------------------------- membership


@dataclass
class MembershipReport:
    member: bool | None
    verdicts: dict[str, bool | None] = field(default_factory=dict)
    note: str = ""

    def __bool__(self) -> bool:
        return bool(self.member)


def is_member(F: FamilySpec, E: CurveModel, quick: bool = False) -> MembershipReport:
    """All of F's conditions for E, each with its verdict.

    ``quick`` stops at the first failure (used by enumeration).
    """
    rep = MembershipReport(True)
    A, B, D = E.A, E.B, E.delta

    def record(name: str, ok: bool | None) -> bool:
        rep.verdicts[name] = ok
        if ok is False:
            rep.member = False
        elif ok is None and rep.member is not False:
            rep.member = None
        return quick and ok is not True

    for rc in F.residues:
        if record(f"residues@{rc.ell}", rc.holds(A, B)):
            return rep
    if F.infinity != "either":
        if record("sign", (D > 0) == (F.infinity == "+")):
            return rep
    for ell in F.coprime:
        if record(f"coprime@{ell}", D % ell != 0):
            return rep
    for m in F.square_mod:
        if record(f"square_mod@{m}", D % m != 0 and is_square_mod_prime(D, m)):
            return rep
    if F.squarefree:
        s, sign = F.squarefree
        D1, r = divmod(D, s)
        if r or (D1 > 0) != (sign > 0):
            if record("squarefree", False):
                return rep
        else:
            try:
                ok = factor(D1).is_squarefree()
            except FactorizationError as exc:
                ok = None
                rep.note = f"squarefree: {exc}"
            if record("squarefree", ok):
                return rep
    for ell, kind in F.reductions:
        try:
            ok = _reduction_ok(E, ell, kind)
        except FactorizationError as exc:
            ok = None
            rep.note = f"reduction@{ell}: {exc}"
        if record(f"reduction@{ell}={kind}", ok):
            return rep
    return rep


# ---------------------------------------------------------- enumeration


def icbrt(n: int) -> int:
    r = int(round(n ** (1 / 3))) if n > 0 else 0
    while r**3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def box(X: int) -> tuple[int, int]:
    """(Amax, Bmax): 4|A|^3 < X iff |A| <= Amax, 27 B^2 < X iff |B| <= Bmax."""
    if X < 1:
        return (-1, -1)
    Amax = icbrt((X - 1) // 4)
    Bmax = math.isqrt((X - 1) // 27)
    return Amax, Bmax


@dataclass(frozen=True)
class EnumerationShard:
    X: int
    a_lo: int
    a_hi: int  # inclusive
    index: int = 0
    count: int = 1


def make_shards(X: int, n: int) -> list[EnumerationShard]:
    if n < 1:
        raise ValueError("shard count must be >= 1")
    Amax, _ = box(X)
    lo, width = -Amax, 2 * Amax + 1
    out = []
    for i in range(n):
        a = lo + (width * i) // n
        b = lo + (width * (i + 1)) // n - 1
        out.append(EnumerationShard(X, a, b, i, n))
    return out


@lru_cache(maxsize=100_000)
def _fourth_power_primes(A: int) -> tuple[int, ...]:
    if A == 0:
        return ()
    return tuple(ell for ell, e in factor(A).factors if e >= 4)


def _row_ok(A: int, B: int) -> bool:
    if discriminant(A, B) == 0:
        return False
    if A == 0:
        return is_normalized(0, B)
    return all(B % ell**6 for ell in _fourth_power_primes(A))


def _row(A: int, X: int) -> Iterator[CurveModel]:
    """Curves with this A and height < X, in canonical order."""
    _, Bmax = box(X)
    hA = 4 * abs(A) ** 3
    inner = min(Bmax, math.isqrt(hA // 27))  # 27 B^2 <= hA
    for B in range(-inner, inner + 1):
        if _row_ok(A, B):
            yield CurveModel(A, B)
    for b in range(inner + 1, Bmax + 1):
        for B in (-b, b):
            if _row_ok(A, B):
                yield CurveModel(A, B)


def enumerate_curves(
    X: int, F: FamilySpec | None = None, shard: EnumerationShard | None = None
) -> Iterator[CurveModel]:
    """Every normalized curve of height < X, once each, in canonical order."""
    if X < 27:
        raise ValueError("X must be >= 27")
    if F is not None and not F.is_all:
        yield from family_members(X, F, shard)
        return
    Amax, _ = box(X)
    lo, hi = (-Amax, Amax) if shard is None else (shard.a_lo, shard.a_hi)
    rows = [_row(A, X) for A in range(lo, hi + 1)]
    yield from heapq.merge(*rows, key=lambda E: E.sort_key)


def _mobius_sixth_free(n: int) -> int:
    """#{1 <= b <= n : b is sixth-power free}."""
    total, d = 0, 1
    while d**6 <= n:
        mu = _mobius(d)
        if mu:
            total += mu * (n // d**6)
        d += 1
    return total


def _mobius(n: int) -> int:
    f = factor(n).factors if n > 1 else ()
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def count_curves(X: int, shard: EnumerationShard | None = None) -> int:
    """Number of normalized curves with height < X (closed-form per A-row)."""
    Amax, Bmax = box(X)
    lo, hi = (-Amax, Amax) if shard is None else (shard.a_lo, shard.a_hi)
    total = 0
    for A in range(lo, hi + 1):
        if A == 0:
            total += 2 * _mobius_sixth_free(Bmax)
            continue
        primes = _fourth_power_primes(A)
        n = 2 * Bmax + 1
        # inclusion-exclusion over squarefree products of the primes with l^4 | A
        for mask in range(1, 1 << len(primes)):
            d = 1
            bits = 0
            for i, ell in enumerate(primes):
                if mask >> i & 1:
                    d *= ell**6
                    bits += 1
            n += (-1) ** bits * (2 * (Bmax // d) + 1)
        # singular pairs (-3t^2, +-2t^3) that survived normalization
        if A < 0 and A % 3 == 0:
            t = math.isqrt(-A // 3)
            if 3 * t * t == -A and 2 * t**3 <= Bmax:
                for B in (-2 * t**3, 2 * t**3):
                    if all(B % ell**6 for ell in primes):
                        n -= 1
        total += n
    return total


def count_curves_sieve(X: int, shard: EnumerationShard | None = None) -> int:
    """Same count as count_curves, by sieving every (A, B) row with numpy masks."""
    Amax, Bmax = box(X)
    lo, hi = (-Amax, Amax) if shard is None else (shard.a_lo, shard.a_hi)
    Bs = np.arange(-Bmax, Bmax + 1, dtype=np.int64)
    sixth = [ell**6 for ell in primes_up_to(icbrt(math.isqrt(max(Bmax, 0))) + 1).tolist()]
    total = 0
    for A in range(lo, hi + 1):
        keep = (4 * A**3 + 27 * Bs * Bs) != 0
        if A == 0:
            for q in sixth:
                keep &= Bs % q != 0
        else:
            for ell in _fourth_power_primes(A):
                keep &= Bs % ell**6 != 0
        total += int(keep.sum())
    return total


# --------------------------------------------------- family fast path


def _candidate_axis(values: np.ndarray, conds, attr: str) -> np.ndarray:
    keep = np.ones(len(values), dtype=bool)
    for rc in conds:
        allowed = getattr(rc, attr)
        if allowed is not None:
            keep &= np.isin(values % rc.modulus, sorted(allowed))
    return values[keep]


@lru_cache(maxsize=64)
def _ordinary_table(ell: int) -> np.ndarray:
    table = np.zeros((ell, ell), dtype=bool)
    for a in range(ell):
        for b in range(ell):
            if discriminant(a, b) % ell == 0:
                continue
            n = count_points_ainvs((0, 0, 0, a, b), ell)
            table[a, b] = (ell + 1 - n) % ell != 0
    return table


def _prefilter(F: FamilySpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Cheap necessary conditions on a grid; survivors still go through is_member."""
    D = -4 * A**3 - 27 * B**2
    keep = D != 0
    if F.infinity == "+":
        keep &= D > 0
    elif F.infinity == "-":
        keep &= D < 0
    for ell in F.coprime:
        keep &= D % ell != 0
    for m in F.square_mod:
        sq = np.zeros(m, dtype=bool)
        sq[(np.arange(1, m) ** 2) % m] = True
        keep &= sq[D % m]
    if F.squarefree:
        s, sign = F.squarefree
        keep &= D % s == 0
        D1 = D // s
        keep &= (D1 > 0) if sign > 0 else (D1 < 0)
        for ell in (2, 3, 5, 7, 11, 13):
            keep &= D1 % (ell * ell) != 0
    for ell, kind in F.reductions:
        if ell < 5:
            continue
        good = D % ell != 0
        mult = ~good & ((48 * A) % ell != 0)
        if kind == GOOD:
            keep &= good
        elif kind == GOOD_ORDINARY:
            keep &= good & _ordinary_table(ell)[A % ell, B % ell]
        elif kind in (SPLIT, NONSPLIT, MULTIPLICATIVE):
            keep &= mult
            if kind != MULTIPLICATIVE:
                sq = np.zeros(ell, dtype=bool)
                sq[(np.arange(ell) ** 2) % ell] = True
                split = sq[(864 * B) % ell]
                keep &= split if kind == SPLIT else ~split
        elif kind == ADDITIVE:
            keep &= ~good & ~mult
    return keep


def family_members(
    X: int, F: FamilySpec, shard: EnumerationShard | None = None
) -> list[CurveModel]:
    """Members of F with height < X, sorted canonically."""
    Amax, Bmax = box(X)
    lo, hi = (-Amax, Amax) if shard is None else (shard.a_lo, shard.a_hi)
    As = _candidate_axis(np.arange(lo, hi + 1, dtype=np.int64), F.residues, "A_residues")
    Bs = _candidate_axis(np.arange(-Bmax, Bmax + 1, dtype=np.int64), F.residues, "B_residues")
    if Amax > 2 * 10**5 or Bmax > 3 * 10**9:
        raise ValueError("height bound exceeds the int64 fast path")
    out = []
    chunk = max(1, 2_000_000 // max(1, len(Bs)))
    for i in range(0, len(As), chunk):
        Ag, Bg = np.meshgrid(As[i : i + chunk], Bs, indexing="ij")
        Ag, Bg = Ag.ravel(), Bg.ravel()
        keep = _prefilter(F, Ag, Bg)
        for A, B in zip(Ag[keep].tolist(), Bg[keep].tolist()):
            if not _row_ok(A, B):
                continue
            E = CurveModel(A, B)
            if is_member(F, E, quick=True).member:
                out.append(E)
    out.sort(key=lambda E: E.sort_key)
    return out


def count_family(X: int, F: FamilySpec, shard: EnumerationShard | None = None) -> int:
    if F.is_all:
        return count_curves(X, shard)
    return len(family_members(X, F, shard))


def first_members(F: FamilySpec, n: int, X0: int = 10**7) -> list[CurveModel]:
    """The first n members of F in canonical order."""
    X = X0
    while True:
        members = family_members(X, F)
        if len(members) >= n:
            return members[:n]
        X *= 4


def find_member(F: FamilySpec) -> CurveModel:
    return first_members(F, 1)[0]


# ------------------------------------------------------------ densities


@dataclass(frozen=True)
class DensityReport:
    ell: int
    depth: int
    congruence: Fraction
    squarefree_factor: Fraction
    reduction_factor: Fraction
    error: Fraction = Fraction(0)

    @property
    def combined(self) -> Fraction:
        return self.congruence * self.squarefree_factor * self.reduction_factor


def local_density(F: FamilySpec, ell: int, k: int = 2) -> DensityReport:
    """Haar measure of F's conditions at ell, by counting residues."""
    need = max([1] + [_exponent(rc.modulus, ell) for rc in F.residues if rc.ell == ell])
    if k < need:
        raise ValueError(f"depth {k} below the conditions' exponent {need}")
    res = [rc for rc in F.residues if rc.ell == ell]
    cop = ell in F.coprime
    sq = ell in F.square_mod
    red = [kind for l2, kind in F.reductions if l2 == ell]
    sf = F.squarefree is not None and ell % 2 == 1
    mod = ell**k
    base = hit_sf = hit_red = 0
    # reduction and squarefree conditions are decided mod l^2
    sub = ell ** max(k, 2) if (red or sf) else mod
    for A in range(sub):
        for B in range(sub):
            if not all(rc.holds(A, B) for rc in res):
                continue
            D = discriminant(A, B)
            if (cop or sq) and D % ell == 0:
                continue
            if sq and not is_square_mod_prime(D, ell):
                continue
            base += 1
            s_ok = not sf or D % (ell * ell) != 0
            hit_sf += s_ok
            if s_ok and red:
                hit_red += _reduction_at_residue(A, B, ell, red)
    total = sub * sub
    congruence = Fraction(base, total)
    sq_factor = Fraction(hit_sf, base) if base and sf else Fraction(1)
    red_factor = Fraction(hit_red, hit_sf) if hit_sf and red else Fraction(1)
    return DensityReport(ell, k, congruence, sq_factor, red_factor)


def _reduction_at_residue(A: int, B: int, ell: int, kinds) -> bool:
    """Reduction conditions for the residue class (A, B) mod l^2, l odd, l >= 5."""
    D = discriminant(A, B)
    for kind in kinds:
        good = D % ell != 0
        mult = not good and (48 * A) % ell != 0
        if kind == GOOD and not good:
            return False
        if kind == GOOD_ORDINARY and not (good and _ordinary_table(ell)[A % ell, B % ell]):
            return False
        if kind == MULTIPLICATIVE and not mult:
            return False
        if kind in (SPLIT, NONSPLIT):
            if not mult:
                return False
            split = is_square_mod_prime(864 * B, ell)
            if split != (kind == SPLIT):
                return False
        if kind == ADDITIVE and (good or mult):
            return False
    return True


def _exponent(m: int, ell: int) -> int:
    k = 0
    while m % ell == 0:
        m //= ell
        k += 1
    return k


# ------------------------------------------------------- serialization


def family_to_text(F: FamilySpec) -> str:
    cp = configparser.ConfigParser()
    cp["family"] = {
        "name": F.name,
        "infinity": F.infinity,
        "coprime": ", ".join(map(str, F.coprime)),
        "square_mod": ", ".join(map(str, F.square_mod)),
    }
    if F.squarefree:
        cp["family"]["squarefree_scale"] = str(F.squarefree[0])
        cp["family"]["squarefree_sign"] = "+" if F.squarefree[1] > 0 else "-"
    primes = sorted({rc.ell for rc in F.residues} | {ell for ell, _ in F.reductions})
    for ell in primes:
        sec = {}
        for rc in F.residues:
            if rc.ell == ell:
                sec["modulus"] = str(rc.modulus)
                if rc.A_residues is not None:
                    sec["A"] = ", ".join(map(str, sorted(rc.A_residues)))
                if rc.B_residues is not None:
                    sec["B"] = ", ".join(map(str, sorted(rc.B_residues)))
        kinds = [kind for l2, kind in F.reductions if l2 == ell]
        if kinds:
            sec["reduction"] = ", ".join(kinds)
        cp[f"prime {ell}"] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in s.replace(",", " ").split())


def family_from_text(text: str) -> FamilySpec:
    cp = configparser.ConfigParser()
    cp.read_string(text)
    if "family" not in cp:
        raise ValueError("missing [family] section")
    fam = cp["family"]
    squarefree = None
    if "squarefree_scale" in fam:
        squarefree = (int(fam["squarefree_scale"]), -1 if fam.get("squarefree_sign", "+") == "-" else 1)
    residues, reductions = [], []
    for name in cp.sections():
        if not name.startswith("prime "):
            continue
        ell = int(name.split()[1])
        sec = cp[name]
        if "modulus" in sec:
            A = frozenset(_ints(sec["a"])) if "a" in sec else None
            B = frozenset(_ints(sec["b"])) if "b" in sec else None
            residues.append(ResidueCondition(ell, int(sec["modulus"]), A, B))
        for kind in sec.get("reduction", "").replace(",", " ").split():
            reductions.append((ell, kind))
    return FamilySpec(
        name=fam.get("name", "custom"),
        residues=tuple(residues),
        squarefree=squarefree,
        coprime=_ints(fam.get("coprime", "")),
        square_mod=_ints(fam.get("square_mod", "")),
        reductions=tuple(reductions),
        infinity=fam.get("infinity", "either"),
    )
