"""Root numbers, the quadratic-twist sign relation, Selmer parity and the rank-one criteria."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .arith import factor, is_square_mod_prime, kronecker, primes_up_to
from .curves import CurveModel, count_points_ainvs, is_good_ordinary, minimal_model, twist
from .localdata import (
    ADDITIVE,
    GOOD,
    NONSPLIT,
    SPLIT,
    UnsupportedLocalCase,
    classify_reduction,
    division_polynomial,
    local_quotient,
)

HOLDS = "holds"
FAILS = "fails"
NEEDS = "needs-external-data"
GUARANTEED = "guaranteed-by-family"

DEFAULT_P = 5
DEFAULT_D = -39
DEFAULT_Q = 7


@dataclass(frozen=True)
class RootNumberReport:
    w: int | None
    local_factors: tuple[tuple[int, int | None], ...]
    method: str
    applicable: bool
    reason: str = ""
    relative_sign: int | None = None  # w(E^D)/w(E) for twist reports


# ----------------------------------------------------- local root numbers


def local_root_number(E: CurveModel, ell: int) -> int | None:
    """w_l(E) at a finite prime, or None when no supported rule applies."""
    red = classify_reduction(E, ell)
    if red.kind == GOOD:
        return 1
    if red.kind == SPLIT:
        return -1
    if red.kind == NONSPLIT:
        return 1
    if ell >= 5:
        mm = minimal_model(E)
        v = red.valuation
        vc4 = math.inf if mm.c4 == 0 else _val(mm.c4, ell)
        if 3 * vc4 < v:  # potentially multiplicative
            return kronecker(-1, ell)
        e = 12 // math.gcd(12, v)
        if e in (2, 6):
            return kronecker(-1, ell)
        if e == 3:
            return kronecker(-3, ell)
        if e == 4:
            return kronecker(-2, ell)
        return None
    if ell == 3:
        # a quadratic twist of a good or multiplicative curve by a character
        # ramified at 3 has local sign chi(-1) = (-1/3)
        for d in (-3, 3):
            if classify_reduction(twist(E, d), 3).kind != ADDITIVE:
                return kronecker(-1, 3)
    return None


def _val(n: int, ell: int) -> int:
    v = 0
    while n % ell == 0:
        n //= ell
        v += 1
    return v


def root_number_semistable(E: CurveModel) -> RootNumberReport:
    mm = minimal_model(E)
    factors = []
    for ell in mm.delta_min.primes:
        red = classify_reduction(E, ell)
        if red.kind == ADDITIVE:
            return RootNumberReport(None, tuple(factors), "semistable_product", False, f"additive at {ell}")
        factors.append((ell, -1 if red.kind == SPLIT else 1))
    w = -math.prod(f for _, f in factors)
    return RootNumberReport(w, tuple(factors), "semistable_product", True)


def root_number(E: CurveModel) -> RootNumberReport:
    """w(E) from local factors; falls back to None when a factor is unsupported."""
    rep = root_number_semistable(E)
    if rep.applicable:
        return rep
    factors = []
    for ell in minimal_model(E).delta_min.primes:
        factors.append((ell, local_root_number(E, ell)))
    if any(f is None for _, f in factors):
        bad = [ell for ell, f in factors if f is None]
        return RootNumberReport(None, tuple(factors), "local_product", False, f"unsupported local factor at {bad}")
    return RootNumberReport(-math.prod(f for _, f in factors), tuple(factors), "local_product", True)


# ---------------------------------------------------------- twist signs


def _twist_preconditions(E: CurveModel, D: int) -> str:
    if D == 1:
        return ""
    if kronecker(D, 2) != 1:
        return "D is not a square in Q_2; the 2-adic factor does not cancel"
    mm = minimal_model(E)
    odd = [ell for ell in mm.delta_min.primes if ell != 2]
    if any(D % ell == 0 for ell in odd):
        return "gcd(D, N_E) > 1"
    return ""


def root_number_twist(E: CurveModel, D: int) -> RootNumberReport:
    """w(E^D) through the relation w(E^D) = w(E) kronecker(D, -N_E).

    For D = 1 mod 8 the character is trivial at 2, so only the odd part of
    the conductor enters and the relative sign is exact even when the
    exponent of N_E at 2 is not computed.
    """
    reason = _twist_preconditions(E, D)
    if reason:
        return RootNumberReport(None, (), "twist_relation", False, reason)
    mm = minimal_model(E)
    odd = math.prod(ell for ell in mm.delta_min.primes if ell != 2)  # odd part of N_E, squarefree here
    for ell in mm.delta_min.primes:
        if ell != 2 and classify_reduction(E, ell).kind == ADDITIVE:
            return RootNumberReport(None, (), "twist_relation", False, f"additive at {ell}")
    rel = kronecker(D, -odd)
    base = root_number(E)
    w = base.w * rel if base.w is not None else None
    return RootNumberReport(w, base.local_factors, "twist_relation", True, base.reason, rel)


def relative_sign_direct(E: CurveModel, D: int) -> RootNumberReport:
    """w(E) w(E^D) as a product of local factors read off both minimal models.

    The archimedean factors cancel, and the 2-adic factors cancel because
    E and E^D are isomorphic over Q_2 when D is a square there.
    """
    reason = _twist_preconditions(E, D)
    if reason:
        return RootNumberReport(None, (), "direct_local_product", False, reason)
    Et = twist(E, D)
    primes = set(minimal_model(E).delta_min.primes) | set(minimal_model(Et).delta_min.primes)
    factors = []
    for ell in sorted(primes - {2}):
        a, b = local_root_number(E, ell), local_root_number(Et, ell)
        factors.append((ell, None if a is None or b is None else a * b))
    if any(f is None for _, f in factors):
        return RootNumberReport(None, tuple(factors), "direct_local_product", False, "unsupported local factor")
    rel = math.prod(f for _, f in factors)
    return RootNumberReport(None, tuple(factors), "direct_local_product", True, "", rel)


# ------------------------------------------------------- Selmer parity


def selmer_parity(w: int, t: int) -> int:
    """Parity of s_p given the root number and the p-torsion rank t_p."""
    if w not in (1, -1):
        raise ValueError("w must be +-1")
    return (t + (0 if w == 1 else 1)) % 2


def _integer_roots_cubic(A: int, C: int) -> list[int]:
    """Integer roots of x^3 + A x + C."""
    def f(x):
        return x**3 + A * x + C

    bound = 1 + max(abs(A), abs(C))
    cuts = [-bound, bound]
    if A < 0:
        r = math.isqrt(-A // 3)
        cuts = [-bound, -r - 1, -r, r, r + 1, bound]
    roots = set()
    pts = sorted(set(cuts))
    for lo, hi in zip(pts, pts[1:]):
        for x in (lo, hi):
            if f(x) == 0:
                roots.add(x)
        flo, fhi = f(lo), f(hi)
        if flo == 0 or fhi == 0 or (flo > 0) == (fhi > 0):
            continue
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if (f(mid) > 0) == (flo > 0):
                lo = mid
            else:
                hi = mid
        for x in (lo, hi):
            if f(x) == 0:
                roots.add(x)
    for x in range(-3, 4):  # tiny interval edge cases around the turning points
        if f(x) == 0:
            roots.add(x)
    return sorted(roots)


def rational_torsion_rank(E: CurveModel, p: int = DEFAULT_P) -> int:
    """dim E(Q)[p] over F_p for odd p (0 or 1 over Q)."""
    # Nagell-Lutz: torsion points have integral x, y with y = 0 or y^2 | 4A^3 + 27B^2
    psi = division_polynomial(E, p)
    disc = abs(4 * E.A**3 + 27 * E.B**2)
    ys = [1]
    for ell, e in factor(disc).factors:
        ys = [y * ell**k for y in ys for k in range(e // 2 + 1)]
    for y in ys:
        for x in _integer_roots_cubic(E.A, E.B - y * y):
            if psi(x) == 0:
                return 1
    return 0


# ---------------------------------------------------- criteria report


@dataclass(frozen=True)
class SelmerRecord:
    A: int
    B: int
    s5: int | None = None
    s5_twist: int | None = None
    restriction_coset: str | None = None
    restriction_coset_twist: str | None = None


def _opt_int(s):
    s = (s or "").strip()
    return int(s) if s else None


def _opt_str(s):
    s = (s or "").strip()
    return s or None


def read_selmer_csv(path) -> dict[tuple[int, int], SelmerRecord]:
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"A", "B"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"Selmer CSV lacks columns {sorted(missing)}")
        for row in reader:
            rec = SelmerRecord(
                int(row["A"]),
                int(row["B"]),
                _opt_int(row.get("s5")),
                _opt_int(row.get("s5_twist")),
                _opt_str(row.get("restriction_coset")),
                _opt_str(row.get("restriction_coset_twist")),
            )
            out[(rec.A, rec.B)] = rec
    return out


@dataclass
class CriteriaReport:
    which: str
    verdicts: dict[str, str]
    support: dict = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        return all(v in (HOLDS, GUARANTEED) for v in self.verdicts.values())


def irreducibility_certificate(E: CurveModel, p: int = DEFAULT_P, bound: int = 500) -> int | None:
    """A good prime l whose Frobenius has no eigenvalue in F_p, else None.

    Such an l shows E[p] has no Galois-stable line, i.e. is irreducible.
    """
    mm = minimal_model(E)
    for ell in primes_up_to(bound).tolist():
        if ell == p or mm.delta_min.valuation(ell):
            continue
        a = ell + 1 - count_points_ainvs(mm.ainvs, ell)
        disc = (a * a - 4 * ell) % p
        if disc and not is_square_mod_prime(disc, p):
            return ell
    return None


def _ramified_mod_p(E: CurveModel, q: int, p: int) -> bool | None:
    """Is E[p] ramified at q (multiplicative reduction, q != p)?"""
    red = classify_reduction(E, q)
    if red.kind in (SPLIT, NONSPLIT):
        return red.valuation % p != 0
    if red.kind == GOOD:
        return False
    return None


def check_criteria(
    E: CurveModel,
    which: str = "crit1",
    selmer: SelmerRecord | None = None,
    p: int = DEFAULT_P,
    D: int = DEFAULT_D,
    q: int = DEFAULT_Q,
) -> CriteriaReport:
    if which not in ("crit1", "crit2"):
        raise ValueError("which must be crit1 or crit2")
    mm = minimal_model(E)
    v: dict[str, str] = {}
    sup: dict = {}

    # (a) squarefree conductor with two odd prime factors; additive primes have exponent >= 2
    additive = [ell for ell in mm.delta_min.primes if classify_reduction(E, ell).kind == ADDITIVE]
    odd_primes = [ell for ell in mm.delta_min.primes if ell != 2]
    sup["conductor_odd_part"] = mm.conductor_odd_part
    sup["additive_primes"] = additive
    ok_a = not additive and len(odd_primes) >= 2
    if which == "crit2":
        ok_a = ok_a and all(D % ell for ell in mm.delta_min.primes)
    v["a"] = HOLDS if ok_a else FAILS

    # (b) good ordinary at p
    ordinary = is_good_ordinary(E, p)
    if mm.delta_min.valuation(p) == 0:
        sup["a_p"] = p + 1 - count_points_ainvs(mm.ainvs, p)
    v["b"] = HOLDS if ordinary else FAILS

    # (c) irreducibility by a Frobenius certificate; crit2 adds ramification at q inert in K
    cert = irreducibility_certificate(E, p)
    sup["irreducibility_certificate"] = cert
    ok_c: bool | None = True if cert is not None else None
    if which == "crit2":
        ram = _ramified_mod_p(E, q, p)
        inert = kronecker(D, q) == -1
        sup["ramified_at_q"] = ram
        sup["q_inert"] = inert
        if ram is None:
            ok_c = None if ok_c else ok_c
        elif not (ram and inert):
            ok_c = False
    v["c"] = NEEDS if ok_c is None else (HOLDS if ok_c else FAILS)

    # (d), (e) only from ingested Selmer data
    v["d"], v["e"] = NEEDS, NEEDS
    if selmer is not None:
        if which == "crit1" and selmer.s5 is not None:
            v["d"] = HOLDS if selmer.s5 == 1 else FAILS
        if which == "crit2" and selmer.s5 is not None and selmer.s5_twist is not None:
            v["d"] = HOLDS if (selmer.s5 == 0 and selmer.s5_twist == 1) else FAILS
        coset = selmer.restriction_coset if which == "crit1" else selmer.restriction_coset_twist
        if coset is not None:
            target = E if which == "crit1" else twist(E, D)
            try:
                desc = local_quotient(target, p, p)
            except UnsupportedLocalCase as exc:
                sup["e_error"] = str(exc)
            else:
                sup["torsion_image_cosets"] = list(desc.torsion_image_cosets)
                if coset in desc.coset_labels:
                    v["e"] = FAILS if coset in desc.torsion_image_cosets else HOLDS
                else:
                    sup["e_error"] = f"unknown coset label {coset}"
        sup["selmer"] = {"s5": selmer.s5, "s5_twist": selmer.s5_twist}
    return CriteriaReport(which, v, sup)
