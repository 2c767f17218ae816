"""Invariant suites run by the verify and pfaffian verbs."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .arith import primes_up_to
from .curves import CurveModel, SingularCurve, is_good_ordinary, minimal_model, normalize
from .family import builtin_family_F, first_members
from .localdata import (
    GOOD,
    NONSPLIT,
    NotIdentifiable,
    classify_reduction,
    identify_quotients,
    local_quotient,
    quotient_via_residue_ring,
)
from .parity import relative_sign_direct, root_number_twist
from .pfaffian import (
    GroupElement,
    SkewQuintuple,
    act,
    contragredient,
    det_exact,
    determinant_form,
    pfaffian4,
    points_mod_p,
    transport_points,
)


def case_rng(seed: int, name: str, index: int) -> random.Random:
    return random.Random(f"{seed}:{name}:{index}")


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    total: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.total > 0 and self.passed == self.total

    def record(self, ok: bool, detail) -> None:
        self.total += 1
        if ok:
            self.passed += 1
        elif len(self.counterexamples) < 20:
            self.counterexamples.append(detail)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "total": self.total,
            "ok": self.ok,
            "counterexamples": self.counterexamples,
        }


def random_curve(rng: random.Random, bound: int = 10**4) -> CurveModel:
    while True:
        try:
            return normalize(rng.randint(-bound, bound), rng.randint(-bound, bound))
        except SingularCurve:
            continue


_SMALL_ODD = [p for p in primes_up_to(60).tolist() if p > 2]


def random_pair(rng: random.Random, p: int, kinds=(GOOD,)) -> tuple[CurveModel, int]:
    """A curve and an odd prime l != p with reduction of one of the given kinds."""
    while True:
        E = random_curve(rng)
        ell = rng.choice([q for q in _SMALL_ODD if q != p])
        if classify_reduction(E, ell).kind in kinds and minimal_model(E).is_minimal_at(ell):
            return E, ell


def random_ordinary_curve(rng: random.Random, p: int) -> CurveModel:
    while True:
        E = random_curve(rng)
        if is_good_ordinary(E, p) and minimal_model(E).is_minimal_at(p):
            return E


def opposite_signs(n: int = 500, D: int = -39) -> SuiteResult:
    res = SuiteResult(f"opposite root numbers on the first {n} family members")
    for E in first_members(builtin_family_F(), n):
        a, b = root_number_twist(E, D), relative_sign_direct(E, D)
        ok = a.applicable and b.applicable and a.relative_sign == -1 and b.relative_sign == -1
        res.record(ok, {"A": E.A, "B": E.B, "chi_route": a.relative_sign, "direct_route": b.relative_sign})
    return res


def kummer_away(n: int, seed: int, p: int = 5) -> SuiteResult:
    res = SuiteResult(f"q = t at good l != {p}")
    for i in range(n):
        E, ell = random_pair(case_rng(seed, "kummer_away", i), p)
        d = local_quotient(E, ell, p)
        res.record(d.q == d.t, {"A": E.A, "B": E.B, "ell": ell, "t": d.t, "q": d.q})
    return res


def kummer_at_p(n: int, seed: int, p: int = 5) -> SuiteResult:
    res = SuiteResult(f"q = {p} t in {{{p}, {p * p}}} at l = p for good ordinary curves")
    for i in range(n):
        E = random_ordinary_curve(case_rng(seed, "kummer_at_p", i), p)
        d = local_quotient(E, p, p)
        res.record(d.q == p * d.t and d.q in (p, p * p), {"A": E.A, "B": E.B, "t": d.t, "q": d.q})
    return res


def residue_ring_equivalence(n: int, seed: int, p: int = 5) -> SuiteResult:
    res = SuiteResult("residue-ring quotient equals local quotient")
    for i in range(n):
        E, ell = random_pair(case_rng(seed, "residue_ring", i), p, (GOOD, NONSPLIT))
        a, b = local_quotient(E, ell, p), quotient_via_residue_ring(E, ell, p)
        ok = (a.t, a.q, a.coset_labels, a.torsion_image_cosets) == (b.t, b.q, b.coset_labels, b.torsion_image_cosets)
        res.record(ok, {"A": E.A, "B": E.B, "ell": ell, "local": a.to_json(), "ring": b.to_json()})
    return res


def perturbation_pairs(n: int, seed: int, p: int = 5) -> SuiteResult:
    res = SuiteResult("identification of mod l^2 perturbations")
    for i in range(n):
        rng = case_rng(seed, "perturb", i)
        while True:
            E, ell = random_pair(rng, p, (GOOD, NONSPLIT))
            m = ell * ell
            A2, B2 = E.A + m * rng.randint(-20, 20), E.B + m * rng.randint(-20, 20)
            try:
                E2 = CurveModel(A2, B2)
            except SingularCurve:
                continue
            if normalize(A2, B2) == E2 and minimal_model(E2).is_minimal_at(ell):
                break
        try:
            ident = identify_quotients(E, E2, ell, p)
            ok = ident.torsion_images_match
            detail = {"A": E.A, "B": E.B, "A2": A2, "B2": B2, "ell": ell}
        except NotIdentifiable as exc:
            ok, detail = False, {"A": E.A, "B": E.B, "A2": A2, "B2": B2, "ell": ell, "error": str(exc)}
        res.record(ok, detail)
    return res


# -------------------------------------------------------------- Pfaffian


def _random_skew4(rng: random.Random, p: int) -> np.ndarray:
    M = np.zeros((4, 4), dtype=np.int64)
    for a in range(4):
        for b in range(a + 1, 4):
            x = rng.randrange(p)
            M[a, b], M[b, a] = x, -x
    return M


def pf_squared(n: int, seed: int, p: int = 97) -> SuiteResult:
    res = SuiteResult("Pf^2 = det on 4x4 skew matrices")
    for i in range(n):
        M = _random_skew4(case_rng(seed, "pf", i), p)
        pf = int(pfaffian4(M))
        res.record(pf * pf == det_exact(M), M.tolist())
    return res


def det_vanishes(n: int, seed: int, p: int = 11) -> SuiteResult:
    res = SuiteResult("det v(t) vanishes identically")
    for i in range(n):
        v = SkewQuintuple.random(p, case_rng(seed, "det", i))
        res.record(not np.any(determinant_form(v)), v.to_json())
    return res


def scalar_trivial(p: int = 11, seed: int = 0) -> SuiteResult:
    res = SuiteResult(f"(lambda I, lambda^-2 I) acts trivially over F_{p}")
    v = SkewQuintuple.random(p, case_rng(seed, "scalar", 0))
    for lam in range(1, p):
        res.record(act(GroupElement.scalar(lam, p), v) == v, lam)
    return res


def equivariance(n: int, seed: int, p: int = 7) -> SuiteResult:
    res = SuiteResult(f"point sets transport under g2^-T over F_{p}")
    for i in range(n):
        rng = case_rng(seed, "equivariance", i)
        v, g = SkewQuintuple.random(p, rng), GroupElement.random(p, rng)
        before, after = points_mod_p(v, p), points_mod_p(act(g, v), p)
        moved = transport_points(before.points, contragredient(g.g2, p), p)
        res.record(moved == set(after.points), {"v": v.to_json(), "g1": g.g1.tolist(), "g2": g.g2.tolist()})
    return res
