"""Local data at a prime: reduction types, division polynomials, E(Q_l)[p] and E(Q_l)/p."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .arith import (
    PadicApprox,
    hensel_lift_roots,
    is_square_mod_prime,
    poly_add,
    poly_eval,
    poly_mul,
    poly_pow,
    poly_sub,
    valuation,
)
from .curves import CurveModel, count_points_mod, minimal_model, normalize, discriminant

GOOD = "good"
SPLIT = "multiplicative_split"
NONSPLIT = "multiplicative_nonsplit"
ADDITIVE = "additive"


class UnsupportedLocalCase(ValueError):
    pass


class Inconclusive(ArithmeticError):
    """Root separation failed even at the maximum working precision."""


class NotIdentifiable(ValueError):
    pass


class LocalInconsistency(AssertionError):
    """Two independent local computations disagree; indicates a bug."""


# ---------------------------------------------------------- reduction type


@dataclass(frozen=True)
class LocalReduction:
    prime: int
    kind: str
    valuation: int
    split_by_c6: bool | None = None
    split_by_tangent: bool | None = None

    @property
    def is_multiplicative(self) -> bool:
        return self.kind in (SPLIT, NONSPLIT)


def _tangent_split(ainvs, ell: int) -> bool | None:
    """Are the tangent slopes at the node rational over F_ell?"""
    a1, a2, a3, a4, a6 = (a % ell for a in ainvs)
    node = None
    if ell < 5000:
        for x in range(ell):
            for y in range(ell):
                F = (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % ell
                Fx = (a1 * y - 3 * x * x - 2 * a2 * x - a4) % ell
                Fy = (2 * y + a1 * x + a3) % ell
                if F == 0 and Fx == 0 and Fy == 0:
                    node = (x, y)
                    break
            if node:
                break
    if node is None:
        return None
    x0 = node[0]
    c = (3 * x0 + a2) % ell
    return any((T * T + a1 * T - c) % ell == 0 for T in range(ell))


@lru_cache(maxsize=100_000)
def _classify(A: int, B: int, ell: int) -> LocalReduction:
    mm = minimal_model(CurveModel(A, B))
    v = mm.delta_min.valuation(ell)
    if v == 0:
        return LocalReduction(ell, GOOD, 0)
    if mm.c4 % ell == 0:
        return LocalReduction(ell, ADDITIVE, v)
    tangent = _tangent_split(mm.ainvs, ell) if ell < 200 else None
    if ell == 2:
        by_c6 = (-mm.c6) % 8 == 1 if v >= 3 else None
        split = tangent
    else:
        by_c6 = is_square_mod_prime(-mm.c6, ell)
        split = by_c6
        if tangent is not None and tangent != by_c6:
            raise LocalInconsistency(f"split tests disagree for {A},{B} at {ell}")
    return LocalReduction(ell, SPLIT if split else NONSPLIT, v, by_c6, tangent)


def classify_reduction(E: CurveModel, ell: int) -> LocalReduction:
    return _classify(E.A, E.B, ell)


# ---------------------------------------------------- division polynomials


@dataclass(frozen=True)
class DivisionPolynomial:
    p: int
    coefficients: tuple[int, ...]  # constant term first

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x: int, mod: int | None = None) -> int:
        return poly_eval(self.coefficients, x, mod)


@lru_cache(maxsize=4096)
def _division_f(A: int, B: int, n: int) -> tuple[int, ...]:
    # f_n = psi_n for odd n, psi_n / (2y) for even n
    if n == 0:
        return ()
    if n in (1, 2):
        return (1,)
    if n == 3:
        return (-A * A, 12 * B, 6 * A, 0, 3)
    if n == 4:
        return tuple(
            2 * c for c in (-8 * B * B - A**3, -4 * A * B, -5 * A * A, 20 * B, 5 * A, 0, 1)
        )
    F2 = poly_pow((4 * B, 4 * A, 0, 4), 2)
    f = lambda k: _division_f(A, B, k)  # noqa: E731
    m = n // 2
    if n % 2:
        left = poly_mul(f(m + 2), poly_pow(f(m), 3))
        right = poly_mul(f(m - 1), poly_pow(f(m + 1), 3))
        if m % 2 == 0:
            left = poly_mul(F2, left)
        else:
            right = poly_mul(F2, right)
        return poly_sub(left, right)
    inner = poly_sub(
        poly_mul(f(m + 2), poly_pow(f(m - 1), 2)),
        poly_mul(f(m - 2), poly_pow(f(m + 1), 2)),
    )
    return poly_mul(f(m), inner)


def division_polynomial(E: CurveModel, p: int, max_p: int = 13) -> DivisionPolynomial:
    if p % 2 == 0 or p < 3 or p > max_p:
        raise ValueError(f"division polynomial supported for odd 3 <= p <= {max_p}")
    return DivisionPolynomial(p, _division_f(E.A, E.B, p))


# ------------------------------------------------------ group over F_l


def _fl_add(P, Q, A: int, ell: int):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % ell == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, ell) % ell
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, ell) % ell
    x3 = (lam * lam - x1 - x2) % ell
    return (x3, (lam * (x1 - x3) - y1) % ell)


def _mul(n: int, P, add):
    R = None
    while n:
        if n & 1:
            R = add(R, P)
        P = add(P, P)
        n >>= 1
    return R


def _fl_points(A: int, B: int, ell: int) -> list[tuple[int, int]]:
    """Affine points of the smooth locus of y^2 = x^3+Ax+B over F_ell."""
    roots: dict[int, list[int]] = {}
    for y in range(ell):
        roots.setdefault(y * y % ell, []).append(y)
    pts = []
    for x in range(ell):
        fx = (x**3 + A * x + B) % ell
        for y in roots.get(fx, ()):
            if y == 0 and (3 * x * x + A) % ell == 0:
                continue  # the singular point
            pts.append((x, y))
    return pts


# ------------------------------------------------ group over Z / l^2


class ResidueRingGroup:
    """Smooth points of y^2 = x^3 + Ax + B over Z/l^2 with the induced group law.

    Elements: None (identity), ("z", z) with z a nonzero multiple of l
    (kernel of reduction, formal parameter z = -x/y), or an affine (x, y).
    """

    def __init__(self, A: int, B: int, ell: int):
        if ell == 2:
            raise UnsupportedLocalCase("residue-ring group needs odd l")
        self.A, self.B, self.ell = A, B, ell
        self.m = ell * ell

    def on_curve(self, P) -> bool:
        if P is None or P[0] == "z":
            return True
        x, y = P
        return (y * y - x**3 - self.A * x - self.B) % self.m == 0

    def neg(self, P):
        if P is None:
            return None
        if P[0] == "z":
            return ("z", (-P[1]) % self.m)
        return (P[0], (-P[1]) % self.m)

    def _translate(self, P, z: int):
        x, y = P
        m = self.m
        return ((x + 2 * y * z) % m, (y + (3 * x * x + self.A) * z) % m)

    def _kernel_coordinate(self, P, R) -> int:
        """z(P - R) for P congruent to R mod l."""
        m, ell = self.m, self.ell
        xr, yr = R
        if yr % ell:
            z = (P[0] - xr) * pow(2 * yr, -1, m)
        else:
            z = (P[1] - yr) * pow(3 * xr * xr + self.A, -1, m)
        return z % m

    def add(self, P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        m, ell = self.m, self.ell
        if P[0] == "z" and Q[0] == "z":
            z = (P[1] + Q[1]) % m
            return ("z", z) if z else None
        if P[0] == "z":
            P, Q = Q, P
        if Q[0] == "z":
            return self._translate(P, Q[1])
        x1, y1 = P
        x2, y2 = Q
        if (x1 - x2) % ell:
            lam = (y2 - y1) * pow(x2 - x1, -1, m)
        elif (y1 + y2) % ell:
            lam = (x1 * x1 + x1 * x2 + x2 * x2 + self.A) * pow(y1 + y2, -1, m)
        else:
            z = self._kernel_coordinate(P, self.neg(Q))
            return ("z", z) if z else None
        x3 = (lam * lam - x1 - x2) % m
        return (x3, (lam * (x1 - x3) - y1) % m)

    def mul(self, n: int, P):
        if n < 0:
            return self.mul(-n, self.neg(P))
        return _mul(n, P, self.add)

    def elements(self) -> list:
        ell, m = self.ell, self.m
        roots: dict[int, list[int]] = {}
        for y in range(m):
            roots.setdefault(y * y % m, []).append(y)
        out: list = [None]
        out += [("z", ell * s) for s in range(1, ell)]
        for x in range(m):
            fx = (x**3 + self.A * x + self.B) % m
            for y in roots.get(fx, ()):
                if y % ell == 0 and (3 * x * x + self.A) % ell == 0:
                    continue
                out.append((x, y))
        return out


def _order_key(P):
    if P is None:
        return (0, 0, 0)
    if P[0] == "z":
        return (2, P[1], 0)
    return (1, P[0], P[1])


def _label(P) -> str:
    if P is None:
        return "O"
    if P[0] == "z":
        return f"z{P[1]}"
    return f"{P[0]},{P[1]}"


def _cosets(elements, add, mul, p):
    """Partition a finite abelian group into cosets of its p-multiples."""
    sub = {mul(p, g) for g in elements}
    label_of: dict = {}
    labels = []
    for g in sorted(elements, key=_order_key):
        if g in label_of:
            continue
        lab = _label(g)  # first in canonical order is the minimum of its coset
        labels.append(lab)
        for s in sub:
            label_of[add(g, s)] = lab
    return labels, label_of


# ------------------------------------------------------- descriptors


@dataclass(frozen=True)
class LocalQuotientDescriptor:
    ell: int
    p: int
    t: int
    q: int
    coset_labels: tuple[str, ...]
    torsion_image_cosets: tuple[str, ...]
    method: str = ""
    identification: bool = True
    torsion_points: tuple = field(default=(), compare=False, repr=False)

    def to_json(self) -> dict:
        return {
            "ell": self.ell,
            "p": self.p,
            "t": self.t,
            "q": self.q,
            "cosets": list(self.coset_labels),
            "torsion_cosets": list(self.torsion_image_cosets),
        }


def _require_short_minimal(E: CurveModel, ell: int):
    if ell % 2 == 0:
        raise UnsupportedLocalCase("l must be odd")
    if not minimal_model(E).is_minimal_at(ell):
        raise UnsupportedLocalCase(f"short model of {E} is not minimal at {ell}")


@dataclass(frozen=True)
class TorsionData:
    t: int
    points: tuple[tuple[PadicApprox, PadicApprox], ...]  # (x, y) for the t-1 nonzero points
    precision: int


def _torsion_from_roots(E: CurveModel, ell: int, p: int, k: int, exclude_x=None):
    psi = division_polynomial(E, p).coefficients
    res = hensel_lift_roots(psi, ell, k)
    unresolved = [u for u in res.unresolved if exclude_x is None or u.value % ell != exclude_x]
    pts = []
    mod = ell**k
    for r in res.roots:
        if exclude_x is not None and r.value % ell == exclude_x:
            continue
        fx = (r.value**3 + E.A * r.value + E.B) % mod
        if fx % ell == 0:
            raise UnsupportedLocalCase("torsion root with non-unit y^2")
        if not is_square_mod_prime(fx, ell):
            continue
        y = _sqrt_unit(fx, ell, k)
        pts.append((r, PadicApprox(ell, k, y)))
        pts.append((r, PadicApprox(ell, k, -y)))
    return pts, unresolved


def _sqrt_unit(a: int, ell: int, k: int) -> int:
    from .arith import ResidueElement, sqrt_mod

    r = sqrt_mod(ResidueElement(ell**k, a))
    assert r is not None
    return r.value


def local_torsion_data(E: CurveModel, ell: int, p: int, k: int = 8, k_max: int = 64) -> TorsionData:
    _require_short_minimal(E, ell)
    red = classify_reduction(E, ell)
    exclude = None
    if red.kind == GOOD:
        pass
    elif red.kind == NONSPLIT and ell != p:
        exclude = _node_x(E, ell)
    else:
        raise UnsupportedLocalCase(f"torsion via roots needs good or non-split reduction ({red.kind})")
    while True:
        pts, unresolved = _torsion_from_roots(E, ell, p, k, exclude)
        if not unresolved:
            break
        if k >= k_max:
            raise Inconclusive(f"raise precision: {len(unresolved)} clusters unresolved at k={k}")
        k *= 2
    t = 1 + len(pts)
    if red.kind == GOOD and ell == p and count_points_mod(E, p) % p and t != 1:
        raise LocalInconsistency("p-torsion found although p does not divide #E(F_p)")
    if red.kind == NONSPLIT and t != (p if (ell + 1) % p == 0 else 1):
        raise LocalInconsistency("non-split torsion disagrees with #E_ns(F_l) = l+1")
    return TorsionData(t, tuple(pts), k)


def _node_x(E: CurveModel, ell: int) -> int:
    for x in range(ell):
        if (x**3 + E.A * x + E.B) % ell == 0 and (3 * x * x + E.A) % ell == 0:
            return x
    raise LocalInconsistency("no node found")


def local_torsion_order(E: CurveModel, ell: int, p: int, k: int = 8) -> int:
    red = classify_reduction(E, ell)
    if red.kind == SPLIT and ell != p:
        return _split_sizes(E, ell, p)
    return local_torsion_data(E, ell, p, k).t


def _split_sizes(E: CurveModel, ell: int, p: int) -> int:
    """#E(Q_l)[p] = #E(Q_l)/p for split multiplicative l != p via the Tate parameter."""
    mm = minimal_model(E)
    n = mm.delta_min.valuation(ell)
    g = p if (ell - 1) % p == 0 else 1
    unit = (mm.delta_min.value // ell**n) * pow(mm.c4**3, -1, ell) % ell
    pth_power = n % p == 0 and (g == 1 or pow(unit, (ell - 1) // p, ell) == 1)
    return g * (p if pth_power else 1)


def _lift_label(x: int, y: int, A: int, B: int, ell: int) -> tuple[int, int]:
    """Smallest lift mod l^2 of the smooth F_l point (x, y)."""
    m = ell * ell
    fx = x**3 + A * x + B
    if y:
        yy = (y - (y * y - fx) * pow(2 * y, -1, m)) % m
        return (x, yy)
    s = (-(fx % m) // ell) * pow(3 * x * x + A, -1, ell) % ell
    return (x + ell * s, 0)


def local_quotient(E: CurveModel, ell: int, p: int, k: int = 8) -> LocalQuotientDescriptor:
    _require_short_minimal(E, ell)
    red = classify_reduction(E, ell)
    if red.kind == ADDITIVE:
        raise UnsupportedLocalCase("additive reduction")
    if red.kind == SPLIT:
        if ell == p:
            raise UnsupportedLocalCase("split multiplicative at l = p")
        t = _split_sizes(E, ell, p)
        return LocalQuotientDescriptor(ell, p, t, t, (), (), "tate_sizes", identification=False)
    if red.is_multiplicative and ell == p:
        raise UnsupportedLocalCase("multiplicative reduction at l = p")
    tors = local_torsion_data(E, ell, p, k)
    A, B = E.A, E.B
    if ell != p:
        pts = _fl_points(A, B, ell)
        elements = [None] + pts
        add = lambda P, Q: _fl_add(P, Q, A, ell)  # noqa: E731
        mul = lambda n, P: _mul(n, P, add)  # noqa: E731
        sub = {mul(p, g) for g in elements}
        seen: set = set()
        label_of: dict = {}
        labels = []
        for g in elements:
            if g in seen:
                continue
            coset = {add(g, s) for s in sub}
            seen |= coset
            if None in coset:
                lab = "O"
            else:
                lab = "%d,%d" % min(_lift_label(x, y, A, B, ell) for x, y in coset)
            labels.append(lab)
            for c in coset:
                label_of[c] = lab
        tors_labels = {"O"} | {
            label_of[(x.value % ell, y.value % ell)] for x, y in tors.points
        }
        method = "reduction_mod_l"
        expected_q = tors.t
    else:
        G = ResidueRingGroup(A, B, ell)
        labels, label_of = _cosets(G.elements(), G.add, G.mul, p)
        m = ell * ell
        tors_labels = {"O"} | {label_of[(x.value % m, y.value % m)] for x, y in tors.points}
        method = "residue_ring_l_squared"
        expected_q = p * tors.t
    labels = sorted(labels, key=_label_key)
    q = len(labels)
    if q != expected_q:
        raise LocalInconsistency(f"q={q} but t={tors.t} at l={ell}, p={p} for {E}")
    return LocalQuotientDescriptor(
        ell, p, tors.t, q, tuple(labels), tuple(sorted(tors_labels, key=_label_key)), method,
        torsion_points=tors.points,
    )


def _label_key(lab: str):
    if lab == "O":
        return (0, 0, 0)
    if lab.startswith("z"):
        return (2, int(lab[1:]), 0)
    x, y = lab.split(",")
    return (1, int(x), int(y))


def quotient_via_residue_ring(E: CurveModel, ell: int, p: int) -> LocalQuotientDescriptor:
    if ell == p:
        raise UnsupportedLocalCase("residue-ring oracle requires l != p")
    _require_short_minimal(E, ell)
    red = classify_reduction(E, ell)
    if red.kind not in (GOOD, NONSPLIT):
        raise UnsupportedLocalCase(f"residue-ring oracle needs good or non-split reduction, got {red.kind}")
    G = ResidueRingGroup(E.A, E.B, ell)
    elements = G.elements()
    labels, label_of = _cosets(elements, G.add, G.mul, p)
    torsion = [g for g in elements if G.mul(p, g) is None]
    tors_labels = sorted({label_of[g] for g in torsion}, key=_label_key)
    return LocalQuotientDescriptor(
        ell, p, len(torsion), len(labels), tuple(sorted(labels, key=_label_key)),
        tuple(tors_labels), "explicit_group_mod_l_squared",
    )


# ---------------------------------------------------- identification


@dataclass(frozen=True)
class Identification:
    bijection: dict
    torsion_images_match: bool
    root_pairs: tuple[tuple[int, int], ...]
    h: int = 2


def identify_quotients(E: CurveModel, E2: CurveModel, ell: int, p: int) -> Identification:
    m = ell * ell
    if (E.A - E2.A) % ell or (E.B - E2.B) % ell:
        raise NotIdentifiable("curves differ modulo l")
    if (E.A - E2.A) % m or (E.B - E2.B) % m:
        raise NotIdentifiable("not identifiable at h=2; required h undetermined")
    r1, r2 = classify_reduction(E, ell), classify_reduction(E2, ell)
    if r1.kind != r2.kind:
        raise NotIdentifiable("reduction kinds differ")
    if r1.kind in (SPLIT, ADDITIVE):
        raise NotIdentifiable(f"identification not supported for {r1.kind} reduction")
    d1, d2 = local_quotient(E, ell, p), local_quotient(E2, ell, p)
    if d1.coset_labels != d2.coset_labels:
        raise LocalInconsistency("congruent curves produced different residue groups")
    bij = {lab: lab for lab in d1.coset_labels}
    # pair torsion x-coordinates by l-adic proximity (Krasner-style)
    xs1 = sorted({x.value % m for x, _ in d1.torsion_points})
    xs2 = sorted({x.value % m for x, _ in d2.torsion_points})
    pairs = tuple(zip(xs1, xs2))
    match = xs1 == xs2 and d1.torsion_image_cosets == d2.torsion_image_cosets
    return Identification(bij, match, pairs)


# ------------------------------------------------------- local masses


@dataclass(frozen=True)
class MassEstimate:
    ratio: Fraction
    stderr: float
    used: int
    skipped: int
    mode: str


def local_mass(F, ell: int, p: int, sample_budget: int | None = None, k: int = 2, seed: int = 0) -> MassEstimate:
    """Average of q/t over the l-adic invariant set of F (the ratio M_l(V,F)/M_l(F)).

    Exhaustive over residues mod l^k when ``sample_budget`` is None,
    otherwise Monte Carlo over residues mod l^6.
    """
    if ell % 2 == 0:
        raise ValueError("l must be odd")
    accept = F.local_predicate(ell) if F is not None else (lambda A, B: True)
    if sample_budget is None:
        mod = ell**k
        pairs = ((A, B) for A in range(mod) for B in range(mod))
        mode = f"exhaustive_mod_{ell}^{k}"
    else:
        rng = random.Random(f"{seed}:{ell}:{p}")
        mod = ell**6
        pairs = ((rng.randrange(mod), rng.randrange(mod)) for _ in range(sample_budget))
        mode = f"monte_carlo_{sample_budget}"
    vals: list[Fraction] = []
    skipped = 0
    for A, B in pairs:
        if discriminant(A, B) == 0 or not accept(A, B):
            continue
        E = normalize(A, B)
        try:
            d = local_quotient(E, ell, p)
        except (UnsupportedLocalCase, Inconclusive):
            skipped += 1
            continue
        vals.append(Fraction(d.q, d.t))
    if not vals:
        return MassEstimate(Fraction(0), float("nan"), 0, skipped, mode)
    mean = sum(vals, Fraction(0)) / len(vals)
    var = sum((float(v - mean)) ** 2 for v in vals) / max(1, len(vals) - 1)
    return MassEstimate(mean, (var / len(vals)) ** 0.5, len(vals), skipped, mode)
