import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from rankone.curves import CurveModel, count_points_mod, minimal_model, normalize
from rankone.family import all_curves_family, builtin_family_F
from rankone.localdata import (
    GOOD,
    NONSPLIT,
    SPLIT,
    NotIdentifiable,
    ResidueRingGroup,
    UnsupportedLocalCase,
    classify_reduction,
    division_polynomial,
    identify_quotients,
    local_mass,
    local_quotient,
    quotient_via_residue_ring,
)

# ------------------------------------------------------------ oracles


def fp_points(A, B, ell):
    pts = [None]
    for x in range(ell):
        for y in range(ell):
            if (y * y - x**3 - A * x - B) % ell == 0:
                pts.append((x, y))
    return pts


def fp_add(P, Q, A, ell):
    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2 and (y1 + y2) % ell == 0:
        return None
    if P == Q:
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, ell) % ell
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, ell) % ell
    x3 = (lam * lam - x1 - x2) % ell
    return (x3, (lam * (x1 - x3) - y1) % ell)


def fp_torsion_count(A, B, ell, p):
    n = 0
    for P in fp_points(A, B, ell):
        Q = None
        for _ in range(p):
            Q = fp_add(Q, P, A, ell)
        n += Q is None
    return n


def euler_split(A, B, ell):
    c6 = -864 * B
    return pow(-c6 % ell, (ell - 1) // 2, ell) == 1


def tangent_split(A, B, ell):
    # node at a double root x0 of x^3 + Ax + B; the tangent slopes satisfy m^2 = 3 x0
    for x0 in range(ell):
        f = (x0**3 + A * x0 + B) % ell
        df = (3 * x0 * x0 + A) % ell
        if f == 0 and df == 0:
            return pow(3 * x0 % ell, (ell - 1) // 2, ell) == 1
    raise AssertionError("no node")


def psi_oracle(A, B, p):
    x, y = sympy.symbols("x y")
    psi = {0: sympy.Integer(0), 1: sympy.Integer(1), 2: 2 * y}
    psi[3] = 3 * x**4 + 6 * A * x**2 + 12 * B * x - A**2
    psi[4] = 4 * y * (x**6 + 5 * A * x**4 + 20 * B * x**3 - 5 * A**2 * x**2 - 4 * A * B * x - 8 * B**2 - A**3)
    for n in range(5, p + 1):
        m = n // 2
        if n % 2:
            psi[n] = psi[m + 2] * psi[m] ** 3 - psi[m - 1] * psi[m + 1] ** 3
        else:
            psi[n] = (psi[m] / (2 * y)) * (psi[m + 2] * psi[m - 1] ** 2 - psi[m - 2] * psi[m + 1] ** 2)
        psi[n] = sympy.expand(psi[n])
    expr = sympy.expand(psi[p])
    while expr.has(y):
        expr = sympy.expand(expr.subs(y**2, x**3 + A * x + B))
        if expr.has(y):
            expr = sympy.expand(expr.replace(lambda e: e.is_Pow and e.base == y, lambda e: (x**3 + A * x + B) ** (e.exp // 2) * y ** (e.exp % 2)))
    return sympy.Poly(expr, x).all_coeffs()[::-1]


# ----------------------------------------------------------- reduction


def test_reduction_examples():
    r = classify_reduction(CurveModel(1, 1), 31)
    assert (r.kind, r.valuation) == (NONSPLIT, 1)
    r = classify_reduction(CurveModel(1, 1), 5)
    assert (r.kind, r.valuation) == (GOOD, 0)
    assert not euler_split(1, 1, 31)


def test_split_criterion_against_tangent_slopes():
    rng = random.Random("split")
    seen = set()
    n = 0
    while n < 300:
        A, B = rng.randint(-2000, 2000), rng.randint(-2000, 2000)
        if 4 * A**3 + 27 * B**2 == 0:
            continue
        E = normalize(A, B)
        for ell in minimal_model(E).delta_min.primes:
            if ell < 5 or ell > 2000:
                continue
            r = classify_reduction(E, ell)
            if r.kind in (SPLIT, NONSPLIT):
                n += 1
                seen.add(r.kind)
                assert (r.kind == SPLIT) == euler_split(E.A, E.B, ell) == tangent_split(E.A, E.B, ell)
    assert seen == {SPLIT, NONSPLIT}


# ------------------------------------------------- division polynomials


def test_division_polynomial_p3_generic():
    for a, b in [(1, 1), (-7, 3), (0, 1), (5, -2)]:
        psi = division_polynomial(CurveModel(a, b), 3)
        assert psi.coefficients == (-(a**2), 12 * b, 6 * a, 0, 3)
    psi = division_polynomial(CurveModel(0, 1), 3)
    assert psi.coefficients == (0, 12, 0, 0, 3) and psi(0) == 0


@pytest.mark.parametrize("AB", [(1, 1), (-3, 7), (2, -5)])
def test_division_polynomial_p5_against_recurrence(AB):
    psi = division_polynomial(CurveModel(*AB), 5)
    assert psi.degree == 12 and psi.coefficients[-1] == 5
    assert list(psi.coefficients) == [int(c) for c in psi_oracle(*AB, 5)]


def test_division_polynomial_p7_against_recurrence():
    psi = division_polynomial(CurveModel(2, 3), 7)
    assert psi.degree == 24 and psi.coefficients[-1] == 7
    assert list(psi.coefficients) == [int(c) for c in psi_oracle(2, 3, 7)]


# ------------------------------------------------------- local torsion


def test_local_quotient_examples():
    E = CurveModel(1, 1)
    d = local_quotient(E, 5, 5)
    assert (d.t, d.q) == (1, 5)
    d = local_quotient(E, 3, 5)
    assert (d.t, d.q) == (1, 1)
    assert count_points_mod(E, 7) == 5
    d = local_quotient(E, 7, 5)
    assert d.t == fp_torsion_count(1, 1, 7, 5) == 5 and d.q == 5


@settings(max_examples=80, deadline=None)
@given(st.integers(-300, 300), st.integers(-300, 300), st.sampled_from([3, 7, 11, 13, 31, 41]))
def test_torsion_at_good_l_matches_brute_force(A, B, ell):
    if 4 * A**3 + 27 * B**2 == 0:
        return
    E = normalize(A, B)
    mm = minimal_model(E)
    if mm.delta_min.valuation(ell) or not mm.is_minimal_at(ell):
        return
    d = local_quotient(E, ell, 5)
    assert d.t == fp_torsion_count(E.A, E.B, ell, 5)
    assert d.q == d.t
    assert len(d.coset_labels) == d.q


def test_torsion_at_p_takes_both_values():
    rng = random.Random("at-p")
    ts = set()
    for _ in range(400):
        A, B = rng.randint(-500, 500), rng.randint(-500, 500)
        if 4 * A**3 + 27 * B**2 == 0:
            continue
        E = normalize(A, B)
        mm = minimal_model(E)
        if mm.delta_min.valuation(5) or not mm.is_minimal_at(5):
            continue
        a5 = 6 - count_points_mod(E, 5)
        if a5 % 5 == 0:
            continue
        d = local_quotient(E, 5, 5)
        assert d.q == 5 * d.t and d.t in (1, 5)
        if d.t == 5:
            assert count_points_mod(E, 5) % 5 == 0
        ts.add(d.t)
    assert ts == {1, 5}


def test_residue_ring_examples():
    E = CurveModel(1, 1)
    a, b = local_quotient(E, 3, 5), quotient_via_residue_ring(E, 3, 5)
    assert (b.t, b.q) == (1, 1) and a.to_json() == b.to_json()
    assert quotient_via_residue_ring(E, 7, 5).q == local_quotient(E, 7, 5).t
    for (A, B), ell in [((1, 1), 3), ((1, 1), 7), ((2, 5), 11), ((-4, 5), 13)]:
        G = ResidueRingGroup(A, B, ell)
        assert len(G.elements()) == ell * count_points_mod(CurveModel(A, B), ell)


def test_identification_examples():
    E = CurveModel(1, 1)
    assert identify_quotients(E, E, 3, 5).torsion_images_match
    E2 = CurveModel(1 + 9 * 5, 1)
    assert identify_quotients(E, E2, 3, 5).torsion_images_match
    with pytest.raises(NotIdentifiable):
        identify_quotients(E, CurveModel(2, 1), 3, 5)


def test_additive_is_unsupported():
    with pytest.raises(UnsupportedLocalCase):
        local_quotient(CurveModel(3, 9), 3, 5)


# -------------------------------------------------------- local masses


@pytest.mark.parametrize("ell", [3, 7, 11])
def test_local_mass_is_one_away_from_p(ell):
    m = local_mass(builtin_family_F(), ell, 5)
    assert m.ratio == 1 and m.used > 0


def test_local_mass_at_p_for_good_ordinary_family():
    m = local_mass(builtin_family_F(), 5, 5)
    assert m.ratio == Fraction(5) and m.used == 400 and m.skipped == 0


def test_local_mass_monte_carlo_all_curves():
    m = local_mass(all_curves_family(), 3, 5, sample_budget=400, seed=1)
    assert abs(float(m.ratio) - 1) <= 3 * m.stderr + 1e-12
