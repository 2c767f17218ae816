import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from rankone.arith import (
    FactorizationError,
    ResidueElement,
    UnsupportedModulus,
    factor,
    hensel_lift_roots,
    is_square_mod_prime,
    kronecker,
    primes_up_to,
    sqrt_mod,
    squarefree_part,
)


def test_factor_examples():
    f = factor(2**8 * 31)
    assert f.sign == 1 and f.factors == ((2, 8), (31, 1)) and f.value == 7936
    f = factor(-31)
    assert f.sign == -1 and f.factors == ((31, 1),)


def test_factor_semiprime():
    p, q = sympy.prevprime(10**5), sympy.nextprime(10**5)
    assert factor(p * q).factors == ((p, 1), (q, 1))


def test_factor_budget_error():
    p, q = sympy.nextprime(10**15), sympy.nextprime(2 * 10**15)
    with pytest.raises(FactorizationError):
        factor(p * q, rho_budget=1)


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=-(10**14), max_value=10**14).filter(lambda n: n != 0))
def test_factor_against_sympy(n):
    f = factor(n)
    assert f.value == n
    assert dict(f.factors) == sympy.factorint(abs(n))


@settings(max_examples=300, deadline=None)
@given(st.integers(-(10**6), 10**6), st.integers(1, 10**4).map(lambda k: 2 * k + 1))
def test_kronecker_matches_jacobi_on_odd_moduli(a, n):
    assert kronecker(a, n) == sympy.jacobi_symbol(a, n)


def test_character_table():
    assert kronecker(-39, 7) == -1
    assert kronecker(-39, 2) == 1
    assert kronecker(-39, 5) == 1
    assert all(kronecker(D, 1) == 1 for D in range(-50, 50))


def test_kronecker_at_two():
    # (a/2) = 0 for even a, +1 for a = +-1 mod 8, -1 for a = +-3 mod 8
    for a in range(-40, 40):
        want = 0 if a % 2 == 0 else (1 if a % 8 in (1, 7) else -1)
        assert kronecker(a, 2) == want


def test_sqrt_mod_examples():
    r = sqrt_mod(ResidueElement(31, 10))
    assert r.value in (14, 17)
    assert sqrt_mod(ResidueElement(7**3, 1)).value == 1
    assert sqrt_mod(ResidueElement(7, 3)) is None
    with pytest.raises(UnsupportedModulus):
        sqrt_mod(ResidueElement(8, 1))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([(3, 4), (5, 3), (7, 3), (11, 2), (13, 2), (31, 2), (97, 1)]), st.integers(0, 10**6))
def test_sqrt_mod_is_a_root_or_none(ell_k, a):
    ell, k = ell_k
    m = ell**k
    r = sqrt_mod(ResidueElement(m, a))
    squares = {x * x % m for x in range(m)}
    if r is None:
        assert a % m not in squares
    else:
        assert r.value**2 % m == a % m


def test_is_square_mod_prime():
    for p in (3, 7, 13, 31):
        squares = {x * x % p for x in range(1, p)}
        for a in range(1, p):
            assert is_square_mod_prime(a, p) == (a in squares)


def test_hensel_examples():
    res = hensel_lift_roots((-1, 0, 1), 7, 3)
    assert sorted(r.value for r in res) == [1, 342]
    res = hensel_lift_roots((-10, 0, 1), 31, 2)
    vals = sorted(r.value for r in res)
    assert [v % 31 for v in vals] == [14, 17]
    assert all((v * v - 10) % 31**2 == 0 for v in vals)
    res = hensel_lift_roots((0, 0, 1), 5, 2, refine=False)
    assert len(res.unresolved) == 1 and res.unresolved[0].value == 0


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(-30, 30), min_size=2, max_size=5).filter(lambda c: c[-1] % 5 != 0),
    st.sampled_from([3, 5, 7]),
)
def test_hensel_simple_roots_against_brute_force(coeffs, ell):
    if all(c % ell == 0 for c in coeffs):
        return
    k = 3
    m = ell**k
    res = hensel_lift_roots(tuple(coeffs), ell, k, refine=False)
    f = lambda x: sum(c * x**i for i, c in enumerate(coeffs))  # noqa: E731
    df = lambda x: sum(i * c * x ** (i - 1) for i, c in enumerate(coeffs) if i)  # noqa: E731
    simple = {x for x in range(m) if f(x) % m == 0 and df(x) % ell}
    got = {r.value for r in res if r.precision == k}
    assert simple <= got
    assert all(f(v) % m == 0 for v in got)


def test_primes_and_squarefree_part():
    assert primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert squarefree_part(2**3 * 3**2 * 5) == 10
