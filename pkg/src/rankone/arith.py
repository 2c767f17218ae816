"""Exact integer, modular and fixed-precision l-adic arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

TRIAL_LIMIT = 10**6
DEFAULT_RHO_BUDGET = 2_000_000


class FactorizationError(ArithmeticError):
    """Raised when a composite cofactor survives the effort budget."""

    def __init__(self, n: int, residual: int):
        super().__init__(f"could not factor {n}: residual composite {residual}")
        self.n = n
        self.residual = residual


class UnsupportedModulus(ValueError):
    pass


class PrecisionExhausted(ArithmeticError):
    pass


# ---------------------------------------------------------------- primes


@lru_cache(maxsize=None)
def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve).astype(np.int64)


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 3.3e24, overwhelmingly reliable above."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


# ---------------------------------------------------------- factorization


@dataclass(frozen=True)
class FactoredInteger:
    sign: int
    factors: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factor list {self.factors}")
            last = p

    @property
    def value(self) -> int:
        out = self.sign
        for p, e in self.factors:
            out *= p**e
        return out

    def valuation(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factors)

    def odd_part(self) -> "FactoredInteger":
        return FactoredInteger(self.sign, tuple(f for f in self.factors if f[0] != 2))

    def as_list(self) -> list[list[int]]:
        return [[p, e] for p, e in self.factors]

    def __str__(self) -> str:
        body = " * ".join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors)
        return ("-" if self.sign < 0 else "") + (body or "1")


def _pollard_brent(n: int, seed: int, budget: int) -> int | None:
    """One deterministic Brent run; returns a nontrivial factor or None."""
    y, c, m = seed % n, (2 * seed + 1) % n, 128
    g = r = q = 1
    x = ys = y
    steps = 0
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        r *= 2
        steps += r
        if steps > budget:
            return None
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
    return g if 1 < g < n else None


def _split_large(n: int, budget: int, out: dict[int, int], original: int):
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack.extend([r, r])
            continue
        d = None
        for seed in range(1, 40):
            d = _pollard_brent(m, seed, budget)
            if d:
                break
        if not d:
            raise FactorizationError(original, m)
        stack.extend([d, m // d])


def factor(n: int, rho_budget: int = DEFAULT_RHO_BUDGET) -> FactoredInteger:
    """Trial division up to 1e6, then Brent's variant of Pollard rho."""
    if n == 0:
        raise ValueError("cannot factor 0")
    sign = 1 if n > 0 else -1
    m = abs(n)
    out: dict[int, int] = {}
    for p in (2, 3, 5):
        while m % p == 0:
            m //= p
            out[p] = out.get(p, 0) + 1
    if m > 1:
        limit = min(TRIAL_LIMIT, math.isqrt(m))
        primes = primes_up_to(TRIAL_LIMIT)
        primes = primes[3 : np.searchsorted(primes, limit, side="right")]
        if len(primes):
            if m < 2**63:
                hits = primes[(np.int64(m) % primes) == 0]
            else:
                hits = [int(p) for p in primes if m % int(p) == 0]
            for p in hits:
                p = int(p)
                while m % p == 0:
                    m //= p
                    out[p] = out.get(p, 0) + 1
    if m > 1:
        if m < TRIAL_LIMIT * TRIAL_LIMIT or is_prime(m):
            out[m] = out.get(m, 0) + 1
        else:
            _split_large(m, rho_budget, out, n)
    return FactoredInteger(sign, tuple(sorted(out.items())))


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def squarefree_part(n: int) -> int:
    f = factor(n)
    out = f.sign
    for p, e in f.factors:
        if e % 2:
            out *= p
    return out


# ----------------------------------------------------------- kronecker


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        if a in (1, -1):
            return 1
        if a == 0:
            raise ValueError("kronecker(0, 0) undefined")
        return 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n), n odd positive
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


# -------------------------------------------------------------- residues


@dataclass(frozen=True)
class ResidueElement:
    modulus: int
    value: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        object.__setattr__(self, "value", self.value % self.modulus)


def prime_power(m: int) -> tuple[int, int]:
    """Return (l, k) with m = l^k, or raise."""
    f = factor(m)
    if len(f.factors) != 1:
        raise UnsupportedModulus(f"{m} is not a prime power")
    return f.factors[0]


def _sqrt_mod_prime(a: int, p: int) -> int | None:
    a %= p
    if a == 0 or p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def _sqrt_unit_prime_power(u: int, p: int, k: int) -> int | None:
    r = _sqrt_mod_prime(u, p)
    if r is None:
        return None
    mod = p
    for _ in range(1, k):
        mod *= p
        # Newton step r <- r - (r^2 - u)/(2r)
        r = (r - (r * r - u) * pow(2 * r, -1, mod)) % mod
    return r % (p**k)


def sqrt_mod(a: ResidueElement) -> ResidueElement | None:
    """Smallest square root of a modulo an odd prime power, or None."""
    p, k = prime_power(a.modulus)
    if p == 2:
        raise UnsupportedModulus("even modulus")
    x = a.value
    if x == 0:
        return ResidueElement(a.modulus, 0)
    v = valuation(x, p)
    if v % 2:
        return None
    m = v // 2
    rest = k - v
    u = (x // p**v) % p**rest
    s = _sqrt_unit_prime_power(u, p, rest)
    if s is None:
        return None
    mod = p**rest
    s = min(s % mod, (-s) % mod)
    return ResidueElement(a.modulus, p**m * s)


def is_square_mod_prime(a: int, p: int) -> bool:
    a %= p
    return a == 0 or p == 2 or pow(a, (p - 1) // 2, p) == 1


# ---------------------------------------------------------- polynomials
# Integer polynomials are tuples of coefficients, constant term first.


def poly_eval(f, x: int, mod: int | None = None) -> int:
    acc = 0
    for c in reversed(f):
        acc = acc * x + c
        if mod:
            acc %= mod
    return acc


def poly_trim(f) -> tuple[int, ...]:
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return tuple(f)


def poly_add(f, g) -> tuple[int, ...]:
    n = max(len(f), len(g))
    return poly_trim(
        (f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n)
    )


def poly_neg(f) -> tuple[int, ...]:
    return tuple(-c for c in f)


def poly_sub(f, g) -> tuple[int, ...]:
    return poly_add(f, poly_neg(g))


def poly_mul(f, g) -> tuple[int, ...]:
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return poly_trim(out)


def poly_pow(f, e: int) -> tuple[int, ...]:
    out: tuple[int, ...] = (1,)
    for _ in range(e):
        out = poly_mul(out, f)
    return out


def poly_deriv(f) -> tuple[int, ...]:
    return poly_trim(i * c for i, c in enumerate(f) if i)


def poly_taylor_shift(f, r: int, s: int) -> tuple[int, ...]:
    """Coefficients of f(r + s*x)."""
    out: tuple[int, ...] = ()
    for c in reversed(f):
        out = poly_add(poly_mul(out, (r, s)), (c,))
    return out


# ------------------------------------------------------------ l-adic


@dataclass(frozen=True)
class PadicApprox:
    """An element of Z_l known modulo l^precision."""

    prime: int
    precision: int
    value: int
    valuation: int = field(default=-1)

    def __post_init__(self):
        mod = self.prime**self.precision
        object.__setattr__(self, "value", self.value % mod)
        if self.valuation < 0:
            v = self.precision if self.value == 0 else valuation(self.value, self.prime)
            object.__setattr__(self, "valuation", v)
        if self.valuation > self.precision:
            raise ValueError("valuation exceeds precision")

    @property
    def modulus(self) -> int:
        return self.prime**self.precision

    def _check(self, other: "PadicApprox"):
        if other.prime != self.prime:
            raise ValueError("mismatched primes")

    def __add__(self, other: "PadicApprox") -> "PadicApprox":
        self._check(other)
        k = min(self.precision, other.precision)
        return PadicApprox(self.prime, k, self.value + other.value)

    def __neg__(self) -> "PadicApprox":
        return PadicApprox(self.prime, self.precision, -self.value)

    def __sub__(self, other: "PadicApprox") -> "PadicApprox":
        return self + (-other)

    def __mul__(self, other: "PadicApprox") -> "PadicApprox":
        self._check(other)
        k = min(self.precision + other.valuation, other.precision + self.valuation)
        return PadicApprox(self.prime, k, self.value * other.value)

    def divide_by_unit(self, other: "PadicApprox") -> "PadicApprox":
        self._check(other)
        if other.valuation != 0:
            raise PrecisionExhausted("divisor is not a unit at this precision")
        k = min(self.precision, other.precision)
        mod = self.prime**k
        return PadicApprox(self.prime, k, self.value * pow(other.value, -1, mod))

    def shift_down(self, n: int) -> "PadicApprox":
        """Divide by l^n; loses n digits."""
        if self.valuation < n:
            raise ValueError("not divisible")
        if n >= self.precision:
            raise PrecisionExhausted("no digits left")
        return PadicApprox(self.prime, self.precision - n, self.value // self.prime**n)

    def is_zero(self) -> bool:
        return self.valuation >= self.precision


@dataclass(frozen=True)
class HenselResult:
    roots: tuple[PadicApprox, ...]
    unresolved: tuple[ResidueElement, ...]

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)


def _roots_mod_prime(f, p: int) -> list[int]:
    if p < 5000:
        xs = np.arange(p, dtype=np.int64)
        acc = np.zeros(p, dtype=np.int64)
        for c in reversed(f):
            acc = (acc * xs + (c % p)) % p
        return [int(r) for r in np.flatnonzero(acc == 0)]
    return [r for r in range(p) if poly_eval(f, r, p) == 0]


def _content_valuation(f, p: int) -> int:
    return min(valuation(c, p) for c in f if c)


def hensel_lift_roots(f, ell: int, k: int, refine: bool = True) -> HenselResult:
    """Roots of f in Z_ell modulo ell^k.

    Simple roots mod ell are lifted by Newton. Multiple roots mod ell are
    refined by the substitution x = r + ell*y when ``refine`` is set; roots
    that never separate within k digits come back in ``unresolved``.
    """
    f = poly_trim(f)
    if not f or all(c % ell == 0 for c in f):
        raise ValueError("polynomial vanishes mod ell")
    roots: list[PadicApprox] = []
    unresolved: list[ResidueElement] = []
    _lift(f, ell, k, 0, 0, roots, unresolved, refine)
    roots.sort(key=lambda r: r.value)
    unresolved.sort(key=lambda r: (r.modulus, r.value))
    return HenselResult(tuple(roots), tuple(unresolved))


def _lift(f, ell, k, depth, prefix, roots, unresolved, refine):
    # invariant: we look for x = prefix + ell^depth * y with y a root of f
    if depth >= k:
        unresolved.append(ResidueElement(ell**k, prefix))
        return
    df = poly_deriv(f)
    for r in _roots_mod_prime(f, ell):
        if poly_eval(df, r, ell) % ell:
            prec = k - depth
            mod = ell**prec
            y = r
            m = ell
            while m < mod:
                m = min(m * m, mod)
                y = (y - poly_eval(f, y, m) * pow(poly_eval(df, y, m), -1, m)) % m
            x = prefix + ell**depth * y
            roots.append(PadicApprox(ell, k, x))
        elif not refine:
            unresolved.append(ResidueElement(ell ** (depth + 1), prefix + ell**depth * r))
        else:
            g = poly_taylor_shift(f, r, ell)
            if not g:
                unresolved.append(ResidueElement(ell**k, prefix + ell**depth * r))
                continue
            c = _content_valuation(g, ell)
            g = tuple(a // ell**c for a in g)
            if len(g) == 1:
                continue  # nonzero constant mod ell: no roots here
            _lift(g, ell, k, depth + 1, prefix + ell**depth * r, roots, unresolved, refine)
