"""Quintuples of 5x5 skew matrices, their sub-Pfaffian quadrics, and points on the genus-one curve."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

import numpy as np

from .arith import is_prime


class NotInvertible(ValueError):
    pass


class NotSkew(ValueError):
    pass


def _reduce(a: np.ndarray, mod: int | None) -> np.ndarray:
    return a % mod if mod else a


@dataclass(frozen=True, eq=False)
class SkewQuintuple:
    mats: np.ndarray  # shape (5, 5, 5): mats[i] is the i-th skew matrix
    mod: int | None = None  # None means integer coefficients

    def __post_init__(self):
        m = np.array(self.mats, dtype=object if self.mod is None else np.int64)
        if m.shape != (5, 5, 5):
            raise ValueError("need five 5x5 matrices")
        m = _reduce(m, self.mod)
        if np.any(_reduce(m + m.transpose(0, 2, 1), self.mod) != 0) or np.any(
            _reduce(np.einsum("kii->ki", m), self.mod) != 0
        ):
            raise NotSkew("matrices must be skew with zero diagonal")
        object.__setattr__(self, "mats", m)

    def __eq__(self, other) -> bool:
        return isinstance(other, SkewQuintuple) and self.mod == other.mod and np.array_equal(self.mats, other.mats)

    def reduce(self, p: int) -> "SkewQuintuple":
        return SkewQuintuple(np.array(self.mats.tolist(), dtype=object) % p, p)

    def matrix_at(self, t) -> np.ndarray:
        """v(t) = sum t_i A_i."""
        return _reduce(np.tensordot(np.asarray(t, dtype=self.mats.dtype), self.mats, axes=1), self.mod)

    def to_json(self) -> list:
        return [[[int(M[a, b]) for b in range(a + 1, 5)] for a in range(4)] for M in self.mats]

    @classmethod
    def from_json(cls, data, mod: int | None = None) -> "SkewQuintuple":
        mats = np.zeros((5, 5, 5), dtype=object)
        for k, rows in enumerate(data):
            for a, row in enumerate(rows):
                for j, val in enumerate(row):
                    b = a + 1 + j
                    mats[k, a, b], mats[k, b, a] = val, -val
        return cls(mats, mod)

    @classmethod
    def random(cls, p: int, rng: random.Random) -> "SkewQuintuple":
        mats = np.zeros((5, 5, 5), dtype=np.int64)
        for k in range(5):
            for a in range(5):
                for b in range(a + 1, 5):
                    x = rng.randrange(p)
                    mats[k, a, b], mats[k, b, a] = x, -x % p
        return cls(mats, p)


# ------------------------------------------------------------ matrices


def det_exact(M) -> int:
    """Integer determinant by fraction-free elimination."""
    a = [[int(x) for x in row] for row in np.asarray(M).tolist()]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k]:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def inverse_mod(M, p: int) -> np.ndarray:
    n = len(M)
    a = [[int(x) % p for x in row] + [int(i == j) for j in range(n)] for i, row in enumerate(np.asarray(M).tolist())]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            raise NotInvertible("singular matrix mod p")
        a[c], a[piv] = a[piv], a[c]
        inv = pow(a[c][c], -1, p)
        a[c] = [x * inv % p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[c])]
    return np.array([row[n:] for row in a], dtype=np.int64)


def rank_mod(M, p: int) -> int:
    a = [[int(x) % p for x in row] for row in np.asarray(M).tolist()]
    rank, rows, cols = 0, len(a), len(a[0]) if a else 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if a[r][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][c], -1, p)
        for r in range(rows):
            if r != rank and a[r][c]:
                f = a[r][c] * inv % p
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


@dataclass(frozen=True, eq=False)
class GroupElement:
    g1: np.ndarray
    g2: np.ndarray
    mod: int | None = None

    def __post_init__(self):
        for g in (self.g1, self.g2):
            d = det_exact(g)
            if (self.mod and d % self.mod == 0) or (not self.mod and abs(d) != 1):
                raise NotInvertible("group element is not invertible over the ring")

    @property
    def det(self) -> int:
        d = det_exact(self.g1) ** 2 * det_exact(self.g2)
        return d % self.mod if self.mod else d

    def inverse(self) -> "GroupElement":
        if not self.mod:
            raise NotImplementedError("inverse over Z not needed")
        return GroupElement(inverse_mod(self.g1, self.mod), inverse_mod(self.g2, self.mod), self.mod)

    @classmethod
    def scalar(cls, lam: int, p: int) -> "GroupElement":
        """The class (lam I, lam^-2 I), which acts trivially."""
        I = np.eye(5, dtype=np.int64)
        return cls(lam % p * I, pow(lam, -2, p) * I % p, p)

    @classmethod
    def random(cls, p: int, rng: random.Random) -> "GroupElement":
        def rand_inv():
            while True:
                g = np.array([[rng.randrange(p) for _ in range(5)] for _ in range(5)], dtype=np.int64)
                if det_exact(g) % p:
                    return g

        return cls(rand_inv(), rand_inv(), p)


def act(g: GroupElement, v: SkewQuintuple) -> SkewQuintuple:
    """(g1 A_1 g1^T, ..., g1 A_5 g1^T) . g2^T."""
    if g.mod != v.mod:
        raise ValueError("ring mismatch")
    dt = v.mats.dtype
    g1, g2 = np.asarray(g.g1, dtype=dt), np.asarray(g.g2, dtype=dt)
    conj = np.einsum("ab,kbc,dc->kad", g1, v.mats, g1)
    return SkewQuintuple(_reduce(np.einsum("ki,iad->kad", g2, conj), v.mod), v.mod)


# ----------------------------------------------------------- Pfaffians


def pfaffian4(M):
    M = np.asarray(M)
    if M.shape != (4, 4) or np.any(M + M.T != 0):
        raise NotSkew("pfaffian4 needs a 4x4 skew matrix")
    return M[0, 1] * M[2, 3] - M[0, 2] * M[1, 3] + M[0, 3] * M[1, 2]


@dataclass(frozen=True, eq=False)
class QuadricSystem:
    """Five quadratic forms; coeffs[i, a, b] (a <= b) is the coefficient of t_a t_b in Q_i."""

    coeffs: np.ndarray
    mod: int | None = None

    def evaluate(self, T: np.ndarray) -> np.ndarray:
        T = np.asarray(T, dtype=self.coeffs.dtype)
        return _reduce(np.einsum("iab,na,nb->ni", self.coeffs, T, T), self.mod)

    def jacobian(self, t) -> np.ndarray:
        S = self.coeffs + self.coeffs.transpose(0, 2, 1)
        return _reduce(np.einsum("iab,b->ia", S, np.asarray(t, dtype=self.coeffs.dtype)), self.mod)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)


def _linear_entries(v: SkewQuintuple) -> np.ndarray:
    """L[a, b] = coefficient vector of the linear form v(t)_{ab}."""
    return v.mats.transpose(1, 2, 0)


def _quad_from_product(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    outer = np.multiply.outer(x, y)
    q = outer + outer.T
    q[np.diag_indices(5)] //= 2
    return np.triu(q)


def sub_pfaffians(v: SkewQuintuple) -> QuadricSystem:
    """Q_i = (-1)^(i+1) Pf(v(t) with row and column i removed), i = 1..5."""
    L = _linear_entries(v)
    out = np.zeros((5, 5, 5), dtype=v.mats.dtype)
    for i in range(5):
        keep = [j for j in range(5) if j != i]
        a, b, c, d = keep
        q = (
            _quad_from_product(L[a, b], L[c, d])
            - _quad_from_product(L[a, c], L[b, d])
            + _quad_from_product(L[a, d], L[b, c])
        )
        out[i] = q if i % 2 == 0 else -q
    return QuadricSystem(_reduce(out, v.mod), v.mod)


def _symmetrize(T: np.ndarray) -> np.ndarray:
    n = T.ndim
    return sum(np.transpose(T, perm) for perm in itertools.permutations(range(n)))


def _perm_sign(perm) -> int:
    sign, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        sign *= -1 if length % 2 == 0 else 1
    return sign


def determinant_form(v: SkewQuintuple) -> np.ndarray:
    """Symmetric coefficient tensor of det v(t); zero iff the quintic vanishes identically."""
    L = _linear_entries(v).astype(object)
    T = np.zeros((5,) * 5, dtype=object)
    for perm in itertools.permutations(range(5)):
        term = L[0, perm[0]]
        for a in range(1, 5):
            term = np.multiply.outer(term, L[a, perm[a]])
        T = T + _perm_sign(perm) * term
    S = _symmetrize(T)
    return S % v.mod if v.mod else S


def expansion_identity_forms(v: SkewQuintuple) -> list[np.ndarray]:
    """For each j, the symmetric tensor of sum_i v_ji(t) Q_i(t) (a cubic form)."""
    L = _linear_entries(v).astype(object)
    Q = sub_pfaffians(v).coeffs.astype(object)
    out = []
    for j in range(5):
        T = np.zeros((5, 5, 5), dtype=object)
        for i in range(5):
            T = T + np.multiply.outer(L[j, i], Q[i])
        S = _symmetrize(T)
        out.append(S % v.mod if v.mod else S)
    return out


# -------------------------------------------------------- points mod p


def projective_points(p: int, n: int = 5) -> np.ndarray:
    """All points of P^(n-1)(F_p), first nonzero coordinate 1."""
    blocks = []
    for lead in range(n):
        free = n - 1 - lead
        if free:
            tail = np.stack(np.meshgrid(*[np.arange(p)] * free, indexing="ij"), -1).reshape(-1, free)
        else:
            tail = np.zeros((1, 0), dtype=np.int64)
        head = np.zeros((len(tail), lead + 1), dtype=np.int64)
        head[:, lead] = 1
        blocks.append(np.hstack([head, tail]).astype(np.int64))
    return np.vstack(blocks)


@dataclass
class PointSet:
    p: int
    points: list[tuple[int, ...]]
    smooth: list[bool]
    degenerate: bool = False
    note: str = ""

    @property
    def all_smooth(self) -> bool:
        # smooth at every F_p point only; singular points can sit over an extension
        return all(self.smooth)

    def in_hasse_window(self) -> bool:
        n = len(self.points)
        return abs(n - self.p - 1) <= 2 * math.sqrt(self.p)


def normalize_point(t, p: int) -> tuple[int, ...]:
    t = [int(x) % p for x in t]
    lead = next(x for x in t if x)
    inv = pow(lead, -1, p)
    return tuple(x * inv % p for x in t)


def points_mod_p(v: SkewQuintuple, p: int, chunk: int = 200_000) -> PointSet:
    if not is_prime(p) or p > 97:
        raise ValueError("p must be a prime <= 97")
    vp = v if v.mod == p else v.reduce(p)
    Q = sub_pfaffians(vp)
    if Q.is_zero():
        return PointSet(p, [], [], True, "all quadrics vanish: C(v) is all of P^4")
    P = projective_points(p)
    found = []
    for i in range(0, len(P), chunk):
        block = P[i : i + chunk]
        vals = Q.evaluate(block)
        found.append(block[np.all(vals == 0, axis=1)])
    pts = np.vstack(found) if found else np.zeros((0, 5), dtype=np.int64)
    smooth = [rank_mod(Q.jacobian(t), p) == 3 for t in pts]
    points = [tuple(int(x) for x in t) for t in pts]
    degenerate = any(rank_mod(Q.jacobian(t), p) < 3 for t in pts) and len(points) > p + 1 + 2 * math.isqrt(p) + 2
    note = "zero set larger than a curve" if degenerate else ""
    return PointSet(p, points, smooth, degenerate, note)


def transport_points(points, M, p: int) -> set[tuple[int, ...]]:
    M = np.asarray(M, dtype=np.int64) % p
    return {normalize_point(M @ np.array(t, dtype=np.int64) % p, p) for t in points}


def contragredient(M, p: int) -> np.ndarray:
    """M^{-T} mod p."""
    return inverse_mod(M, p).T.copy()


# ----------------------------------------------------- local solubility

SOLUBLE = "soluble"
INSOLUBLE = "insoluble"
UNDETERMINED = "undetermined"


@dataclass
class SolubilityReport:
    verdict: str
    ell: int
    witness: tuple | None = None
    precision: int = 0
    flags: list = field(default_factory=list)


def _eval_int(Q: QuadricSystem, t) -> list[int]:
    c = Q.coeffs
    return [
        sum(int(c[i, a, b]) * t[a] * t[b] for a in range(5) for b in range(a, 5) if c[i, a, b])
        for i in range(5)
    ]


def _jac_int(Q: QuadricSystem, t) -> list[list[int]]:
    c = Q.coeffs
    J = [[0] * 5 for _ in range(5)]
    for i in range(5):
        for a in range(5):
            for b in range(a, 5):
                x = int(c[i, a, b])
                if x:
                    J[i][a] += x * t[b]
                    J[i][b] += x * t[a]
    return J


def _hensel_lift_point(Q: QuadricSystem, t0, ell: int, k: int):
    """Lift a smooth F_l point of C(v) to a point mod l^k; None if the lift fails."""
    t = [int(x) for x in t0]
    lead = next(i for i, x in enumerate(t) if x % ell)
    J = _jac_int(Q, t)
    # three equations and three free coordinates with an invertible minor
    for rows in itertools.combinations(range(5), 3):
        for cols in itertools.combinations([j for j in range(5) if j != lead], 3):
            minor = [[J[r][c] for c in cols] for r in rows]
            if det_exact(minor) % ell:
                break
        else:
            continue
        break
    else:
        return None
    mod = ell
    while mod < ell**k:
        mod = min(mod * mod, ell**k)
        vals = _eval_int(Q, t)
        J = _jac_int(Q, t)
        minor = np.array([[J[r][c] for c in cols] for r in rows], dtype=object)
        inv = inverse_mod_general(minor, mod)
        rhs = [vals[r] % mod for r in rows]
        step = [sum(int(inv[a][b]) * rhs[b] for b in range(3)) % mod for a in range(3)]
        for a, c in enumerate(cols):
            t[c] = (t[c] - step[a]) % mod
    if all(x % ell**k == 0 for x in _eval_int(Q, t)):
        return tuple(t)
    return None


def inverse_mod_general(M, mod: int) -> list[list[int]]:
    """Inverse of a matrix whose determinant is a unit modulo mod."""
    n = len(M)
    M = [[int(x) for x in row] for row in np.asarray(M, dtype=object).tolist()]
    d = det_exact(M)
    dinv = pow(d % mod, -1, mod)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = [[M[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            adj[j][i] = (-1) ** (i + j) * (det_exact(sub) if sub else 1)
    return [[adj[i][j] * dinv % mod for j in range(n)] for i in range(n)]


def locally_soluble_at(v: SkewQuintuple, ell: int, effort: int = 4) -> SolubilityReport:
    if v.mod is not None:
        raise ValueError("local solubility needs integer coefficients")
    pts = points_mod_p(v, ell)
    if pts.degenerate:
        return SolubilityReport(UNDETERMINED, ell, flags=["degenerate reduction"])
    Q = sub_pfaffians(v)
    for t, ok in zip(pts.points, pts.smooth):
        if ok:
            lift = _hensel_lift_point(Q, t, ell, effort)
            if lift is not None:
                return SolubilityReport(SOLUBLE, ell, lift, effort)
    if not pts.points:
        flags = ["no F_l points although smooth genus-one curves always have some: reduction is singular"]
        return SolubilityReport(INSOLUBLE, ell, flags=flags)
    # only singular residue points: depth-bounded search of their lifts
    alive = [tuple(t) for t, ok in zip(pts.points, pts.smooth) if not ok]
    for depth in range(2, effort + 1):
        mod = ell**depth
        nxt = []
        for t in alive:
            lead = next(i for i, x in enumerate(t) if x % ell)
            free = [j for j in range(5) if j != lead]
            for shift in itertools.product(range(ell), repeat=4):
                u = list(t)
                for j, s in zip(free, shift):
                    u[j] = u[j] + s * ell ** (depth - 1)
                if all(x % mod == 0 for x in _eval_int(Q, u)):
                    nxt.append(tuple(u))
        if not nxt:
            return SolubilityReport(INSOLUBLE, ell, precision=depth, flags=["all residue classes die"])
        alive = nxt
        if len(alive) > 50_000:
            break
    return SolubilityReport(UNDETERMINED, ell, precision=effort, flags=["singular points survive to the search depth"])
