"""SL2(Z): S/T words, lifts from SL2(Z/N), random kernel elements, cusp bookkeeping."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


@dataclass(frozen=True)
class MatZ:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self.tuple()} is not 1")

    @classmethod
    def of(cls, m) -> "MatZ":
        if isinstance(m, MatZ):
            return m
        if len(m) == 2:
            (a, b), (c, d) = m
            return cls(int(a), int(b), int(c), int(d))
        return cls(*(int(x) for x in m))

    def tuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def __mul__(self, o: "MatZ") -> "MatZ":
        return MatZ(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def __neg__(self) -> "MatZ":
        return MatZ(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "MatZ":
        return MatZ(self.d, -self.b, -self.c, self.a)

    def __pow__(self, k: int) -> "MatZ":
        base = self if k >= 0 else self.inverse()
        out = IDENTITY
        for _ in range(abs(k)):
            out = out * base
        return out

    def reduce(self, N: int) -> tuple:
        return (self.a % N, self.b % N, self.c % N, self.d % N)

    def act(self, z):
        """Moebius action on the upper half-plane."""
        return (self.a * z + self.b) / (self.c * z + self.d)

    def cusp(self):
        """Image of infinity as (numerator, denominator) in lowest terms, denominator >= 0."""
        g = math.gcd(self.a, self.c)
        p, q = self.a // g, self.c // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        return p, q


IDENTITY = MatZ(1, 0, 0, 1)
S = MatZ(0, -1, 1, 0)
T = MatZ(1, 1, 0, 1)


def T_pow(k: int) -> MatZ:
    return MatZ(1, k, 0, 1)


@dataclass(frozen=True)
class STWord:
    sign: int
    letters: tuple  # ("S", 1) or ("T", k)

    def matrix(self) -> MatZ:
        out = IDENTITY
        for name, e in self.letters:
            out = out * (S**e if name == "S" else T_pow(e))
        return out if self.sign == 1 else -out

    def __str__(self):
        parts = ["-" if self.sign < 0 else ""]
        for name, e in self.letters:
            parts.append(name if (name, e) == ("S", 1) else f"{name}^{e}")
        return (parts[0] + " ".join(parts[1:])) or "I"


def st_decompose(g) -> STWord:
    """g = sign * word in S and T, via Euclid on the bottom row.

    Right-multiplying by T^k replaces d by d + k c; by S sends (c, d) to
    (d, -c).  Remainders are taken in [0, |c|).
    """
    g = MatZ.of(g)
    ops = []  # right factors applied to g, in order
    h = g
    while h.c != 0:
        k = -(h.d // h.c)
        if k:
            h = h * T_pow(k)
            ops.append(("T", k))
        h = h * S
        ops.append(("S", 1))
    # h = eps * T^m
    eps = h.a
    m = h.b * eps
    letters = [("T", m)] if m else []
    sign = eps
    # g = h * inverse(ops reversed); S^-1 = -S
    for name, k in reversed(ops):
        if name == "S":
            sign = -sign
            letters.append(("S", 1))
        else:
            letters.append(("T", -k))
    w = STWord(sign, tuple(letters))
    assert w.matrix() == g
    return w


def lift_slnz(gbar: Sequence[int], N: int) -> MatZ:
    """Determinant-1 integer matrix reducing to gbar (a, b, c, d) mod N."""
    a, b, c, d = (int(x) % N for x in gbar)
    if (a * d - b * c - 1) % N:
        raise ValueError(f"det of {gbar} is not 1 mod {N}")
    if N == 1:
        return IDENTITY
    if c == 0:
        c = N
    k = 0
    while math.gcd(c, d + k * N) != 1:
        k += 1
    d = d + k * N
    m = (1 - (a * d - b * c)) // N
    # solve x d - y c = m
    g, u, v = _xgcd(d, -c)
    x, y = u * m, v * m
    return MatZ(a + x * N, b + y * N, c, d)


def _xgcd(a: int, b: int):
    """(g, u, v) with u a + v b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def random_word(rng: random.Random, length: int) -> MatZ:
    out = IDENTITY
    for _ in range(length):
        out = out * (S if rng.random() < 0.5 else T_pow(rng.choice((-1, 1))))
    return out


def random_kernel_words(N: int, count: int, max_len: int = 50, rng: Optional[random.Random] = None) -> list[MatZ]:
    """Random elements of Gamma(N) (up to sign) as conjugates w T^{+-N} w^-1 and their products.

    Each output has an S/T word of length at most max_len when T^N counts as
    a single letter.
    """
    rng = rng or random.Random(0)
    out = []
    half = max(0, (max_len - 1) // 2)
    while len(out) < count:
        nfac = 2 if half >= 2 and rng.random() < 0.5 else 1
        per = half // nfac
        m = IDENTITY
        for _ in range(nfac):
            w = random_word(rng, rng.randint(1, max(per, 1)) if per else 0)
            m = m * w * T_pow(rng.choice((-N, N))) * w.inverse()
        if m == IDENTITY or m == -IDENTITY:
            continue
        out.append(m)
    return out


# ---------------------------------------------------------------------------
# groups mod N


def mul_mod(x, y, N):
    return (
        (x[0] * y[0] + x[1] * y[2]) % N,
        (x[0] * y[1] + x[1] * y[3]) % N,
        (x[2] * y[0] + x[3] * y[2]) % N,
        (x[2] * y[1] + x[3] * y[3]) % N,
    )


def generate_group(gens: Iterable, N: int) -> frozenset:
    """Closure of gens in GL2(Z/N) (matrices as (a, b, c, d))."""
    gens = [tuple(x % N for x in g) for g in gens]
    I = (1 % N, 0, 0, 1 % N)
    seen, frontier = {I}, [I]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = mul_mod(x, g, N)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def sl_part(group: Iterable, N: int) -> frozenset:
    return frozenset(g for g in group if (g[0] * g[3] - g[1] * g[2]) % N == 1 % N)


def sl2_generators_mod(gamma: frozenset, N: int, rng: Optional[random.Random] = None) -> list:
    """A small generating set of the finite group gamma (greedy random)."""
    rng = rng or random.Random(1)
    elems = sorted(gamma)
    gens: list = []
    span = generate_group(gens, N)
    while len(span) < len(gamma):
        g = rng.choice(elems)
        if g not in span:
            gens.append(g)
            span = generate_group(gens, N)
    return gens


@dataclass(frozen=True)
class CuspInfo:
    index: int
    shift: int
    sign: int


class CuspTable:
    """Lookup g -> (j, b, sign) with g = sign * gamma * alpha_j * T^b, gamma in Gamma.

    Precomputes every residue gamma * alpha_j * T^b mod N; at most
    |SL2(Z/N)| entries.
    """

    def __init__(self, cusps: Sequence, gamma: frozenset, N: int):
        self.N = N
        self.gamma = gamma
        self.cusps = [(MatZ.of(a), int(w)) for a, w in cusps]
        self._table: dict = {}
        for sign in (1, -1):
            for j, (al, w) in enumerate(self.cusps):
                for b in range(w):
                    m = al * T_pow(b)
                    r = (m if sign == 1 else -m).reduce(N)
                    for gam in gamma:
                        self._table.setdefault(mul_mod(gam, r, N), CuspInfo(j, b, sign))

    def lookup(self, g: MatZ) -> CuspInfo:
        try:
            return self._table[g.reduce(self.N)]
        except KeyError:
            raise ValueError(f"{g.tuple()} maps infinity to no listed cusp") from None

    def coverage(self) -> int:
        return len(self._table)


def cusp_normalize(g, cusps: Sequence, gamma: frozenset, N: int, table: Optional[CuspTable] = None) -> tuple:
    """(j, b, sign) with g = sign * gamma * alpha_j * T^b for some gamma in Gamma.

    Then f|g is the stored expansion at cusp j with q^{1/w_j} replaced by
    e^{2 pi i b / w_j} q^{1/w_j} (weight 2, so the sign is invisible).
    """
    table = table or CuspTable(cusps, gamma, N)
    info = table.lookup(MatZ.of(g))
    return info.index, info.shift, info.sign
