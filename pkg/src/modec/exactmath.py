"""Exact arithmetic: cyclotomic fields, homogeneous polynomials, linear algebra.

Cyclotomic numbers are stored as rational polynomials in ``zeta_N`` reduced
modulo the N-th cyclotomic polynomial, so equal field elements have equal
representations.  The heavy lifting (polynomial products, rref) is done by
python-flint.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from flint import fmpq, fmpq_mat, fmpq_poly, fmpz_poly


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def to_fmpq(x) -> fmpq:
    if isinstance(x, fmpq):
        return x
    x = to_fraction(x)
    return fmpq(x.numerator, x.denominator)


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> fmpq_poly:
    return fmpq_poly(fmpz_poly.cyclotomic(n))


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


@lru_cache(maxsize=None)
def _zeta_power(n: int, k: int) -> fmpq_poly:
    """zeta_n^k reduced mod Phi_n."""
    return fmpq_poly([0] * (k % n) + [1]) % cyclotomic_poly(n)


class CyclotomicNumber:
    """Element of Q(zeta_N).  Immutable; supports +, -, *, / and Galois twists."""

    __slots__ = ("level", "_p")

    def __init__(self, level: int, coeffs=None, *, _poly: fmpq_poly | None = None):
        if level < 1:
            raise ValueError("level must be positive")
        self.level = level
        if _poly is not None:
            self._p = _poly
            return
        if coeffs is None:
            coeffs = []
        elif isinstance(coeffs, (int, Fraction, fmpq)):
            coeffs = [coeffs]
        p = fmpq_poly([to_fmpq(c) for c in coeffs])
        phi = cyclotomic_poly(level)
        if p.degree() >= phi.degree():
            p = p % phi
        self._p = p

    def __reduce__(self):
        return (CyclotomicNumber, (self.level, list(self.coeffs)))

    @classmethod
    def zeta(cls, level: int, k: int = 1) -> "CyclotomicNumber":
        return cls(level, _poly=_zeta_power(level, k))

    @classmethod
    def from_rational(cls, level: int, x) -> "CyclotomicNumber":
        return cls(level, _poly=fmpq_poly([to_fmpq(x)]))

    @property
    def degree(self) -> int:
        return euler_phi(self.level)

    @property
    def coeffs(self) -> tuple:
        """Rational coordinates on 1, zeta, ..., zeta^(phi(N)-1)."""
        c = [to_fraction(x) for x in self._p.coeffs()]
        return tuple(c + [Fraction(0)] * (self.degree - len(c)))

    @property
    def poly(self) -> fmpq_poly:
        return self._p

    def _coerce(self, other) -> "CyclotomicNumber":
        if isinstance(other, CyclotomicNumber):
            if other.level != self.level:
                raise ValueError(f"level mismatch: {self.level} vs {other.level}")
            return other
        if isinstance(other, (int, Fraction, fmpq)):
            return CyclotomicNumber(self.level, _poly=fmpq_poly([to_fmpq(other)]))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CyclotomicNumber(self.level, _poly=self._p + o._p)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.level, _poly=-self._p)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CyclotomicNumber(self.level, _poly=self._p - o._p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = self._p * o._p
        if p.degree() >= self.degree:
            p = p % cyclotomic_poly(self.level)
        return CyclotomicNumber(self.level, _poly=p)

    __rmul__ = __mul__

    def inverse(self) -> "CyclotomicNumber":
        if self._p.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(zeta_N)")
        g, s, _ = self._p.xgcd(cyclotomic_poly(self.level))
        # g is a nonzero constant because Phi_N is irreducible
        return CyclotomicNumber(self.level, _poly=(s / g.coeffs()[0]) % cyclotomic_poly(self.level))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = CyclotomicNumber.from_rational(self.level, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, CyclotomicNumber):
            return self.level == other.level and self._p == other._p
        if isinstance(other, (int, Fraction, fmpq)):
            return self._p == fmpq_poly([to_fmpq(other)])
        return NotImplemented

    def __hash__(self):
        return hash((self.level, self.coeffs))

    def __bool__(self):
        return not self._p.is_zero()

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_rational(self) -> bool:
        return self._p.degree() <= 0

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def galois_twist(self, k: int) -> "CyclotomicNumber":
        return galois_twist(self, k)

    def lift(self, level: int) -> "CyclotomicNumber":
        """Image under Q(zeta_M) -> Q(zeta_N), zeta_M -> zeta_N^(N/M)."""
        if level % self.level:
            raise ValueError(f"level {self.level} does not divide {level}")
        step = level // self.level
        out = fmpq_poly()
        for e, c in enumerate(self._p.coeffs()):
            if c != 0:
                out += c * _zeta_power(level, e * step)
        return CyclotomicNumber(level, _poly=out % cyclotomic_poly(level))

    def conjugates(self) -> list:
        return [galois_twist(self, k) for k in range(1, self.level + 1) if math.gcd(k, self.level) == 1]

    def norm(self) -> Fraction:
        out = CyclotomicNumber.from_rational(self.level, 1)
        for c in self.conjugates():
            out = out * c
        return out.to_rational()

    def to_complex(self, dps: int = 30):
        import mpmath

        with mpmath.workdps(dps):
            z = mpmath.expjpi(mpmath.mpf(2) / self.level)
            return mpmath.polyval([mpmath.mpf(int(c.p)) / int(c.q) for c in reversed(self._p.coeffs())] or [0], z)

    def __repr__(self):
        if self.is_rational():
            return f"{self.coeffs[0]}"
        terms = []
        for e, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if e == 0 else f"({c})*z{self.level}^{e}")
        return " + ".join(terms)


def cyclo_mul(a: CyclotomicNumber, b: CyclotomicNumber) -> CyclotomicNumber:
    if a.level != b.level:
        raise ValueError(f"level mismatch: {a.level} vs {b.level}")
    return a * b


def galois_twist(a: CyclotomicNumber, k: int) -> CyclotomicNumber:
    """Image of ``a`` under zeta_N -> zeta_N^k."""
    n = a.level
    if math.gcd(k, n) != 1:
        raise ValueError(f"k={k} is not coprime to N={n}")
    out = fmpq_poly()
    for e, c in enumerate(a.poly.coeffs()):
        if c != 0:
            out += c * _zeta_power(n, e * k)
    return CyclotomicNumber(n, _poly=out % cyclotomic_poly(n))


# ---------------------------------------------------------------------------
# rational reconstruction


def rational_reconstruct(r: int, m: int) -> Fraction | None:
    """Continued-fraction reconstruction of a/b from r = a/b mod m.

    Returns the unique a/b with |a|, b <= sqrt(m/2), gcd(b, m) = 1 and
    a = r*b mod m, or None.
    """
    r %= m
    bound = math.isqrt(m // 2)
    r0, r1 = m, r
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    a, b = (r1, s1) if s1 > 0 else (-r1, -s1)
    if math.gcd(b, m) != 1:
        return None
    if (a - r * b) % m:
        return None
    return Fraction(a, b)


# ---------------------------------------------------------------------------
# linear algebra


def _as_fmpq_mat(rows: Sequence[Sequence], ncols: int | None = None) -> fmpq_mat:
    rows = list(rows)
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    flat = [to_fmpq(x) for row in rows for x in row]
    return fmpq_mat(len(rows), ncols, flat)


def _nullspace_fmpq(M: fmpq_mat) -> list:
    R, rank = M.rref()
    ncols = M.ncols()
    pivots = []
    row = 0
    for col in range(ncols):
        if row < rank and R[row, col] != 0:
            pivots.append(col)
            row += 1
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [fmpq(0)] * ncols
        v[f] = fmpq(1)
        for i, p in enumerate(pivots):
            v[p] = -R[i, f]
        basis.append(v)
    return basis


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list]:
    """Basis of {v : M v = 0}.

    Entries may be rationals or CyclotomicNumbers of a common level; in the
    cyclotomic case the system is flattened to a rational one of phi(N)-fold
    size and the returned vectors have CyclotomicNumber entries.
    """
    rows = [list(r) for r in rows]
    if ncols is None:
        if not rows:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(rows[0])
    level = _common_level(rows)
    if level is None:
        if not rows:
            return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
        basis = _nullspace_fmpq(_as_fmpq_mat(rows, ncols))
        return [[to_fraction(x) for x in v] for v in basis]
    phi = euler_phi(level)
    flat = _flatten_cyclo_system(rows, ncols, level, rational_unknowns=False)
    basis = _nullspace_fmpq(flat)
    # the solution set is a Q(zeta)-space; extract a Q(zeta)-basis
    vecs = [[CyclotomicNumber(level, [v[j * phi + e] for e in range(phi)]) for j in range(ncols)] for v in basis]
    return cyclo_echelon_basis(vecs, level)


def rational_nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Rational vectors v with M v = 0 where M may have cyclotomic entries."""
    rows = [list(r) for r in rows]
    if ncols is None:
        ncols = len(rows[0])
    level = _common_level(rows)
    if level is None:
        return nullspace(rows, ncols)
    flat = _flatten_cyclo_system(rows, ncols, level, rational_unknowns=True)
    return [[to_fraction(x) for x in v] for v in _nullspace_fmpq(flat)]


def _common_level(rows) -> int | None:
    level = None
    for r in rows:
        for x in r:
            if isinstance(x, CyclotomicNumber):
                if level is None:
                    level = x.level
                elif level != x.level:
                    raise ValueError("mixed cyclotomic levels")
    return level


def _flatten_cyclo_system(rows, ncols, level, rational_unknowns) -> fmpq_mat:
    phi = euler_phi(level)
    ucols = ncols if rational_unknowns else ncols * phi
    flat_rows = []
    for r in rows:
        block = [[fmpq(0)] * ucols for _ in range(phi)]
        for j, a in enumerate(r):
            if not isinstance(a, CyclotomicNumber):
                a = CyclotomicNumber.from_rational(level, a)
            if a.is_zero():
                continue
            if rational_unknowns:
                for e, c in enumerate(a.poly.coeffs()):
                    block[e][j] += c
            else:
                for k in range(phi):
                    prod = a * CyclotomicNumber.zeta(level, k)
                    for e, c in enumerate(prod.poly.coeffs()):
                        block[e][j * phi + k] += c
        flat_rows.extend(block)
    return fmpq_mat(len(flat_rows), ucols, [x for r in flat_rows for x in r]) if flat_rows else fmpq_mat(0, ucols)


def cyclo_echelon_basis(vecs: list[list[CyclotomicNumber]], level: int) -> list[list[CyclotomicNumber]]:
    """Reduced echelon basis of the Q(zeta)-span of ``vecs``."""
    rows = [list(v) for v in vecs]
    if not rows:
        return []
    ncols = len(rows[0])
    out = []
    pivot_row = 0
    for col in range(ncols):
        piv = next((i for i in range(pivot_row, len(rows)) if not rows[i][col].is_zero()), None)
        if piv is None:
            continue
        rows[pivot_row], rows[piv] = rows[piv], rows[pivot_row]
        inv = rows[pivot_row][col].inverse()
        rows[pivot_row] = [x * inv for x in rows[pivot_row]]
        for i in range(len(rows)):
            if i != pivot_row and not rows[i][col].is_zero():
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[pivot_row])]
        pivot_row += 1
        if pivot_row == len(rows):
            break
    return rows[:pivot_row]


def rank(rows: Sequence[Sequence]) -> int:
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    level = _common_level(rows)
    if level is None:
        return _as_fmpq_mat(rows).rank()
    return len(cyclo_echelon_basis([[x if isinstance(x, CyclotomicNumber) else CyclotomicNumber.from_rational(level, x) for x in r] for r in rows], level))


def bareiss_rank(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free Gaussian elimination rank of an integer matrix."""
    A = [list(map(int, r)) for r in rows]
    if not A:
        return 0
    m, n = len(A), len(A[0])
    prev = 1
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(r + 1, m):
            for j in range(c + 1, n):
                A[i][j] = (A[i][j] * A[r][c] - A[i][c] * A[r][j]) // prev
            A[i][c] = 0
        prev = A[r][c]
        r += 1
        if r == m:
            break
    return r


def mat_vec(rows, v):
    out = []
    for r in rows:
        acc = 0
        for a, x in zip(r, v):
            acc = acc + a * x
        out.append(acc)
    return out


def clear_denominators(v: Iterable) -> list[int]:
    """Primitive integer vector proportional to a rational vector."""
    v = [to_fraction(x) for x in v]
    lcm = 1
    for x in v:
        lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        return ints
    return [x // g for x in ints]


# ---------------------------------------------------------------------------
# homogeneous polynomials


def monomials(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent vectors of degree ``degree`` in grevlex-descending order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    out.sort(key=lambda e: (sum(e), tuple(-x for x in reversed(e))), reverse=True)
    return out


class HomogPoly:
    """Homogeneous polynomial: mapping exponent-vector -> nonzero coefficient."""

    __slots__ = ("nvars", "degree", "terms")

    def __init__(self, nvars: int, terms: dict | Iterable = (), degree: int | None = None):
        items = terms.items() if isinstance(terms, dict) else terms
        clean: dict = {}
        for exps, c in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError(f"exponent vector {exps} has wrong length for {nvars} variables")
            if not isinstance(c, CyclotomicNumber):
                c = to_fraction(c)
            clean[exps] = clean.get(exps, 0) + c
        clean = {e: c for e, c in clean.items() if c != 0}
        degs = {sum(e) for e in clean}
        if len(degs) > 1:
            raise ValueError(f"not homogeneous: degrees {sorted(degs)}")
        if degree is None:
            degree = degs.pop() if degs else 0
        elif degs and degs.pop() != degree:
            raise ValueError("declared degree does not match terms")
        self.nvars = nvars
        self.degree = degree
        self.terms = clean

    @classmethod
    def from_vector(cls, nvars: int, degree: int, coeffs: Sequence, basis: Sequence[tuple] | None = None):
        basis = basis if basis is not None else monomials(nvars, degree)
        return cls(nvars, zip(basis, coeffs), degree=degree)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, HomogPoly):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.nvars == other.nvars
        return self.nvars == other.nvars and self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, self.degree, frozenset(self.terms.items())))

    def __add__(self, other: "HomogPoly") -> "HomogPoly":
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return HomogPoly(self.nvars, t, degree=self.degree)

    def __neg__(self):
        return HomogPoly(self.nvars, {e: -c for e, c in self.terms.items()}, degree=self.degree)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, HomogPoly):
            t: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    t[e] = t.get(e, 0) + c1 * c2
            return HomogPoly(self.nvars, t, degree=self.degree + other.degree)
        return HomogPoly(self.nvars, {e: c * other for e, c in self.terms.items()}, degree=self.degree)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = HomogPoly(self.nvars, {(0,) * self.nvars: 1})
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, point: Sequence):
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        """Evaluate at ``point``; coordinates may be any ring elements."""
        acc = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * (x**k if k > 1 else x)
            acc = acc + term
        return acc

    def eval_mod(self, point: Sequence[int], m: int) -> int:
        acc = 0
        for e, c in self.terms.items():
            c = to_fraction(c)
            t = c.numerator * pow(c.denominator, -1, m)
            for x, k in zip(point, e):
                if k:
                    t = t * pow(x, k, m)
            acc += t
        return acc % m

    def diff(self, i: int) -> "HomogPoly":
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = c * e[i]
        return HomogPoly(self.nvars, t, degree=max(self.degree - 1, 0))

    def is_integral(self) -> bool:
        return all(not isinstance(c, CyclotomicNumber) and to_fraction(c).denominator == 1 for c in self.terms.values())

    def primitive(self) -> "HomogPoly":
        """Integer-coefficient multiple with content 1 (rational coefficients only)."""
        keys = list(self.terms)
        ints = clear_denominators([self.terms[k] for k in keys])
        return HomogPoly(self.nvars, dict(zip(keys, ints)), degree=self.degree)

    def coefficient_vector(self, basis: Sequence[tuple]) -> list:
        return [self.terms.get(e, Fraction(0)) for e in basis]

    def to_json(self) -> list:
        out = []
        for e, c in sorted(self.terms.items(), reverse=True):
            c = to_fraction(c)
            out.append([list(e), str(c.numerator), str(c.denominator)])
        return out

    @classmethod
    def from_json(cls, nvars: int, data: list, degree: int | None = None) -> "HomogPoly":
        return cls(nvars, [(e, Fraction(int(n), int(d))) for e, n, d in data], degree=degree)

    def __repr__(self):
        names = variable_names(self.nvars)
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"{names[i]}^{k}" if k > 1 else names[i] for i, k in enumerate(e) if k)
            parts.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(parts) or "0"


def variable_names(n: int) -> list[str]:
    if n == 6:
        return ["x", "y", "z", "w", "t", "u"]
    if n <= 4:
        return ["X", "Y", "Z", "W"][:n]
    return [f"x{i}" for i in range(n)]


def parse_poly(expr: str, names: Sequence[str]) -> HomogPoly:
    """Parse a polynomial written with the given variable names (via sympy)."""
    import sympy

    syms = sympy.symbols(list(names))
    p = sympy.Poly(sympy.sympify(expr, locals=dict(zip(names, syms))), *syms)
    return HomogPoly(len(names), [(m, Fraction(int(c.p), int(c.q))) for m, c in p.terms()])
