"""Elliptic curves over Q (and Q(zeta_N) for points): invariants, a_p, AGM periods,
rank-0 Mordell-Weil groups, division polynomials, torsion recognition, the
Weierstrass p-function and the group law.

Points are tuples (x, y) over any field whose elements support + - * /;
the point at infinity is ``O`` (None).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath
import numpy as np
from flint import fmpq_poly

from .exactmath import CyclotomicNumber, euler_phi
from .qexp import LaurentZSeries

O = None  # point at infinity


class BadReductionError(ValueError):
    pass


class RecognitionError(ArithmeticError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class EllipticCurveQ:
    """y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q."""

    def __init__(self, a1=0, a2=0, a3=0, a4=0, a6=0, label: Optional[str] = None):
        self.a = tuple(Fraction(x) for x in (a1, a2, a3, a4, a6))
        self.label = label
        a1, a2, a3, a4, a6 = self.a
        self.b2 = a1 * a1 + 4 * a2
        self.b4 = 2 * a4 + a1 * a3
        self.b6 = a3 * a3 + 4 * a6
        self.b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        self.c4 = b2 * b2 - 24 * b4
        self.c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
        self.discriminant = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @classmethod
    def from_ainvs(cls, ainvs, label=None):
        return cls(*ainvs, label=label)

    @property
    def ainvs(self):
        return self.a

    @property
    def j(self) -> Fraction:
        if self.discriminant == 0:
            raise ZeroDivisionError("singular curve")
        return self.c4**3 / self.discriminant

    @property
    def g2(self) -> Fraction:
        return self.c4 / 12

    @property
    def g3(self) -> Fraction:
        return self.c6 / 216

    def __repr__(self):
        return f"EllipticCurveQ({[str(x) for x in self.a]}{', ' + self.label if self.label else ''})"

    def __eq__(self, other):
        return isinstance(other, EllipticCurveQ) and self.a == other.a

    def __hash__(self):
        return hash(self.a)

    # -- points ----------------------------------------------------------
    def equation(self, x, y):
        a1, a2, a3, a4, a6 = self.a
        return y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6)

    def is_on(self, P, tol=None) -> bool:
        if P is O:
            return True
        v = self.equation(*P)
        if tol is None:
            return v == 0
        return abs(v) <= tol

    def cubic(self) -> fmpq_poly:
        """4x^3 + b2 x^2 + 2 b4 x + b6 = (2y + a1 x + a3)^2."""
        return fmpq_poly([_q(self.b6), _q(2 * self.b4), _q(self.b2), 4])

    def integral_scaling(self) -> int:
        u = 1
        for i, a in zip((1, 2, 3, 4, 6), self.a):
            d = a.denominator
            # smallest v with v^i a integral divides the lcm of denominators
            u = _lcm(u, d)
        return u

    def integral_model(self) -> "EllipticCurveQ":
        u = self.integral_scaling()
        return EllipticCurveQ(*(a * u**i for a, i in zip(self.a, (1, 2, 3, 4, 6))), label=self.label)


def _q(x):
    from flint import fmpq

    x = Fraction(x)
    return fmpq(x.numerator, x.denominator)


# ---------------------------------------------------------------------------
# reduction


def count_points_mod(E: EllipticCurveQ, p: int) -> int:
    """#E(F_p) for an integral model with good reduction at p."""
    Ei = E.integral_model()
    if Ei.discriminant.numerator % p == 0:
        raise BadReductionError(f"{E} has bad reduction at {p} (on the integral model)")
    a1, a2, a3, a4, a6 = (int(x) % p for x in Ei.a)
    x = np.arange(p, dtype=np.int64)
    rhs = (((x * x % p) * x) % p + a2 * (x * x % p) + a4 * x + a6) % p
    lin = (a1 * x + a3) % p
    if p == 2:
        n = 0
        for xv in range(2):
            for yv in range(2):
                if (yv * yv + int(lin[xv]) * yv - int(rhs[xv])) % 2 == 0:
                    n += 1
        return n + 1
    disc = (lin * lin + 4 * rhs) % p
    # Legendre symbol via Euler's criterion, vectorized
    leg = _powmod_vec(disc, (p - 1) // 2, p)
    leg = np.where(leg == p - 1, -1, leg)
    return int(p + np.sum(leg) + 1)


def _powmod_vec(a, e, p):
    out = np.ones_like(a)
    base = a % p
    while e:
        if e & 1:
            out = out * base % p
        base = base * base % p
        e >>= 1
    return out


def ap(E: EllipticCurveQ, p: int) -> int:
    """a_p = p + 1 - #E(F_p) by enumeration."""
    return p + 1 - count_points_mod(E, p)


# ---------------------------------------------------------------------------
# periods


@dataclass(frozen=True)
class PeriodLattice:
    omega1: mpmath.mpf
    omega2: mpmath.mpc
    shape: str  # "rectangular" or "triangular"
    precision_bits: int = 128

    @property
    def tau(self):
        return self.omega2 / self.omega1

    def covolume(self):
        return abs(mpmath.im(mpmath.conj(self.omega1) * self.omega2))

    def coordinates(self, z):
        """Real (x, y) with z = x omega1 + y omega2."""
        w1, w2 = mpmath.mpc(self.omega1), mpmath.mpc(self.omega2)
        det = mpmath.im(mpmath.conj(w1) * w2)
        y = mpmath.im(mpmath.conj(w1) * z) / det
        x = mpmath.im(mpmath.conj(z) * w2) / det
        return x, y

    def invariants(self):
        """(g2, g3) of the lattice from Eisenstein q-series."""
        with mpmath.workprec(self.precision_bits + 20):
            q = mpmath.exp(2j * mpmath.pi * self.tau)
            eps = mpmath.mpf(2) ** (-self.precision_bits - 20)
            s3 = s5 = mpmath.mpc(0)
            n = 1
            while True:
                qn = q**n
                t = qn / (1 - qn)
                s3 += n**3 * t
                s5 += n**5 * t
                if abs(n**5 * qn) < eps:
                    break
                n += 1
            e4 = 1 + 240 * s3
            e6 = 1 - 504 * s5
            k = 2 * mpmath.pi / self.omega1
            return k**4 * e4 / 12, k**6 * e6 / 216

    def reduce(self, z):
        x, y = self.coordinates(z)
        return z - mpmath.nint(x) * self.omega1 - mpmath.nint(y) * self.omega2


def _agm(a, b):
    return mpmath.agm(a, b)


def curve_periods(E: EllipticCurveQ, precision_bits: int = 128) -> PeriodLattice:
    """Period lattice of dx/(2y + a1 x + a3) by the AGM."""
    with mpmath.workprec(precision_bits + 30):
        b2, b4, b6 = (mpmath.mpf(x.numerator) / x.denominator for x in (E.b2, E.b4, E.b6))
        roots = mpmath.polyroots([4, b2, 2 * b4, b6], maxsteps=200, extraprec=precision_bits)
        if E.discriminant > 0:
            e3, e2, e1 = sorted(mpmath.re(r) for r in roots)
            w1 = mpmath.pi / _agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2))
            w2 = 1j * mpmath.pi / _agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e2 - e3))
            return PeriodLattice(+w1, mpmath.mpc(w2), "rectangular", precision_bits)
        e1 = mpmath.re(min(roots, key=lambda r: abs(mpmath.im(r))))
        beta = mpmath.sqrt(3 * e1 * e1 + b2 * e1 / 2 + b4 / 2)
        alpha = 3 * e1 + b2 / 4
        w1 = 2 * mpmath.pi / _agm(2 * mpmath.sqrt(beta), mpmath.sqrt(2 * beta + alpha))
        w2 = w1 / 2 + 1j * mpmath.pi / _agm(2 * mpmath.sqrt(beta), mpmath.sqrt(2 * beta - alpha))
        return PeriodLattice(+w1, mpmath.mpc(w2), "triangular", precision_bits)


# ---------------------------------------------------------------------------
# Weierstrass p


def wp_series(g2, g3, terms: int = 20):
    """Laurent expansions of p and p' at 0, coefficients of z^k for k < terms.

    c2 = g2/20, c3 = g3/28, c_n = 3/((2n+1)(n-3)) sum_{m=2}^{n-2} c_m c_{n-m},
    where p = z^-2 + sum_{n>=2} c_n z^{2n-2}.
    """
    if isinstance(g2, PeriodLattice):
        g2, g3 = g2.invariants()
    nmax = max(2, terms // 2 + 1)
    c = {2: g2 / 20, 3: g3 / 28}
    for n in range(4, nmax + 1):
        c[n] = Fraction(3, (2 * n + 1) * (n - 3)) * sum(c[m] * c[n - m] for m in range(2, n - 1)) if _exact(g2) else (
            mpmath.mpf(3) / ((2 * n + 1) * (n - 3)) * sum(c[m] * c[n - m] for m in range(2, n - 1))
        )
    zero = Fraction(0) if _exact(g2) else mpmath.mpf(0)
    coeffs = [zero] * (terms + 2)
    coeffs[0] = Fraction(1) if _exact(g2) else mpmath.mpf(1)
    for n in range(2, nmax + 1):
        k = 2 * n - 2
        if k < terms:
            coeffs[k + 2] = c[n]
    wp = LaurentZSeries(-2, coeffs)
    return wp, wp.derivative()


def _exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def wp_numeric(z, lattice: PeriodLattice):
    """(p(z), p'(z)) by the q-product formula."""
    with mpmath.workprec(lattice.precision_bits + 20):
        z = lattice.reduce(mpmath.mpc(z))
        k = 2j * mpmath.pi / lattice.omega1
        u = mpmath.exp(k * z)
        q = mpmath.exp(2j * mpmath.pi * lattice.tau)
        if abs(u - 1) < mpmath.mpf(2) ** (-lattice.precision_bits // 2):
            raise ZeroDivisionError("z is a lattice point")
        s = mpmath.mpf(1) / 12 + u / (1 - u) ** 2
        d = u * (1 + u) / (1 - u) ** 3
        eps = mpmath.mpf(2) ** (-lattice.precision_bits - 10)
        n = 1
        while True:
            qn = q**n
            wp, wm = qn * u, qn / u
            ts = wp / (1 - wp) ** 2 + wm / (1 - wm) ** 2 - 2 * qn / (1 - qn) ** 2
            td = wp * (1 + wp) / (1 - wp) ** 3 - wm * (1 + wm) / (1 - wm) ** 3
            s += ts
            d += td
            if abs(qn) < eps and n > 2:
                break
            n += 1
        return k * k * s, k**3 * d


def wp_lattice_sum(z, w1, w2, radius: int = 60):
    """Direct (slow) lattice sum for p, with Eisenstein summation in rings; oracle only."""
    acc = 1 / z**2
    for m in range(-radius, radius + 1):
        for n in range(-radius, radius + 1):
            if m == 0 and n == 0:
                continue
            w = m * w1 + n * w2
            acc += 1 / (z - w) ** 2 - 1 / w**2
    return acc


def point_from_z(E: EllipticCurveQ, z, lattice: PeriodLattice):
    """Numeric point of E for z in C / lattice (O at lattice points)."""
    x, y = lattice.coordinates(z)
    if abs(x - mpmath.nint(x)) < 1e-25 and abs(y - mpmath.nint(y)) < 1e-25:
        return O
    P, dP = wp_numeric(z, lattice)
    a1, _, a3, _, _ = (mpmath.mpf(a.numerator) / a.denominator for a in E.a)
    X = P - mpmath.mpf(E.b2.numerator) / E.b2.denominator / 12
    Y = (dP - a1 * X - a3) / 2
    return (X, Y)


# ---------------------------------------------------------------------------
# group law


def neg_point(E: EllipticCurveQ, P):
    if P is O:
        return O
    a1, _, a3, _, _ = E.a
    x, y = P
    return (x, -y - a1 * x - a3)


def add_points(E: EllipticCurveQ, P, Q, check: bool = True):
    """P + Q by chord and tangent over any field (exact or mpmath)."""
    if check:
        for R in (P, Q):
            if R is not O and not _on_curve(E, R):
                raise ValueError(f"point {R} is not on {E}")
    if P is O:
        return Q
    if Q is O:
        return P
    a1, a2, a3, a4, a6 = E.a
    x1, y1 = P
    x2, y2 = Q
    if _eq(x1, x2):
        if _eq(y1 + y2 + a1 * x2 + a3, 0):
            return O
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return (x3, y3)


def mul_point(E: EllipticCurveQ, n: int, P):
    if n < 0:
        return mul_point(E, -n, neg_point(E, P))
    R, A = O, P
    while n:
        if n & 1:
            R = add_points(E, R, A, check=False)
        A = add_points(E, A, A, check=False)
        n >>= 1
    return R


def point_order(E: EllipticCurveQ, P, bound: int = 100) -> Optional[int]:
    R = P
    for n in range(1, bound + 1):
        if R is O:
            return n
        R = add_points(E, R, P, check=False)
    return None


def _eq(a, b) -> bool:
    d = a - b
    if isinstance(d, (mpmath.mpf, mpmath.mpc, complex, float)):
        return abs(d) < mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
    return d == 0


def _on_curve(E, P) -> bool:
    v = E.equation(*P)
    if isinstance(v, (mpmath.mpf, mpmath.mpc, complex, float)):
        return abs(v) < mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
    return v == 0


# ---------------------------------------------------------------------------
# division polynomials and torsion


def division_poly(E: EllipticCurveQ, m: int) -> fmpq_poly:
    """Univariate m-division polynomial in x.

    psi_m for odd m and psi_m * psi_2 for even m, so that the roots are the
    x-coordinates of the nonzero m-torsion; m = 2 gives 4x^3 + b2 x^2 + 2 b4 x + b6.
    """
    if m < 1:
        raise ValueError("m must be positive")
    g = _division_g(E, m)
    return g * E.cubic() if m % 2 == 0 else g


def _division_g(E: EllipticCurveQ, m: int) -> fmpq_poly:
    cache = getattr(E, "_divcache", None)
    if cache is None:
        b2, b4, b6, b8 = (_q(x) for x in (E.b2, E.b4, E.b6, E.b8))
        cache = {
            0: fmpq_poly([0]),
            1: fmpq_poly([1]),
            2: fmpq_poly([1]),
            3: fmpq_poly([b8, 3 * b6, 3 * b4, b2, 3]),
            4: fmpq_poly([b4 * b8 - b6 * b6, b2 * b8 - b4 * b6, 10 * b8, 10 * b6, 5 * b4, b2, 2]),
        }
        E._divcache = cache
    if m in cache:
        return cache[m]
    F2 = E.cubic() ** 2
    g = _division_g
    n = m // 2
    if m % 2:
        if n % 2 == 0:
            r = F2 * g(E, n + 2) * g(E, n) ** 3 - g(E, n - 1) * g(E, n + 1) ** 3
        else:
            r = g(E, n + 2) * g(E, n) ** 3 - F2 * g(E, n - 1) * g(E, n + 1) ** 3
    else:
        r = g(E, n) * (g(E, n + 2) * g(E, n - 1) ** 2 - g(E, n - 2) * g(E, n + 1) ** 2)
    cache[m] = r
    return r


def rational_roots(f: fmpq_poly) -> list[Fraction]:
    if f.degree() < 1:
        return []
    out = []
    for fac, _ in f.factor()[1]:
        if fac.degree() == 1:
            c = fac.coeffs()
            r = -c[0] / c[1]
            out.append(Fraction(int(r.p), int(r.q)))
    return sorted(set(out))


def _rational_sqrt(x: Fraction) -> Optional[Fraction]:
    if x < 0:
        return None
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


def points_with_x(E: EllipticCurveQ, x: Fraction) -> list:
    a1, a2, a3, a4, a6 = E.a
    lin = a1 * x + a3
    disc = lin * lin + 4 * (x**3 + a2 * x * x + a4 * x + a6)
    r = _rational_sqrt(disc)
    if r is None:
        return []
    if r == 0:
        return [(x, -lin / 2)]
    return [(x, (-lin + r) / 2), (x, (-lin - r) / 2)]


def good_primes(E: EllipticCurveQ, count: int, start: int = 3):
    Ei = E.integral_model()
    D = Ei.discriminant.numerator
    out, p = [], start
    while len(out) < count:
        if all(p % q for q in range(2, int(p**0.5) + 1)) and D % p:
            out.append(p)
        p += 1
    return out


def torsion_bound(E: EllipticCurveQ, nprimes: int = 8) -> int:
    """gcd of #E(F_p) over good odd primes: a multiple of #E(Q)_tors."""
    g = 0
    for p in good_primes(E, nprimes):
        g = math.gcd(g, count_points_mod(E, p))
    return g


def torsion_points(E: EllipticCurveQ) -> list:
    """E(Q)_tors via rational roots of division polynomials, bounded by reduction."""
    B = torsion_bound(E)
    pts = {O}
    for m in range(2, B + 1):
        if B % m:
            continue
        for x in rational_roots(division_poly(E, m)):
            for P in points_with_x(E, x):
                pts.add(P)
    # close under addition (all orders divide B)
    changed = True
    while changed:
        changed = False
        for P in list(pts):
            for Q in list(pts):
                R = add_points(E, P, Q, check=False)
                if R not in pts:
                    pts.add(R)
                    changed = True
    for P in pts:
        n = point_order(E, P, B)
        assert n is not None and B % n == 0
    return sorted(pts, key=lambda P: (P is not O, P if P is not O else ()))


def mordell_weil_rank0(E: EllipticCurveQ, rank: int = 0) -> list:
    """E(Q) for a rank-0 curve (rank is input data)."""
    if rank != 0:
        raise ValueError(f"{E.label or E}: rank {rank} is not 0")
    return torsion_points(E)


def recognize_cyclotomic(z, N: int, dps: int, maxcoeff: int = 10**6) -> Optional[CyclotomicNumber]:
    """Integer relation fit z = sum c_k zeta_N^k with small rational c_k (candidate only)."""
    phi = euler_phi(N)
    with mpmath.workdps(dps):
        z = mpmath.mpc(z)
        w = mpmath.sqrt(2)
        if N <= 2:
            basis = [mpmath.mpf(1)]
        else:
            basis = [mpmath.expjpi(mpmath.mpf(2 * k) / N) for k in range(phi)]
        vec = [mpmath.re(z) + w * mpmath.im(z)] + [mpmath.re(b) + w * mpmath.im(b) for b in basis]
        if abs(z) < mpmath.mpf(10) ** (-dps // 2):
            return CyclotomicNumber.from_rational(N, 0)
        rel = mpmath.pslq(vec, maxcoeff=maxcoeff, maxsteps=10**5)
    if rel is None or rel[0] == 0:
        return None
    return CyclotomicNumber(N, [Fraction(-rel[k + 1], rel[0]) for k in range(phi)])


def torsion_identify_cyclotomic(E: EllipticCurveQ, z0, lattice: PeriodLattice, N: int, max_order: int = 60, dps: Optional[int] = None):
    """Exact point of E(Q(zeta_N)) at the torsion point z0 of C/lattice.

    z0 is rounded to (a w1 + b w2)/m; the point is computed numerically,
    recognized in Q(zeta_N), and accepted only after psi_m(x) = 0 and the
    curve equation hold exactly.
    """
    dps = dps or max(30, int(lattice.precision_bits * 0.3))
    with mpmath.workdps(dps + 10):
        x, y = lattice.coordinates(mpmath.mpc(z0))
        tol = mpmath.mpf(10) ** (-(dps // 3))
        for m in range(1, max_order + 1):
            a, b = mpmath.nint(x * m), mpmath.nint(y * m)
            if abs(x * m - a) < tol * m and abs(y * m - b) < tol * m:
                break
        else:
            raise RecognitionError(f"{z0} is not within tolerance of a torsion point of order <= {max_order}")
        a, b = int(a) % m, int(b) % m
        if a == 0 and b == 0:
            return O, 1
        g = math.gcd(math.gcd(a, b), m)
        a, b, m = a // g, b // g, m // g
        zt = (a * lattice.omega1 + b * lattice.omega2) / m
        P = point_from_z(E, zt, lattice)
    X = recognize_cyclotomic(P[0], N, dps)
    Y = recognize_cyclotomic(P[1], N, dps)
    if X is None or Y is None:
        raise RecognitionError("cyclotomic recognition failed; raise precision")
    psi = division_poly(E, m)
    val = CyclotomicNumber.from_rational(N, 0)
    for c in reversed(psi.coeffs()):
        val = val * X + Fraction(int(c.p), int(c.q))
    a1, a2, a3, a4, a6 = E.a
    eq = Y * Y + X * Y * a1 + Y * a3 - (X * X * X + X * X * a2 + X * a4 + a6)
    if not (val.is_zero() and eq.is_zero()):
        raise RecognitionError("recognized point fails exact verification; raise precision")
    return (X, Y), m
