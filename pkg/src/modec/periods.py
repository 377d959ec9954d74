"""Period lattice of an eigenform, optimal-curve matching, modular degree, cusp constants.

A period is phi(g) = 2 pi i int_{i}^{g(i)} f(t) dt for g in Gamma.  The path
follows the S/T word of g: S letters fix i and contribute nothing, a T^e
letter after the prefix h contributes A_j(i + b + e) - A_j(i + b) where
h = +-gamma alpha_j T^b and A_j is the antiderivative of the expansion at
cusp j.  Only the values A_j(i + m), m mod w_j, are ever needed.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np

from .elliptic import O, EllipticCurveQ, PeriodLattice, RecognitionError, curve_periods, torsion_identify_cyclotomic
from .qexp import FracQSeries, PrecisionError, antiderivative_2pii
from .sl2z import (
    IDENTITY,
    CuspTable,
    MatZ,
    T_pow,
    generate_group,
    lift_slnz,
    random_kernel_words,
    sl2_generators_mod,
    sl_part,
    st_decompose,
)

log = logging.getLogger(__name__)


class LatticeError(ArithmeticError):
    """Sampled periods do not look like a period lattice of a curve over Q."""


def _cplx(c, dps):
    return c.to_complex(dps) if hasattr(c, "to_complex") else mpmath.mpc(c)


class AntiderivativeTable:
    """A_j(i + m) for every cusp j and m mod w_j, at a fixed working precision."""

    def __init__(self, series: Sequence[FracQSeries], precision_bits: int = 100):
        self.bits = precision_bits
        self.dps = max(15, int(precision_bits * 0.302) + 5)
        self.widths = [s.width for s in series]
        self.values: list = []
        with mpmath.workdps(self.dps + 10):
            for s in series:
                self.values.append(self._tabulate(antiderivative_2pii(s)))

    def _tabulate(self, A: FracQSeries) -> list:
        w = A.width
        if A.is_zero():
            return [mpmath.mpc(0)] * w
        r = mpmath.exp(-2 * mpmath.pi / w)
        # the last stored terms bound the tail at Im t = 1
        tail = max(abs(_cplx(c, 15)) for c in A.coeffs[-8:]) * r**A.prec / (1 - r) ** 3
        if tail > mpmath.mpf(2) ** (-self.bits):
            raise PrecisionError(
                f"{A.prec} terms at width {w} give tail {mpmath.nstr(tail, 3)} > 2^-{self.bits}; raise prec or lower precision_bits"
            )
        zw = [mpmath.expjpi(mpmath.mpf(2 * k) / w) for k in range(w)]
        u = [(n, _cplx(c, self.dps + 10) * r**n) for n, c in A.items() if not (c.is_zero() if hasattr(c, "is_zero") else c == 0)]
        return [mpmath.fsum(a * zw[(n * m) % w] for n, a in u) for m in range(w)]

    def at(self, j: int, m: int):
        return self.values[j][m % self.widths[j]]


def period_of(g, table: AntiderivativeTable, cusps: CuspTable) -> mpmath.mpc:
    """2 pi i int_i^{g(i)} f along the S/T path of g."""
    word = st_decompose(MatZ.of(g))
    h = IDENTITY
    total = mpmath.mpc(0)
    for name, e in word.letters:
        if name == "T":
            info = cusps.lookup(h)
            total += table.at(info.index, info.shift + e) - table.at(info.index, info.shift)
            h = h * T_pow(e)
        else:
            h = h * MatZ(0, -1, 1, 0)
    return total


def path_integral(g, table: AntiderivativeTable, cusps: CuspTable) -> mpmath.mpc:
    """Same integral for any g in SL2(Z), not necessarily in Gamma."""
    return period_of(g, table, cusps)


def gamma_mod_n(bundle) -> frozenset:
    """Image of Gamma = G^T cap SL2(Z) in SL2(Z/N), from the bundle's generators."""
    N = bundle.level
    if not bundle.group_generators:
        raise ValueError("bundle has no group_generators; cannot locate cusps")
    return sl_part(generate_group(bundle.group_generators, N), N)


def cusp_table(bundle) -> CuspTable:
    return CuspTable([(c.matrix, c.width) for c in bundle.cusps], gamma_mod_n(bundle), bundle.level)


def sample_matrices(bundle, num_mats: int = 20, seed: int = 0) -> list[MatZ]:
    """Lifts of generators of Gamma mod N, then random short products of them and elements of Gamma(N)."""
    N = bundle.level
    gamma = gamma_mod_n(bundle)
    rng = random.Random(seed)
    lifts = [lift_slnz(g, N) for g in sl2_generators_mod(gamma, N, random.Random(seed + 1))]
    pool = lifts + [g.inverse() for g in lifts]
    kern = random_kernel_words(N, max(num_mats, 4), rng=rng)
    out = list(lifts)
    while len(out) < num_mats:
        m = IDENTITY
        for _ in range(rng.randint(2, 4)):
            m = m * rng.choice(pool)
        if rng.random() < 0.25:
            m = m * rng.choice(kern)
        out.append(m)
    return out[: max(num_mats, len(lifts))]


def sample_periods(series: Sequence[FracQSeries], bundle, num_mats: int = 20, precision_bits: int = 100, seed: int = 0) -> list:
    table = AntiderivativeTable(series, precision_bits)
    ct = cusp_table(bundle)
    out = []
    with mpmath.workdps(table.dps):
        for g in sample_matrices(bundle, num_mats, seed):
            out.append((g, period_of(g, table, ct)))
    return out


# ---------------------------------------------------------------------------
# lattice recognition


@dataclass
class RecognizedLattice:
    omega1: mpmath.mpf
    omega2: Optional[mpmath.mpc]
    shape: str  # rectangular, triangular or degenerate
    coords: list = field(default_factory=list)  # integer (a, b) per sample in the basis

    def as_period_lattice(self, bits: int = 100) -> PeriodLattice:
        if self.omega2 is None:
            raise LatticeError("degenerate lattice (no imaginary periods)")
        return PeriodLattice(self.omega1, self.omega2, self.shape, bits)


def _to_ratio(x, unit, max_num: int, tol) -> Fraction:
    r = x / unit
    fr = Fraction(str(mpmath.nstr(r, 25))).limit_denominator(max_num)
    if abs(fr.numerator) > max_num or abs(r - mpmath.mpf(fr.numerator) / fr.denominator) > tol * max(1, abs(r)):
        raise LatticeError(f"period ratio {mpmath.nstr(r, 15)} is not a rational with terms <= {max_num}")
    return fr


def recognize_lattice(values: Sequence, max_num: int = 100, rel_tol: float = 1e-8,
                      precision_bits: int = 100) -> RecognizedLattice:
    """Z-lattice spanned by the sampled periods, in rectangular or triangular form.

    Real and imaginary parts are divided by their smallest nonzero absolute
    value and rounded to rationals with numerator and denominator <= max_num.
    """
    with mpmath.workprec(precision_bits + 10):
        return _recognize(values, max_num, rel_tol)


def _recognize(values, max_num, rel_tol) -> RecognizedLattice:
    vals = [mpmath.mpc(v) for v in values]
    scale = max((abs(v) for v in vals), default=mpmath.mpf(0))
    if scale == 0:
        raise LatticeError("all sampled periods vanish")
    tiny = scale * rel_tol
    res = [mpmath.re(v) for v in vals]
    ims = [mpmath.im(v) for v in vals]
    r0 = min((abs(x) for x in res if abs(x) > tiny), default=None)
    i0 = min((abs(y) for y in ims if abs(y) > tiny), default=None)
    if r0 is None:
        raise LatticeError("no sampled period has a nonzero real part")
    xs = [_to_ratio(x, r0, max_num, rel_tol) if abs(x) > tiny else Fraction(0) for x in res]
    ys = [_to_ratio(y, i0, max_num, rel_tol) if i0 is not None and abs(y) > tiny else Fraction(0) for y in ims]
    D = 1
    for q in xs + ys:
        D = D * q.denominator // math.gcd(D, q.denominator)
    X = [int(q * D) for q in xs]
    Y = [int(q * D) for q in ys]
    # basis (e, 0), (f, d): d = gcd of Y, e generates the Y = 0 sublattice
    d = 0
    for y in Y:
        d = math.gcd(d, y)
    if d == 0:
        e = 0
        for x in X:
            e = math.gcd(e, x)
        w1 = r0 * e / D
        return RecognizedLattice(w1, None, "degenerate", [(x // e, 0) for x in X])
    # combine vectors to reach (f, d), reduce the rest to Y = 0
    f, acc = 0, 0
    coef = _bezout_many(Y)
    f = sum(c * x for c, x in zip(coef, X))
    e = 0
    for x, y in zip(X, Y):
        e = math.gcd(e, x - (y // d) * f)
    if e == 0:
        raise LatticeError("sampled periods are collinear over R but not over Q")
    f %= e
    coords = [((x - (y // d) * f) // e, y // d) for x, y in zip(X, Y)]
    if f == 0:
        shape = "rectangular"
    elif 2 * f == e:
        shape = "triangular"
    else:
        raise LatticeError(f"lattice basis ({e}, 0), ({f}, {d}) is neither rectangular nor triangular")
    w1 = r0 * e / D
    w2 = mpmath.mpc(r0 * f / D, i0 * d / D)
    # orient so that omega1 > 0 and Im omega2 > 0
    return RecognizedLattice(+w1, w2, shape, coords)


def _bezout_many(ys: Sequence[int]) -> list[int]:
    """Integers c with sum c_i y_i = gcd(ys)."""
    coef = [0] * len(ys)
    g = 0
    for i, y in enumerate(ys):
        if y == 0:
            continue
        if g == 0:
            g, coef[i] = abs(y), (1 if y > 0 else -1)
            continue
        h, u, v = _xgcd(g, y)
        coef = [c * u for c in coef]
        coef[i] = v
        g = h
    return coef


def _xgcd(a: int, b: int):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


# ---------------------------------------------------------------------------
# matching against an isogeny class


@dataclass
class CurveMatch:
    record: object  # EllCurveRecord
    c: Fraction
    ratio: mpmath.mpf
    lattice: PeriodLattice


def match_optimal_curve(lat: RecognizedLattice, records: Sequence, precision_bits: int = 100, tol: float = 1e-6) -> CurveMatch:
    """First curve E' whose lattice is c times the form's lattice; c = 1/round(1/ratio)."""
    if lat.omega2 is None:
        raise LatticeError("cannot match a degenerate lattice")
    tried = []
    for rec in records:
        L = curve_periods(rec.curve(), precision_bits)
        r1 = L.omega1 / lat.omega1
        r2 = mpmath.im(L.omega2) / mpmath.im(lat.omega2)
        tried.append((rec.label, mpmath.nstr(r1, 10), mpmath.nstr(r2, 10)))
        if L.shape != lat.shape or abs(r1 - r2) > tol * abs(r1):
            continue
        inv = 1 / r1
        n = int(mpmath.nint(inv))
        if n == 0 or abs(inv - n) > tol * abs(inv):
            log.warning("%s: ratio %s is not 1/integer", rec.label, mpmath.nstr(r1, 12))
            continue
        return CurveMatch(rec, Fraction(1, n), r1, L)
    raise LatticeError(f"no curve in the class matches the period lattice; ratios tried: {tried}")


# ---------------------------------------------------------------------------
# modular degree via Stokes on translates of the SL2(Z) fundamental domain


def _float_coeffs(s: FracQSeries) -> np.ndarray:
    out = np.zeros(s.prec, dtype=complex)
    for n, c in s.items():
        out[n] = complex(_cplx(c, 20))
    return out


def petersson_norm(series: Sequence[FracQSeries], widths: Sequence[int], nodes: int = 96) -> float:
    """int over Gamma \\ H of |f|^2 dx dy.

    Cosets are alpha_j T^b (0 <= b < w_j).  On each copy of the standard domain
    D, |h|^2 dx dy = d((i/8 pi^2) H dH-bar) with dH = 2 pi i h dt, so only the
    unit-circle arc and the two vertical sides contribute.
    """
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
    theta = np.pi / 2 + (np.pi / 6) * gl_x  # [pi/3, 2pi/3]
    wts = (np.pi / 6) * gl_w
    tau_arc = np.exp(1j * theta)
    y0 = math.sqrt(3) / 2
    total = 0.0
    for s, w in zip(series, widths):
        a = _float_coeffs(s)
        P = len(a)
        n = np.arange(P)
        A = np.zeros(P, dtype=complex)
        A[1:] = a[1:] * w / n[1:]
        if a[0] != 0:
            raise ValueError("form has a constant term")
        K = np.zeros((P, P))
        nn = n[:, None] + n[None, :]
        K[nn > 0] = 1.0 / nn[nn > 0]
        E_arc = np.exp(2j * np.pi * np.outer(tau_arc, n) / w)  # nodes x P
        damp = np.exp(-2 * np.pi * n * y0 / w)
        for b in range(w):
            tw = np.exp(2j * np.pi * n * b / w)
            Ab, ab = A * tw, a * tw
            # arc from rho' to rho: theta decreasing, dt = i e^{i theta} d theta
            H = E_arc @ Ab
            h = E_arc @ ab
            dt = 1j * tau_arc
            arc = -np.sum(wts * H * np.conj(2j * np.pi * h * dt))
            sides = 0.0
            for x, sgn in ((0.5, 1), (-0.5, -1)):
                ph = np.exp(2j * np.pi * n * x / w) * damp
                u = Ab * ph
                v = np.conj(ab * ph)
                # int_{y0}^inf H conj(h) dy, then dt = i dy gives the factor -2 pi
                sides += sgn * (-2 * np.pi) * (w / (2 * np.pi)) * (u @ K @ v)
            total += (1j / (8 * np.pi**2) * (arc + sides)).real
    return float(total)


def modular_degree(series: Sequence[FracQSeries], widths: Sequence[int], c, curve_lattice: PeriodLattice, tol: float = 1e-6) -> int:
    """deg = 4 pi^2 |c|^2 ||f||^2 / covol(Lambda_E), rounded after a closeness check."""
    norm = petersson_norm(series, widths)
    vol = float(curve_lattice.covolume())
    deg = 4 * math.pi**2 * float(c) ** 2 * norm / vol
    d = round(deg)
    if d < 1 or abs(deg - d) > max(tol * deg, 1e-6):
        raise PrecisionError(f"modular degree estimate {deg!r} is not close to an integer")
    return d


# ---------------------------------------------------------------------------
# cusp constants


@dataclass
class CuspConstant:
    cusp: int
    z: mpmath.mpc  # image of the cusp in C / Lambda_E
    coords: tuple  # rational (x, y) with z = x omega1 + y omega2
    point: object  # O or an exact point over Q(zeta_N)
    order: int

    @property
    def is_identity(self) -> bool:
        return self.point is O


def cusp_constants(series: Sequence[FracQSeries], bundle, c, curve: EllipticCurveQ, curve_lattice: PeriodLattice,
                   precision_bits: int = 100, max_order: int = 60) -> list[CuspConstant]:
    """z_j = c * 2 pi i int_{i infinity}^{alpha_j(infinity)} f, identified as a torsion point."""
    table = AntiderivativeTable(series, precision_bits)
    ct = cusp_table(bundle)
    out = []
    with mpmath.workdps(table.dps):
        for j, cu in enumerate(bundle.cusps):
            v = table.at(0, 0) + path_integral(cu.matrix, table, ct) - table.at(j, 0)
            z = mpmath.mpf(c.numerator) / c.denominator * v
            x, y = curve_lattice.coordinates(z)
            try:
                pt, m = torsion_identify_cyclotomic(curve, z, curve_lattice, bundle.level, max_order, table.dps - 5)
            except RecognitionError as exc:
                raise RecognitionError(f"cusp {cu.point}: {exc}") from exc
            fx = Fraction(int(mpmath.nint(x * m)), m) if m else Fraction(0)
            fy = Fraction(int(mpmath.nint(y * m)), m) if m else Fraction(0)
            out.append(CuspConstant(j, z, (fx, fy), pt, m))
    return out
