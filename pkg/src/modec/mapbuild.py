"""Fourier expansions of x and y, the graded ring, the map X -> E' and its certificate.

x and y are written as -a/c and -b/c with a, b, c in the degree-d piece of
the graded ring.  A first pass over Q(zeta_N) locates the image of the base
point; after translating it to the origin, a second pass over Q gives the
rational triples.  The valence bound then proves that the substituted
Weierstrass relation vanishes identically.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .elliptic import O, EllipticCurveQ, wp_series
from .exactmath import CyclotomicNumber, _as_fmpq_mat, HomogPoly, clear_denominators, monomials, nullspace, rational_nullspace
from .qexp import FracQSeries, PrecisionError, antiderivative_2pii

log = logging.getLogger(__name__)


class MapError(ArithmeticError):
    """No map found in the allowed degree range, or the certificate failed."""


# ---------------------------------------------------------------------------
# x and y at every cusp


def laurent_compose(L, z: FracQSeries) -> FracQSeries:
    """sum_k L[k] z^k for a Laurent series L in z and a series z of valuation >= 1."""
    if z.val < 1:
        raise ValueError("z must vanish at the cusp")
    start = L.start
    rel = z.prec - z.val  # relative precision of z
    nterms = min(len(L.coeffs), rel // z.val + 1)
    inner = [L[start + i] for i in range(nterms)]
    # sum_i inner[i] z^i, then divide by z^-start
    zt = z.truncate(z.val * (-start) + rel) if start < 0 else z
    body = zt._const(inner[-1])
    for c in reversed(inner[:-1]):
        body = body * zt + c
    if start < 0:
        return body * zt.inverse() ** (-start)
    return body * zt**start if start else body


def _const(level, x):
    return x if isinstance(x, CyclotomicNumber) else CyclotomicNumber.from_rational(level, x)


def add_series_point(E: EllipticCurveQ, X: FracQSeries, Y: FracQSeries, P) -> tuple:
    """(X, Y) + P on E, for a series point with a pole and a constant point P."""
    if P is O:
        return X, Y
    a1, a2, a3, a4, a6 = E.a
    lvl = X.level
    xp, yp = _const(lvl, P[0]), _const(lvl, P[1])
    lam = (Y - yp) / (X - xp)
    nu = (lam * xp - yp) * -1
    x3 = lam * lam + lam * a1 - a2 - X - xp
    y3 = (lam + a1) * x3 * -1 - nu - a3
    return x3, y3


def neg_series_point(E: EllipticCurveQ, P):
    if P is O:
        return O
    a1, a2, a3, a4, a6 = E.a
    return (P[0], -P[1] - P[0] * a1 - a3)


def xy_expansions(form: Sequence[FracQSeries], c: Fraction, curve: EllipticCurveQ, cusp_constants=None,
                  prec: Optional[int] = None) -> list[tuple]:
    """Per cusp (x, y) of the composite X -> C/Lambda(E') -> E'."""
    out = []
    for j, f in enumerate(form):
        if prec is not None:
            f = f.truncate(prec)
        z = antiderivative_2pii(f).scale(c)
        terms = (z.prec - z.val) // max(z.val, 1) + 6
        wp, dwp = wp_series(curve.g2, curve.g3, terms)
        P = laurent_compose(wp, z)
        dP = laurent_compose(dwp, z)
        a1, a2, a3, a4, a6 = curve.a
        x = P - curve.b2 / 12
        y = (dP - x * a1 - a3) / 2
        if cusp_constants is not None:
            cc = cusp_constants[j]
            pt = cc.point if hasattr(cc, "point") else cc
            x, y = add_series_point(curve, x, y, pt)
        out.append((x, y))
    return out


def weierstrass_residual(curve: EllipticCurveQ, x: FracQSeries, y: FracQSeries) -> FracQSeries:
    a1, a2, a3, a4, a6 = curve.a
    return y * y + x * y * a1 + y * a3 - (x * x * x + x * x * a2 + x * a4 + a6)


# ---------------------------------------------------------------------------
# graded pieces


@dataclass
class GradedPiece:
    degree: int
    monomials: list  # exponent vectors
    expansions: list  # expansions[i][cusp]
    prec: int

    def __len__(self):
        return len(self.monomials)

    def combine(self, coeffs: Sequence) -> list:
        """Per-cusp series of sum coeffs[i] * monomial_i."""
        ncusp = len(self.expansions[0])
        out = []
        for c in range(ncusp):
            acc = None
            for e, x in zip(self.expansions, coeffs):
                if x:
                    t = e[c] * x
                    acc = t if acc is None else acc + t
            out.append(acc if acc is not None else self.expansions[0][c] * 0)
        return out

    def poly(self, coeffs: Sequence, nvars: int) -> HomogPoly:
        return HomogPoly(nvars, {e: x for e, x in zip(self.monomials, coeffs) if x}, degree=self.degree)


class MonomialCache:
    """Expansions of monomials in the ring generators, built by multiplying by one generator at a time."""

    def __init__(self, generators: Sequence[Sequence[FracQSeries]]):
        self.gens = generators
        self.n = len(generators)
        self.cache: dict = {}

    def __call__(self, e: tuple) -> list:
        hit = self.cache.get(e)
        if hit is not None:
            return hit
        if sum(e) == 1:
            out = list(self.gens[e.index(1)])
        else:
            i = next(k for k in range(self.n) if e[k])
            prev = self(tuple(x - (k == i) for k, x in enumerate(e)))
            out = [a * g for a, g in zip(prev, self.gens[i])]
        self.cache[e] = out
        return out


def expected_dimension(bundle, d: int) -> int:
    """Riemann-Roch: d deg L - g + 1 once d deg L > 2g - 2, else g (canonical, d = 1)."""
    D = d * bundle.graded_deg
    if D > 2 * bundle.genus - 2:
        return D - bundle.genus + 1
    return bundle.genus


def _prime_1_mod(N: int, start: int = 10007) -> int:
    p = start - start % N + 1
    while True:
        if p > 2 and all(p % q for q in range(2, math.isqrt(p) + 1)):
            return p
        p += N


def _root_of_unity_mod(N: int, p: int) -> int:
    for g in range(2, p):
        z = pow(g, (p - 1) // N, p)
        if all(pow(z, N // q, p) != 1 for q in range(2, N + 1) if N % q == 0 and _isprime(q)):
            return z
    raise ValueError(f"no primitive {N}th root of unity mod {p}")


def _isprime(n: int) -> bool:
    return n > 1 and all(n % q for q in range(2, math.isqrt(n) + 1))


def _reduce_coeff(c, p: int, zpow: list) -> int:
    if not isinstance(c, CyclotomicNumber):
        c = Fraction(c)
        return c.numerator * pow(c.denominator, -1, p) % p
    acc = 0
    for e, x in enumerate(c.poly.coeffs()):
        if x != 0:
            acc += int(x.p) * pow(int(x.q), -1, p) * zpow[e]
    return acc % p


def _modp_row(series: Sequence[FracQSeries], lo: int, hi: int, p: int, zpow: list) -> list[int]:
    row = []
    for s in series:
        for n in range(lo, hi):
            row.append(_reduce_coeff(s[n], p, zpow) if n >= s.val else 0)
    return row


def graded_piece(bundle, d: int, prec: Optional[int] = None, cache: Optional[MonomialCache] = None) -> GradedPiece:
    """Maximal independent set of degree-d monomials, chosen greedily by rank mod a prime p = 1 mod N.

    Independence mod p implies independence over Q(zeta_N), so the selection
    is exact; only a shortfall is ambiguous and raises.
    """
    if d < 1:
        raise ValueError("degree must be >= 1")
    prec = prec or bundle.prec
    gens = [[s.truncate(prec) for s in g] for g in bundle.ring_generators]
    cache = cache or MonomialCache(gens)
    expected = expected_dimension(bundle, d)
    N = bundle.level
    p = _prime_1_mod(N)
    z = _root_of_unity_mod(N, p) if N > 1 else 1
    zpow = [pow(z, e, p) for e in range(max(N, 1))]
    chosen, exps = [], []
    pivots: list = []
    reduced: list = []
    for e in monomials(bundle.nvars, d):
        ser = cache(e)
        row = _modp_row(ser, 0, prec, p, zpow)
        for piv, r in zip(pivots, reduced):
            if row[piv]:
                f = row[piv]
                row = [(a - f * b) % p for a, b in zip(row, r)]
        piv = next((i for i, a in enumerate(row) if a), None)
        if piv is None:
            continue
        inv = pow(row[piv], -1, p)
        reduced.append([a * inv % p for a in row])
        pivots.append(piv)
        chosen.append(ser)
        exps.append(e)
        if len(exps) == expected:
            break
    if len(exps) < expected:
        raise PrecisionError(
            f"degree-{d} piece: found {len(exps)} independent monomials, Riemann-Roch expects {expected}; raise precision"
        )
    return GradedPiece(d, exps, chosen, prec)


def piece_dimension_from_model(bundle, d: int) -> int:
    """#monomials of degree d minus dim I_d, with I_d spanned by monomial multiples of the model equations."""
    n = bundle.nvars
    mons = monomials(n, d)
    idx = {e: i for i, e in enumerate(mons)}
    rows = []
    for q in bundle.model:
        if q.degree > d:
            continue
        for m in monomials(n, d - q.degree):
            r = [0] * len(mons)
            for e, c in q.terms.items():
                r[idx[tuple(a + b for a, b in zip(e, m))]] = c
            rows.append(r)
    if not rows:
        return len(mons)
    rk = _as_fmpq_mat(rows, len(mons)).rank()
    return len(mons) - rk


# ---------------------------------------------------------------------------
# solving for (a, b, c)


@dataclass
class Certificate:
    weight: int
    threshold: Fraction
    per_triple: list = field(default_factory=list)  # per triple: list of per-cusp lower bounds
    pairwise: list = field(default_factory=list)  # ((i, j), total)
    passed: bool = False

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "threshold": str(self.threshold),
            "per_triple": self.per_triple,
            "totals": [sum(t) for t in self.per_triple],
            "pairwise": [[list(ij), tot] for ij, tot in self.pairwise],
            "passed": self.passed,
        }


@dataclass
class CertifiedMap:
    curve: EllipticCurveQ
    degree: int
    triples: list  # (A, B, C) HomogPolys over Z; the map is P -> (-A(P) : -B(P) : C(P))
    nvars: int
    translation: object = O  # image of the base point before translation
    certificate: Optional[Certificate] = None
    status: str = "uncertified"

    def image(self, P):
        """Image of a rational point of the model, as a projective triple."""
        for A, B, C in self.triples:
            t = (-A(P), -B(P), C(P))
            if any(t):
                return t
        raise MapError(f"all stored triples vanish at {P}")

    def to_json(self) -> dict:
        return {
            "curve": list(map(str, self.curve.a)),
            "degree": self.degree,
            "triples": [[p.to_json() for p in t] for t in self.triples],
            "status": self.status,
            "certificate": self.certificate.to_json() if self.certificate else None,
            "nvars": self.nvars,
            "translation": None if self.translation is O else [str(t) for t in self.translation],
        }

    @classmethod
    def from_json(cls, d: dict) -> "CertifiedMap":
        """Inverse of to_json; the certificate is dropped and the status kept as a claim."""
        curve = EllipticCurveQ(*(Fraction(a) for a in d["curve"]))
        n = d["nvars"]
        triples = [tuple(HomogPoly.from_json(n, p) for p in t) for t in d["triples"]]
        tr = d.get("translation")
        tr = O if tr is None else tuple(_maybe_fraction(t) for t in tr)
        return cls(curve, d["degree"], triples, n, tr, None, d.get("status", "uncertified"))


def _maybe_fraction(t: str):
    try:
        return Fraction(t)
    except ValueError:
        return t  # cyclotomic coordinate, kept as text


def degree_window(r: int, genus: int, deg_L: int) -> range:
    """d with floor((3r + g - 1)/deg L) <= d <= (3r + g - 1)/deg L + 1, and d >= 1."""
    num = 3 * r + genus - 1
    lo = max(1, num // deg_L)
    hi = int(Fraction(num, deg_L) + 1)
    return range(lo, max(lo, hi) + 1)


def _system(piece: GradedPiece, xy: Sequence[tuple]) -> list:
    """Rows of c x + a = 0 and c y + b = 0; unknowns (a, b, c) in piece coordinates."""
    m = len(piece)
    rows = []
    for ci, (x, y) in enumerate(xy):
        es = [e[ci] for e in piece.expansions]
        for which, s in ((0, x), (1, y)):
            prods = [e * s for e in es]
            lo = min(min(p.val for p in prods), min(e.val for e in es))
            hi = min(min(p.prec for p in prods), min(e.prec for e in es))
            zero = CyclotomicNumber.from_rational(s.level, 0)
            for n in range(lo, hi):
                row = [zero] * (3 * m)
                for i, (e, pr) in enumerate(zip(es, prods)):
                    if n >= e.val:
                        row[which * m + i] = e[n]
                    if n >= pr.val:
                        row[2 * m + i] = pr[n]
                rows.append(row)
    return rows


def _split(v: Sequence, m: int) -> tuple:
    return list(v[:m]), list(v[m : 2 * m]), list(v[2 * m :])


def find_base_image(piece: GradedPiece, xy, curve: EllipticCurveQ, Q: Sequence[int]) -> tuple:
    """First pass over Q(zeta_N): (True, image of Q), or (False, None) if all solutions vanish at Q."""
    m = len(piece)
    rows = _system(piece, xy)
    ns = nullspace(rows, 3 * m)
    log.info("degree %d: null space over Q(zeta) of dimension %d", piece.degree, len(ns))
    monvals = [math.prod(q**k for q, k in zip(Q, e)) for e in piece.monomials]
    for v in ns:
        a, b, c = (sum((x * mv for x, mv in zip(part, monvals)), CyclotomicNumber.from_rational(v[0].level, 0)) for part in _split(v, m))
        if a.is_zero() and b.is_zero() and c.is_zero():
            continue
        if c.is_zero():
            return True, O
        return True, (-a / c, -b / c)
    return False, None


def rational_triples(piece: GradedPiece, xy, nvars: int, limit: int = 5) -> list:
    m = len(piece)
    rows = _system(piece, xy)
    ns = rational_nullspace(rows, 3 * m)
    log.info("degree %d: null space over Q of dimension %d", piece.degree, len(ns))
    out = []
    for v in ns[:limit]:
        v = clear_denominators(v)
        a, b, c = _split(v, m)
        out.append((piece.poly(a, nvars), piece.poly(b, nvars), piece.poly(c, nvars)))
    return out


def map_precision(bundle, d: int, margin: int = 9) -> int:
    """Per-cusp precision that lets the valence bound certify a degree-d map."""
    k = 3 * d * bundle.gen_weight
    thr = Fraction(k, 12) * bundle.index
    return int(thr // len(bundle.cusps)) + 1 + margin


def solve_map(bundle, form, c: Fraction, curve: EllipticCurveQ, cusp_constants, r: int,
              base_point: Optional[Sequence[int]] = None, max_prec: Optional[int] = None, limit: int = 5) -> CertifiedMap:
    """Search d in the degree window for triples; base_point None means IgnoreBase."""
    window = degree_window(r, bundle.genus, bundle.graded_deg)
    stored = bundle.stored_prec
    cap = min(stored, max_prec) if max_prec else stored
    last_err = None
    for d in window:
        prec = map_precision(bundle, d)
        if prec > cap:
            raise PrecisionError(f"degree {d} needs {prec} coefficients per cusp, {cap} available; raise precmult")
        piece = graded_piece(bundle, d, prec)
        xy = xy_expansions(form, c, curve, cusp_constants, prec + 3)
        translation = O
        if base_point is not None:
            found, img = find_base_image(piece, xy, curve, base_point)
            if not found:
                last_err = f"degree {d}: every solution vanishes at the base point"
                continue
            translation = img
            if img is not O:
                minus = neg_series_point(curve, img)
                xy = [add_series_point(curve, x, y, minus) for x, y in xy]
        triples = rational_triples(piece, xy, bundle.nvars, limit)
        if triples:
            return CertifiedMap(curve, d, triples, bundle.nvars, translation)
        last_err = f"degree {d}: no rational triples"
    raise MapError(f"no map found for d in {list(window)} ({last_err}); raise precmult")


# ---------------------------------------------------------------------------
# valence certificate


def _homog_weierstrass(curve: EllipticCurveQ, X, Y, Z):
    a1, a2, a3, a4, a6 = curve.a
    return Y * Y * Z + X * Y * Z * a1 + Y * Z * Z * a3 - X * X * X - X * X * Z * a2 - X * Z * Z * a4 - Z * Z * Z * a6


def _lower_bound(s: FracQSeries) -> int:
    return s.prec if s.is_zero() else s.val


def certify_map(bundle, cmap: CertifiedMap, prec: Optional[int] = None) -> CertifiedMap:
    """Sum per-cusp vanishing orders of W(-A, -B, C) and of the pairwise minors; compare with (k/12) index."""
    d = cmap.degree
    prec = prec or map_precision(bundle, d)
    gens = [[s.truncate(prec) for s in g] for g in bundle.ring_generators]
    ncusp = len(bundle.cusps)
    k = 3 * d * bundle.gen_weight
    thr = Fraction(k, 12) * bundle.index
    cert = Certificate(k, thr)
    evals = []
    for A, B, C in cmap.triples:
        per = []
        ev = []
        for ci in range(ncusp):
            g = [gg[ci] for gg in gens]
            a, b, c = A.evaluate(g), B.evaluate(g), C.evaluate(g)
            ev.append((a, b, c))
            per.append(_lower_bound(_homog_weierstrass(cmap.curve, -a, -b, c)))
        cert.per_triple.append(per)
        evals.append(ev)
    ok = all(sum(per) > thr for per in cert.per_triple) and bool(cmap.triples)
    thr2 = Fraction(2 * d * bundle.gen_weight, 12) * bundle.index
    for i in range(len(evals)):
        for j in range(i + 1, len(evals)):
            tot = None
            for pair in ((0, 1), (0, 2), (1, 2)):
                s = 0
                for ci in range(ncusp):
                    u, v = evals[i][ci], evals[j][ci]
                    s += _lower_bound(u[pair[0]] * v[pair[1]] - u[pair[1]] * v[pair[0]])
                tot = s if tot is None else min(tot, s)
            cert.pairwise.append(((i, j), tot))
            ok = ok and tot > thr2
    cert.passed = ok
    cmap.certificate = cert
    cmap.status = "certified" if ok else "uncertified"
    if not ok:
        worst = min((sum(p) for p in cert.per_triple), default=0)
        raise MapError(
            f"valence certificate failed: total order {worst} <= {thr} (weight {k}); "
            f"need more than {thr / ncusp} per cusp or the map is wrong"
        )
    return cmap
