"""Truncated series in q^(1/w), q = exp(2 pi i z).

A ``FracQSeries`` stores coefficients a(n) of q^(n/w) for val <= n < prec.
Coefficients are either exact (``CyclotomicNumber`` of a fixed level, the
usual case) or ``mpmath.mpc``.  Exact products use Kronecker substitution:
the bivariate polynomial in (q, zeta) is packed into one flint polynomial.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import mpmath
from flint import fmpq, fmpq_poly

from .exactmath import CyclotomicNumber, cyclotomic_poly, euler_phi, galois_twist, to_fmpq, to_fraction, _zeta_power


class PrecisionError(ArithmeticError):
    """Raised when a truncated series cannot deliver the requested accuracy."""


def _is_exact(x) -> bool:
    return isinstance(x, CyclotomicNumber)


class FracQSeries:
    __slots__ = ("width", "val", "coeffs", "prec", "level")

    def __init__(self, width: int, val: int, coeffs: Sequence, prec: int, level: int | None = None):
        if width < 1:
            raise ValueError("width must be positive")
        coeffs = list(coeffs)
        if level is None:
            level = next((c.level for c in coeffs if _is_exact(c)), None)
        if level is not None:
            coeffs = [c if _is_exact(c) else CyclotomicNumber.from_rational(level, c) for c in coeffs]
        else:
            coeffs = [mpmath.mpc(c) for c in coeffs]
        coeffs = coeffs[: max(prec - val, 0)]
        # strip leading zeros so that val is the true valuation (to prec)
        k = 0
        while k < len(coeffs) and _iszero(coeffs[k]):
            k += 1
        if k == len(coeffs):
            val, coeffs = prec, []
        else:
            val, coeffs = val + k, coeffs[k:]
        while coeffs and len(coeffs) < prec - val:
            coeffs.append(_zero_like(coeffs[0]))
        self.width = width
        self.val = val
        self.coeffs = tuple(coeffs)
        self.prec = prec
        self.level = level

    # -- construction -----------------------------------------------------
    @classmethod
    def zero(cls, width: int, prec: int, level: int | None = None) -> "FracQSeries":
        return cls(width, prec, [], prec, level)

    @classmethod
    def monomial(cls, width: int, n: int, prec: int, coeff=1, level: int | None = None) -> "FracQSeries":
        if level is not None and not _is_exact(coeff):
            coeff = CyclotomicNumber.from_rational(level, coeff)
        return cls(width, n, [coeff], prec, level)

    @classmethod
    def from_dict(cls, width: int, terms: dict, prec: int, level: int) -> "FracQSeries":
        if not terms:
            return cls.zero(width, prec, level)
        v = min(terms)
        z = CyclotomicNumber.from_rational(level, 0)
        return cls(width, v, [terms.get(n, z) for n in range(v, prec)], prec, level)

    # -- basic queries ----------------------------------------------------
    @property
    def exact(self) -> bool:
        return self.level is not None

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, n: int):
        if n >= self.prec:
            raise PrecisionError(f"coefficient {n} beyond precision {self.prec}")
        if n < self.val:
            return _zero(self.level)
        return self.coeffs[n - self.val]

    def items(self):
        return ((self.val + i, c) for i, c in enumerate(self.coeffs))

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, FracQSeries):
            return NotImplemented
        if self.width != other.width:
            return NotImplemented
        p = min(self.prec, other.prec)
        a, b = self.truncate(p), other.truncate(p)
        return a.val == b.val and a.coeffs == b.coeffs

    def __hash__(self):
        return hash((self.width, self.val, self.prec))

    def __repr__(self):
        shown = ", ".join(f"{n}: {c}" for n, c in list(self.items())[:4])
        return f"FracQSeries(w={self.width}, val={self.val}, prec={self.prec}, {{{shown}{', ...' if len(self) > 4 else ''}}})"

    # -- shape changes ----------------------------------------------------
    def truncate(self, prec: int) -> "FracQSeries":
        if prec >= self.prec:
            return self
        return FracQSeries(self.width, self.val, self.coeffs, prec, self.level)

    def shift(self, k: int) -> "FracQSeries":
        """Multiply by q^(k/w)."""
        return FracQSeries(self.width, self.val + k, self.coeffs, self.prec + k, self.level)

    def rescale_width(self, new_width: int) -> "FracQSeries":
        """Same function written in q^(1/new_width)."""
        if new_width % self.width:
            raise ValueError(f"width {self.width} does not divide {new_width}")
        m = new_width // self.width
        if m == 1:
            return self
        z = _zero(self.level)
        out = []
        for i, c in enumerate(self.coeffs):
            out.append(c)
            if i + 1 < len(self.coeffs):
                out.extend([z] * (m - 1))
        return FracQSeries(new_width, self.val * m, out, self.prec * m, self.level)

    def with_level(self, level: int) -> "FracQSeries":
        if not self.exact:
            raise TypeError("numeric series has no level")
        if level == self.level:
            return self
        return FracQSeries(self.width, self.val, [c.lift(level) for c in self.coeffs], self.prec, level)

    def map_coeffs(self, fn) -> "FracQSeries":
        return FracQSeries(self.width, self.val, [fn(c) for c in self.coeffs], self.prec, self.level)

    def galois_twist(self, k: int) -> "FracQSeries":
        return self.map_coeffs(lambda c: galois_twist(c, k))

    def root_of_unity_twist(self, b: int) -> "FracQSeries":
        """Substitute q^(1/w) -> zeta_w^b q^(1/w), i.e. the slash by T^b."""
        if b % self.width == 0:
            return self
        if self.exact:
            if self.level % self.width:
                raise ValueError(f"width {self.width} does not divide level {self.level}")
            step = self.level // self.width
            return FracQSeries(
                self.width,
                self.val,
                [c * CyclotomicNumber.zeta(self.level, (step * b * n) % self.level) for n, c in self.items()],
                self.prec,
                self.level,
            )
        w = self.width
        return FracQSeries(w, self.val, [c * mpmath.expjpi(mpmath.mpf(2 * b * n) / w) for n, c in self.items()], self.prec)

    def to_numeric(self, dps: int = 30) -> "FracQSeries":
        if not self.exact:
            return self
        with mpmath.workdps(dps):
            coeffs = [mpmath.mpc(c.to_complex(dps)) for c in self.coeffs]
        return FracQSeries(self.width, self.val, coeffs, self.prec)

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "FracQSeries"):
        if self.width != other.width:
            raise ValueError(f"width mismatch: {self.width} vs {other.width}; rescale first")
        if self.level != other.level:
            raise ValueError(f"coefficient ring mismatch: {self.level} vs {other.level}")

    def __add__(self, other):
        if not isinstance(other, FracQSeries):
            return self + self._const(other)
        self._check(other)
        prec = min(self.prec, other.prec)
        if self.is_zero():
            return other.truncate(prec)
        if other.is_zero():
            return self.truncate(prec)
        v = min(self.val, other.val)
        out = [self[n] + other[n] for n in range(v, prec)] if prec > v else []
        return FracQSeries(self.width, v, out, prec, self.level)

    __radd__ = __add__

    def __neg__(self):
        return self.map_coeffs(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _const(self, c) -> "FracQSeries":
        return FracQSeries(self.width, 0, [c], self.prec, self.level)

    def scale(self, c) -> "FracQSeries":
        return self.map_coeffs(lambda x: x * c)

    def __mul__(self, other):
        if not isinstance(other, FracQSeries):
            return self.scale(other)
        self._check(other)
        v = self.val + other.val
        prec = min(self.prec + other.val, other.prec + self.val)
        if self.is_zero() or other.is_zero() or prec <= v:
            return FracQSeries.zero(self.width, prec, self.level)
        n = prec - v
        a, b = self.coeffs[:n], other.coeffs[:n]
        if self.exact:
            out = _kronecker_mul(a, b, n, self.level)
        else:
            out = _naive_mul(a, b, n)
        return FracQSeries(self.width, v, out, prec, self.level)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        if e == 0:
            return FracQSeries(self.width, 0, [1], self.prec - self.val, self.level)
        result = None
        base = self
        while e:
            if e & 1:
                result = base if result is None else result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def inverse(self) -> "FracQSeries":
        if self.is_zero():
            raise PrecisionError("division by a series that is zero to working precision")
        rel = self.prec - self.val
        a = self.coeffs
        inv0 = a[0].inverse() if self.exact else 1 / a[0]
        if self.exact:
            out = _kronecker_inverse(a, rel, self.level)
        else:
            out = [inv0]
            for k in range(1, rel):
                s = 0
                for i in range(1, min(k, len(a) - 1) + 1):
                    s += a[i] * out[k - i]
                out.append(-s * inv0)
        return FracQSeries(self.width, -self.val, out, -self.val + rel, self.level)

    def __truediv__(self, other):
        if not isinstance(other, FracQSeries):
            if self.exact and not _is_exact(other):
                other = CyclotomicNumber.from_rational(self.level, other)
            inv = other.inverse() if _is_exact(other) else 1 / mpmath.mpc(other)
            return self.scale(inv)
        return self * other.inverse()

    # -- analysis ---------------------------------------------------------
    def derivative_q(self) -> "FracQSeries":
        """(1/(2 pi i)) d/dz, i.e. the operator q d/dq: a(n) -> (n/w) a(n)."""
        w = self.width
        return FracQSeries(w, self.val, [c * Fraction(n, w) if self.exact else c * mpmath.mpf(n) / w for n, c in self.items()], self.prec, self.level)

    def antiderivative_2pii(self) -> "FracQSeries":
        return antiderivative_2pii(self)

    def order_of_vanishing_lb(self) -> Fraction:
        return order_of_vanishing_lb(self)

    def eval_at(self, z, precision_bits: int = 100, check: bool = True):
        return eval_at(self, z, precision_bits, check=check)


def _zero(level):
    return CyclotomicNumber.from_rational(level, 0) if level is not None else mpmath.mpc(0)


def _zero_like(c):
    return CyclotomicNumber.from_rational(c.level, 0) if _is_exact(c) else mpmath.mpc(0)


def _iszero(c) -> bool:
    return c.is_zero() if _is_exact(c) else c == 0


def _naive_mul(a, b, n):
    out = [mpmath.mpc(0)] * n
    for i, x in enumerate(a[:n]):
        if x == 0:
            continue
        for j, y in enumerate(b[: n - i]):
            out[i + j] += x * y
    return out


def _pack(coeffs, n, stride):
    flat = [fmpq(0)] * (n * stride)
    for i, c in enumerate(coeffs[:n]):
        for e, x in enumerate(c.poly.coeffs()):
            flat[i * stride + e] = x
    return fmpq_poly(flat)


def _unpack(poly: fmpq_poly, n, stride, level):
    phi_poly = cyclotomic_poly(level)
    co = poly.coeffs()
    out = []
    for i in range(n):
        chunk = co[i * stride : (i + 1) * stride]
        p = fmpq_poly(chunk) if chunk else fmpq_poly()
        if p.degree() >= phi_poly.degree():
            p = p % phi_poly
        out.append(CyclotomicNumber(level, _poly=p))
    return out


def _kronecker_mul(a, b, n, level):
    phi = euler_phi(level)
    stride = 2 * phi - 1
    pa, pb = _pack(a, n, stride), _pack(b, n, stride)
    prod = pa.mullow(pb, n * stride) if hasattr(pa, "mullow") else pa * pb
    return _unpack(prod, n, stride, level)


def _kronecker_inverse(a, n, level):
    """Newton iteration for 1/a to n terms."""
    inv0 = a[0].inverse()
    out = [inv0]
    k = 1
    while k < n:
        k2 = min(2 * k, n)
        # out <- out * (2 - a*out)
        t = _kronecker_mul(list(a[:k2]) + [_zero(level)] * max(0, k2 - len(a)), out + [_zero(level)] * (k2 - len(out)), k2, level)
        t = [-x for x in t]
        t[0] = t[0] + 2
        out = _kronecker_mul(out + [_zero(level)] * (k2 - len(out)), t, k2, level)
        k = k2
    return out


def series_arith(a: FracQSeries, b: FracQSeries, op: str) -> FracQSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def antiderivative_2pii(f: FracQSeries) -> FracQSeries:
    """F with dF/dz = 2 pi i f: a(n) q^(n/w) -> (w/n) a(n) q^(n/w)."""
    if f.val <= 0 and not f.is_zero():
        for n, c in f.items():
            if n > 0:
                break
            if not _iszero(c):
                raise ValueError("antiderivative needs valuation >= 1 (no constant term)")
    w = f.width
    if f.exact:
        coeffs = [c * Fraction(w, n) for n, c in f.items()]
    else:
        coeffs = [c * mpmath.mpf(w) / n for n, c in f.items()]
    return FracQSeries(w, f.val, coeffs, f.prec, f.level)


def order_of_vanishing_lb(f: FracQSeries) -> Fraction:
    if f.is_zero():
        return Fraction(f.prec, f.width)
    return Fraction(f.val, f.width)


def tail_bound(f: FracQSeries, z, extra: int = 8) -> float:
    """Heuristic bound for the omitted terms sum_{n >= prec} a(n) q^(n/w).

    Coefficient growth is estimated from the last stored coefficients
    (polynomial growth of degree 2 is allowed for).
    """
    if not f.coeffs:
        return 0.0
    r = math.exp(-2 * math.pi * float(mpmath.im(z)) / f.width)
    if r >= 1:
        return math.inf
    tail = f.coeffs[-extra:]
    m = max(abs(complex(c.to_complex(15) if f.exact else c)) for c in tail) or 1.0
    p = f.prec
    # sum_{n>=p} m (n/p)^2 r^n  <=  m r^p / (1-r)^3  (crude but safe for r near 1)
    return m * r**p / (1 - r) ** 3


def eval_at(f: FracQSeries, z, precision_bits: int = 100, check: bool = True):
    """Value of the truncated series at z in the upper half plane.

    Returns (value, tail_bound).  Raises PrecisionError when ``check`` and the
    tail bound exceeds 2^-precision_bits times max(1, |value|).
    """
    dps = max(15, int(precision_bits * 0.302) + 5)
    with mpmath.workdps(dps):
        z = mpmath.mpc(z)
        if f.is_zero():
            return mpmath.mpc(0), 0.0
        w = f.width
        qw = mpmath.exp(2j * mpmath.pi * z / w)
        if f.exact:
            coeffs = _numeric_coeffs(f, dps)
        else:
            coeffs = list(f.coeffs)
        acc = mpmath.mpc(0)
        for c in reversed(coeffs):
            acc = acc * qw + c
        val = acc * qw**f.val
        tb = tail_bound(f, z)
        if check and tb > 2.0 ** (-precision_bits) * max(1.0, float(abs(val))):
            raise PrecisionError(f"tail bound {tb:.3g} exceeds 2^-{precision_bits}; increase prec")
        return +val, tb


_numeric_cache: dict = {}


def _numeric_coeffs(f: FracQSeries, dps: int):
    key = (id(f), dps)
    hit = _numeric_cache.get(key)
    if hit is not None and hit[0] is f:
        return hit[1]
    with mpmath.workdps(dps + 5):
        zs = [mpmath.expjpi(mpmath.mpf(2 * k) / f.level) for k in range(euler_phi(f.level))]
        out = []
        for c in f.coeffs:
            acc = mpmath.mpc(0)
            for e, x in enumerate(c.poly.coeffs()):
                if x != 0:
                    acc += mpmath.mpf(int(x.p)) / int(x.q) * zs[e]
            out.append(acc)
    if len(_numeric_cache) > 4096:
        _numeric_cache.clear()
    _numeric_cache[key] = (f, out)
    return out


class LaurentZSeries:
    """Truncated Laurent series sum_{k >= start} c_k z^k, exact or numeric."""

    __slots__ = ("start", "coeffs")

    def __init__(self, start: int, coeffs: Sequence):
        self.start = start
        self.coeffs = list(coeffs)

    @property
    def stop(self) -> int:
        return self.start + len(self.coeffs)

    def __getitem__(self, k):
        i = k - self.start
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        if i < 0:
            return 0
        raise IndexError(k)

    def derivative(self) -> "LaurentZSeries":
        return LaurentZSeries(self.start - 1, [c * (self.start + i) for i, c in enumerate(self.coeffs)])

    def __call__(self, z):
        acc = 0
        for i, c in enumerate(self.coeffs):
            acc += c * z ** (self.start + i)
        return acc

    def __repr__(self):
        return f"LaurentZSeries(start={self.start}, {self.coeffs[:5]}...)"


def series_pow_rational(f: FracQSeries, alpha: Fraction) -> FracQSeries:
    """f^alpha for f = 1 + O(q^(1/w)), by the J.C.P. Miller recurrence."""
    alpha = Fraction(alpha)
    if f.val != 0 or f.coeffs[0] != 1:
        raise ValueError("series_pow_rational needs f = 1 + O(q^(1/w))")
    x = f.coeffs
    n = len(x)
    y = [f.coeffs[0]]
    for m in range(1, n):
        acc = _zero(f.level)
        for k in range(1, m + 1):
            if x[k].is_zero() if f.exact else x[k] == 0:
                continue
            acc = acc + x[k] * y[m - k] * ((alpha + 1) * k - m)
        y.append(acc * Fraction(1, m))
    return FracQSeries(f.width, 0, y, f.prec, f.level)


def compose_poly(coeffs: Sequence, x: FracQSeries) -> FracQSeries:
    """sum_k coeffs[k] x^k by Horner's rule (coeffs are scalars)."""
    acc = None
    for c in reversed(list(coeffs)):
        acc = x._const(c) if acc is None else acc * x + c
    return acc


# ---------------------------------------------------------------------------
# level-one forms as integer coefficient lists (index n <-> q^n)


def _sigma(k: int, n: int) -> int:
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


def eisenstein_coeffs(k: int, nterms: int) -> list[Fraction]:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n for k in {2, 4, 6}."""
    c = {2: -24, 4: 240, 6: -504}[k]
    return [Fraction(1)] + [Fraction(c * _sigma(k - 1, n)) for n in range(1, nterms)]


def _int_mul(a, b, n):
    from flint import fmpz_poly

    p = fmpz_poly([int(x) for x in a[:n]]) * fmpz_poly([int(x) for x in b[:n]])
    co = [int(x) for x in p.coeffs()][:n]
    return co + [0] * (n - len(co))


def eta_power_coeffs(nterms: int, power: int = 1, scale: int = 1) -> list[int]:
    """Coefficients of prod_{m>=1} (1 - q^(scale*m))^power (the eta product without q^(power*scale/24))."""
    from flint import fmpz_poly

    base = [0] * nterms
    # Euler's pentagonal theorem
    k = 0
    while True:
        done = True
        for kk in (k, -k) if k else (0,):
            e = scale * kk * (3 * kk - 1) // 2
            if e < nterms:
                base[e] = (-1) ** (kk % 2)
                done = False
        if done and k > 0:
            break
        k += 1
    p = fmpz_poly(base)
    out = fmpz_poly([1])
    e = power
    while e:
        if e & 1:
            out = (out * p)
            out = fmpz_poly([int(x) for x in out.coeffs()[:nterms]])
        e >>= 1
        if e:
            p = p * p
            p = fmpz_poly([int(x) for x in p.coeffs()[:nterms]])
    co = [int(x) for x in out.coeffs()][:nterms]
    return co + [0] * (nterms - len(co))


def delta_coeffs(nterms: int) -> list[int]:
    """Delta = q prod (1-q^n)^24; entry n is the coefficient of q^(n+1)."""
    return eta_power_coeffs(nterms, 24)


def j_coeffs(nterms: int) -> list[int]:
    """q*j(q) = E4^3 / prod(1-q^n)^24 as integers; entry n <-> q^(n-1) of j."""
    e4 = [int(x) for x in eisenstein_coeffs(4, nterms)]
    e43 = _int_mul(_int_mul(e4, e4, nterms), e4, nterms)
    d = eta_power_coeffs(nterms, 24)
    # divide by d (d[0] = 1)
    out = []
    for n in range(nterms):
        v = e43[n] - sum(d[k] * out[n - k] for k in range(1, n + 1))
        out.append(v)
    return out
