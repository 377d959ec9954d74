"""Build the bundle for the genus-6 curve 36.108.6.g.1 from scratch.

Construction, in order:

1. X_G is a component of the fibre product of two genus-0 covers of the
   j-line: t with j = 4 t^3 (8 - t) (width 4) and Elkies' level-9 function s.
   Both are expanded exactly in Q(zeta_36).
2. Monodromy of the 4 x 27 sheets under S and T is read off numerically and
   the resulting subgroup of SL2(Z/36) is conjugated onto G^T.
3. Weight-2 cusp forms are found as rational combinations of G * q dF/dq
   with G, F rational functions in t, s whose only poles are at cusps;
   the q^{<=0} parts are killed at every cusp.
4. The basis is matched to the LMFDB canonical model by comparing
   osculating flags at the three rational points.
5. A j-map j = A/B with A, B of degree 12 is solved for and certified by a
   valence bound.

Stages are cached in --cache; rerunning resumes.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import pickle
import time
from fractions import Fraction as F
from pathlib import Path

import mpmath
import numpy as np
from flint import fmpq, fmpq_mat

from modec.bundle import CurveBundle, Cusp, save_bundle
from modec.exactmath import (
    CyclotomicNumber as C,
    HomogPoly,
    _as_fmpq_mat,
    euler_phi,
    monomials,
    nullspace,
    parse_poly,
    rational_nullspace,
)
from modec.qexp import FracQSeries, compose_poly, eval_at, j_coeffs, series_pow_rational

log = logging.getLogger("fixture36")

L = 36
PHI = euler_phi(L)
NAMES = ["x", "y", "z", "w", "t", "u"]
# canonical model of 36.108.6.g.1 (LMFDB)
QUADRICS = [
    "x^2 - 2*x*y + x*z - 2*x*t + x*u + y^2 - 2*y*z - y*w + 2*y*t - 2*y*u - z^2 - z*w - z*t + t^2 - t*u",
    "5*x^2 + x*y - x*z - x*w + 2*x*u - 3*y^2 - y*z - y*w - y*u + z^2 - 2*z*w + z*t + z*u + w^2 - w*u + t^2 - t*u - u^2",
    "2*x^2 + x*y + 7*x*z + 2*x*u + y^2 + 2*y*z - y*t - z^2 + z*w + 4*z*t + w*u - 2*t^2 + t*u + 2*u^2",
    "-2*x^2 - x*y - x*z - x*w + x*t - 4*x*u + 2*y^2 + 4*y*z - 2*y*w + y*t + 4*z^2 - 3*z*w - 2*z*t + w*t - w*u + t^2 + t*u - 2*u^2",
    "2*x^2 + 3*x*y - x*z - 3*x*w + 2*x*t - 2*y^2 - 2*y*z - y*w + 2*y*t - 4*y*u - 3*z^2 + z*w - 2*z*u + w^2 - 2*w*t + 2*w*u + 2*t^2 - 4*t*u + u^2",
    "-4*x*y - 7*x*z + 5*x*w - x*t + x*u + 2*y*z - 2*y*w + y*t - 4*z^2 + 2*z*w + 2*z*t + 2*z*u + w^2 - 2*w*t + 2*w*u + t^2 - t*u",
]
KNOWN_POINTS = [(0, 1, -1, -2, 0, 1), (1, 2, -2, 7, 3, 4), (2, 1, -1, 2, 6, 5)]
# the same points in (t, s); order matches KNOWN_POINTS
TS_POINTS = [(8, F(1)), (2195, F(-3, 2)), (8, F(-1))]
GT_GENERATORS = [(8, 25, 17, 12), (12, 5, 23, 15), (14, 25, 15, 5)]
CUSP_MATRICES = [(1, 0, 0, 1), (5, 4, 36, 29), (7, 6, 36, 31)]
CONJUGATOR = (0, 1, 35, 16)
GALOIS_S = [1, 29, 13]  # zeta -> zeta^d moves between the three cusp values of s

# polynomials in s (ascending coefficients)
P_C = [-1, -3, 0, 1]  # s^3 - 3s - 1
P_S2 = [-1, 0, 1]
P_SX0 = [16, 12, -3, 1, 6, 3, 1]
P_CU0 = [-5, -3, 3, 2]
P_SX1 = [-23, -18, 12, 4, 0, 6, 1]
P_SX2 = [28, 18, -33, -26, 18, 24, 7]


def poly_series(coeffs, x):
    return compose_poly([C.from_rational(x.level, F(v)) for v in coeffs], x)


def pmul(*ps):
    out = [F(1)]
    for p in ps:
        r = [F(0)] * (len(out) + len(p) - 1)
        for i, a in enumerate(out):
            for j, b in enumerate(p):
                r[i + j] += a * b
        out = r
    return out


def ppow(p, k):
    return pmul(*([p] * k)) if k else [F(1)]


# ---------------------------------------------------------------------------
# stage 1: t and s


def t_expansion(nterms: int) -> FracQSeries:
    """t with 4 t^3 (8 - t) = j, as a series in q^{1/4}."""
    jq = j_coeffs(nterms // 4 + 2)
    qj = FracQSeries(4, 0, [jq[n // 4] if n % 4 == 0 else 0 for n in range(nterms)], nterms, L)
    i4 = C.zeta(L, 9)
    one = FracQSeries(4, 0, [1], nterms, L)
    g = one
    for _ in range(nterms + 2):
        tinv = g.inverse().shift(1) * (1 - i4)
        new = series_pow_rational(qj * series_pow_rational(one - tinv * 8, F(-1)), F(1, 4))
        if new == g:
            break
        g = new
    return g.shift(-1) * ((1 + i4) * F(1, 2))


def s_expansion(nterms: int) -> FracQSeries:
    """Elkies' level-9 hauptmodul s at the cusp s = -(zeta_9 + zeta_9^-1), in q^{1/9}."""
    z = C.zeta(L)
    th = -(z**4 + z**32)
    v = FracQSeries(1, 1, [1], nterms + 1, L)
    n9 = poly_series([x * 3**7 for x in pmul(ppow(P_S2, 3), ppow(P_SX0, 3), P_CU0)], v + th)
    base = v * v + v * (3 * th) + (3 * th * th - 3)
    psi = (base**9) / n9
    psi0 = psi.coeffs[0]
    A = 1 / psi0
    x = _ninth_root(A)
    phi = series_pow_rational(psi * (1 / psi0), F(-1, 9))
    # Lagrange inversion of v = W phi(v)
    lag = [C.from_rational(L, 0)]
    pw = phi
    for n in range(1, nterms + 1):
        lag.append(pw[n - 1] * F(1, n))
        pw = (pw * phi).truncate(nterms + 1)
    jq = j_coeffs(nterms // 9 + 2)
    qj = FracQSeries(9, 0, [jq[n // 9] if n % 9 == 0 else 0 for n in range(nterms)], nterms, L)
    W = (series_pow_rational(qj, F(-1, 9)) * x).shift(1)
    return compose_poly(lag, W) + th


def _ninth_root(A: C) -> C:
    mpmath.mp.dps = 60
    r = mpmath.root(A.to_complex(60), 9)
    zs = [mpmath.expjpi(mpmath.mpf(2 * k) / 9) for k in range(6)]
    w = mpmath.sqrt(2)
    vec = [mpmath.re(r) + w * mpmath.im(r)] + [mpmath.re(q) + w * mpmath.im(q) for q in zs]
    rel = mpmath.pslq(vec, maxcoeff=10**8, maxsteps=10**6)
    z = C.zeta(L)
    x = sum((z ** (4 * k) * F(-rel[k + 1], rel[0]) for k in range(6)), C.from_rational(L, 0))
    assert x**9 == A, "ninth root recognition failed"
    return x


def check_ts(t: FracQSeries, s: FracQSeries) -> None:
    lhs = (t**3) * (8 - t) * 4
    jq = j_coeffs(lhs.prec // 4 + 3)
    for n in range(lhs.val, min(lhs.prec, 40)):
        want = jq[n // 4 + 1] if n % 4 == 0 else 0
        assert lhs[n] == want, f"t fails at {n}"
    n9 = poly_series([x * 3**7 for x in pmul(ppow(P_S2, 3), ppow(P_SX0, 3), P_CU0)], s.truncate(60))
    j9 = n9 / (poly_series(P_C, s.truncate(60)) ** 9)
    jq = j_coeffs(12)
    for n in range(j9.val, min(j9.prec, 60)):
        want = jq[n // 9 + 1] if n % 9 == 0 else 0
        assert j9[n] == want, f"s fails at {n}"


# ---------------------------------------------------------------------------
# stage 2: monodromy and cusps


def mul36(a, b, N=L):
    return (
        (a[0] * b[0] + a[1] * b[2]) % N,
        (a[0] * b[1] + a[1] * b[3]) % N,
        (a[2] * b[0] + a[3] * b[2]) % N,
        (a[2] * b[1] + a[3] * b[3]) % N,
    )


def gen_group(gs, N=L):
    I = (1, 0, 0, 1)
    S, fr = {I}, [I]
    while fr:
        nf = []
        for x in fr:
            for g in gs:
                y = mul36(x, g, N)
                if y not in S:
                    S.add(y)
                    nf.append(y)
        fr = nf
    return S


def branches(T0, S0):
    tb = [T0.root_of_unity_twist(a) for a in range(4)]
    sb = []
    for d in GALOIS_S:
        base = S0.galois_twist(d)
        sb.extend(base.root_of_unity_twist(b) for b in range(9))
    return tb, sb


def sheet_permutations(T0, S0):
    tb, sb = branches(T0.truncate(40), S0.truncate(80))
    th = S0.coeffs[0]
    ub = [(s - th).inverse() for s in sb]
    mpmath.mp.dps = 30
    tau0 = mpmath.mpc("0.1", "1.0")

    def perm(fs, z1, z0):
        v1 = [eval_at(f, z1, 100, check=False)[0] for f in fs]
        v0 = [eval_at(f, z0, 100, check=False)[0] for f in fs]
        out = []
        for a in v1:
            d = [abs(a - b) for b in v0]
            i = min(range(len(d)), key=d.__getitem__)
            srt = sorted(d)
            assert srt[0] < 1e-6 * max(1, abs(a)) and srt[1] > 1e-3, "ambiguous sheet match"
            out.append(i)
        return out

    Sz = -1 / tau0
    return perm(tb, Sz, tau0), perm(tb, tau0 + 1, tau0), perm(ub, Sz, tau0), perm(ub, tau0 + 1, tau0)


def monodromy(perms):
    """Map SL2(Z/36) -> sheets via right action; returns dict g -> sheet of identity sheet moved by g."""
    pt_S, pt_T, ps_S, ps_T = perms
    S, T, I = (0, L - 1, 1, 0), (1, 1, 0, 1), (1, 0, 0, 1)
    val = {I: (0, 0)}
    fr = [I]
    while fr:
        nf = []
        for x in fr:
            for name, g in (("S", S), ("T", T)):
                y = mul36(x, g)
                a, b = val[x]
                v = (pt_S[a], ps_S[b]) if name == "S" else (pt_T[a], ps_T[b])
                if y in val:
                    assert val[y] == v, "monodromy is not a group action"
                else:
                    val[y] = v
                    nf.append(y)
        fr = nf
    return val


def check_group(val):
    det = lambda a: (a[0] * a[3] - a[1] * a[2]) % L
    gt = {g for g in gen_group(GT_GENERATORS) if det(g) == 1}
    gam = [g for g, v in val.items() if v == (0, 0)]
    c = CONJUGATOR
    cd = pow(det(c), -1, L)
    ci = ((c[3] * cd) % L, (-c[1] * cd) % L, (-c[2] * cd) % L, (c[0] * cd) % L)
    conj = {mul36(mul36(ci, g), c) for g in gam}
    assert len(val) == 31104 and len(gam) == 288
    assert conj == gt, "stabiliser is not conjugate to G^T"


def cusp_sheets(val):
    c = CONJUGATOR
    seen = set()
    sheets = []
    for al in CUSP_MATRICES:
        al36 = tuple(x % L for x in al)
        orbit = {val[mul36(mul36(c, al36), (1, b, 0, 1))] for b in range(L)}
        assert len(orbit) == 36 and not (orbit & seen)
        seen |= orbit
        sheets.append(val[mul36(c, al36)])
    assert len(seen) == 108
    return sheets


def sheet_ts(T0, S0, sh):
    a, b = sh
    k, r = divmod(b, 9)
    t = T0.root_of_unity_twist(a).rescale_width(L)
    s = S0.galois_twist(GALOIS_S[k]).root_of_unity_twist(r).rescale_width(L)
    return t, s


# ---------------------------------------------------------------------------
# stage 3: cusp forms


def ring_functions(t, s):
    c = poly_series(P_C, s)
    ci = c.inverse()
    r = t * c**3 / (poly_series(P_S2, s) * poly_series(P_SX0, s))
    rho1 = r * (8 - t) * ci
    r2 = (t - 6) * c**5 / (poly_series(P_SX1, s) * poly_series(P_SX2, s))
    rho2 = r2 * (t * t + t * 4 + 12) * ci
    return {"t": t, "s": s, "ci": ci, "rho1": rho1, "rho2": rho2}


POLE_BOUND = 20


def ansatz_keys():
    out = []
    for a in range(4):
        for j in range(8):
            for i in [0] if j == 0 else [0, 1, 2]:
                for e1 in (0, 1, 2):
                    for e2 in (0, 1):
                        if 9 * a + 4 * j + 10 * e1 + 11 * e2 <= POLE_BOUND:
                            out.append((a, j, i, e1, e2))
    return out


FKEYS = ["t", "c", "sc", "s2c", "r1", "r2"]


def ansatz_terms(fn, keys, one):
    t, s, ci, r1, r2 = fn["t"], fn["s"], fn["ci"], fn["rho1"], fn["rho2"]
    Fs = {"t": t, "c": ci, "sc": s * ci, "s2c": s * s * ci, "r1": r1, "r2": r2}
    DF = {k: v.derivative_q() for k, v in Fs.items()}
    pw = {}

    def power(name, base, e):
        if (name, e) not in pw:
            pw[(name, e)] = one if e == 0 else power(name, base, e - 1) * base
        return pw[(name, e)]

    terms = {}
    for gk in sorted({k[0] for k in keys}):
        a, j, i, e1, e2 = gk
        G = None
        for name, base, e in (("t", t, a), ("ci", ci, j), ("s", s, i), ("r1", r1, e1), ("r2", r2, e2)):
            if e:
                f = power(name, base, e)
                G = f if G is None else G * f
        for fk in FKEYS:
            if (gk, fk) in keys:
                terms[(gk, fk)] = DF[fk] if G is None else G * DF[fk]
    return terms


def combine(terms_list, vectors, keys, lo, hi):
    """Rows of flattened coefficients n in [lo, hi) of sum_k v_k term_k, via one matrix product."""
    cols = []
    for k in keys:
        tm = terms_list[k]
        col = []
        for n in range(lo, hi):
            col.extend(tm[n].coeffs if n >= tm.val else [F(0)] * PHI)
        cols.append(col)
    T = _as_fmpq_mat(cols)
    V = _as_fmpq_mat(vectors, len(keys))
    return V * T


def mat_to_series(row_mat, r, lo, hi, prec):
    coeffs = []
    for idx, n in enumerate(range(lo, hi)):
        v = [F(int(row_mat[r, idx * PHI + e].p), int(row_mat[r, idx * PHI + e].q)) for e in range(PHI)]
        coeffs.append(C(L, v))
    return FracQSeries(L, lo, coeffs, prec, L)


def solve_forms(per_cusp, keys):
    rows = []
    for terms in per_cusp:
        lo = min(terms[k].val for k in keys)
        for n in range(lo, 1):
            rows.append([terms[k][n] for k in keys])
    ns = rational_nullspace(rows, len(keys))
    log.info("ansatz: %d unknowns, nullspace %d", len(keys), len(ns))
    order = sorted(range(len(ns)), key=lambda i: sum(1 for x in ns[i] if x))
    chosen, mat = [], []
    for i in order:
        r = []
        for terms in per_cusp:
            m = combine(terms, [ns[i]], keys, 1, 30)
            r.extend(m[0, e] for e in range(m.ncols()))
        if _as_fmpq_mat(mat + [r]).rank() > len(mat):
            mat.append(r)
            chosen.append(ns[i])
        if len(chosen) == 6:
            break
    assert len(chosen) == 6
    return chosen


# ---------------------------------------------------------------------------
# stage 4: basis matching by osculating flags

K_FLAG = 9


def _rs(coeffs, val=0, prec=K_FLAG + 6):
    return FracQSeries(1, val, coeffs, prec, 1)


def local_forms(t0, s0, keys, chosen, prec=K_FLAG + 14):
    pi = _rs([1], 1, prec)
    s = pi + F(s0)
    J = poly_series([x * 3**7 for x in pmul(ppow(P_S2, 3), ppow(P_SX0, 3), P_CU0)], s) / (poly_series(P_C, s) ** 9)
    d0 = 12 * F(t0) ** 2 * (8 - F(t0)) - 4 * F(t0) ** 3
    t = _rs([F(t0)], 0, prec)
    for _ in range(prec + 2):
        t = t - ((t**3) * (8 - t) * 4 - J) * (1 / d0)
    fn = ring_functions(t, s)
    fn = {k: v for k, v in fn.items()}
    terms = ansatz_terms(fn, set(keys), _rs([1], 0, prec))
    out = []
    for v in chosen:
        acc = None
        for k, x in zip(keys, v):
            if x:
                tm = terms[k] * x
                acc = tm if acc is None else acc + tm
        # q d/dq -> d/dpi: divide by pi
        out.append(acc.shift(-1))
    return out


def local_model(Q, p, prec=K_FLAG + 6):
    i0 = next(i for i in range(6) if p[i] != 0)
    p = [F(x) / p[i0] for x in p]
    free = [i for i in range(6) if i != i0]
    tan = nullspace([[q.diff(i)(p) for i in free] for q in Q], 5)[0]
    k = free[next(j for j in range(5) if tan[j] != 0)]
    others = [i for i in free if i != k]
    sub = [[q.diff(i)(p) for i in others] for q in Q]
    for eqs in itertools.combinations(range(6), 4):
        m = _as_fmpq_mat([sub[e] for e in eqs])
        if m.rank() == 4:
            break
    Minv = m.inv()
    pi = _rs([1], 1, prec)
    X = {i0: _rs([1], 0, prec), k: pi + p[k]}
    for i in others:
        X[i] = _rs([p[i]], 0, prec)
    for _ in range(prec + 2):
        vals = [Q[e]([X[i] for i in range(6)]) for e in eqs]
        for r, i in enumerate(others):
            corr = None
            for c in range(4):
                mv = Minv[r, c]
                tm = vals[c] * F(int(mv.p), int(mv.q))
                corr = tm if corr is None else corr + tm
            X[i] = X[i] - corr
    for q in Q:
        assert q([X[i] for i in range(6)]).truncate(prec - 1).is_zero()
    return [X[i] for i in range(6)]


def _fr(x):
    return x.to_rational() if hasattr(x, "to_rational") else F(x)


def flag(series):
    v = min(s.val for s in series)
    vecs = [[_fr(s[v + n]) for s in series] for n in range(6)]
    return [vecs[: n + 1] for n in range(6)]


def intersect(A, B):
    cols = A + [[-x for x in b] for b in B]
    M = [[cols[c][r] for c in range(len(cols))] for r in range(6)]
    ns = nullspace(M, len(cols))
    return [[sum(v[i] * A[i][r] for i in range(len(A))) for r in range(6)] for v in ns]


def match_basis(myfl, pfl):
    """M with M * (my local forms) spanning the published flags at all three points."""
    A = [intersect(myfl[0][k], myfl[1][5 - k]) for k in range(6)]
    B = [intersect(pfl[0][k], pfl[1][5 - k]) for k in range(6)]
    assert all(len(x) == 1 for x in A + B)
    A = [x[0] for x in A]
    B = [x[0] for x in B]
    Am = _as_fmpq_mat([[A[k][r] for k in range(6)] for r in range(6)])
    Bm = _as_fmpq_mat([[B[k][r] for k in range(6)] for r in range(6)])
    a = Am.solve(_as_fmpq_mat([[x] for x in myfl[2][0][0]]))
    b = Bm.solve(_as_fmpq_mat([[x] for x in pfl[2][0][0]]))
    D = fmpq_mat(6, 6, [b[i, 0] / a[i, 0] if i == j else 0 for i in range(6) for j in range(6)])
    M = Bm * D * Am.inv()
    return [[F(int(M[r, c].p), int(M[r, c].q)) for c in range(6)] for r in range(6)]


# ---------------------------------------------------------------------------
# stage 5: j-map


def jmap_solve(forms, prec, degree=12):
    """A, B in degree `degree` with B vanishing to order >= 36 + degree at every cusp and A = j B."""
    ncusp = len(forms[0])
    jq = j_coeffs(prec // L + 3)
    jser = FracQSeries(L, -L, [jq[(n + L) // L] if n % L == 0 else 0 for n in range(-L, prec)], prec, L)
    # greedy monomial basis of R_degree, rank tested mod a prime p = 1 mod 36
    p = 7057
    zeta_p = next(
        z for z in (pow(g, (p - 1) // L, p) for g in range(2, p)) if pow(z, L // 2, p) != 1 and pow(z, L // 3, p) != 1
    )
    ncol = 60
    target = 10 * degree - 5

    def redp(s):
        row = np.zeros(ncol, dtype=np.int64)
        for n in range(max(s.val, 0), ncol):
            acc = 0
            for e, x in enumerate(s[n].coeffs):
                if x:
                    acc += x.numerator * pow(x.denominator, -1, p) * pow(zeta_p, e, p)
            row[n] = acc % p
        return row

    base_p = [[redp(f[c]) for c in range(ncusp)] for f in forms]

    def convp(a, b):
        return np.convolve(a, b)[:ncol] % p

    mp_cache = {}

    def mono_p(e):
        if e not in mp_cache:
            if sum(e) == 0:
                one = np.zeros(ncol, dtype=np.int64)
                one[0] = 1
                mp_cache[e] = [one] * ncusp
            else:
                i = next(k for k in range(6) if e[k])
                prev = mono_p(tuple(x - (k == i) for k, x in enumerate(e)))
                mp_cache[e] = [convp(a, base_p[i][c]) for c, a in enumerate(prev)]
        return mp_cache[e]

    basis, reduced, pivots = [], [], []
    for e in monomials(6, degree):
        row = np.concatenate(mono_p(e))
        for piv, r in zip(pivots, reduced):
            if row[piv]:
                row = (row - row[piv] * r) % p
        nz = np.flatnonzero(row)
        if not len(nz):
            continue
        piv = int(nz[0])
        row = row * pow(int(row[piv]), -1, p) % p
        basis.append(e)
        reduced.append(row)
        pivots.append(piv)
        if len(basis) == target:
            break
    assert len(basis) == target, "could not span R_d"
    log.info("jmap: monomial basis of size %d", len(basis))
    cache = {}

    def mono(e):
        if e not in cache:
            if sum(e) == 0:
                cache[e] = [FracQSeries(L, 0, [1], prec + 40, L) for _ in range(ncusp)]
            else:
                i = next(k for k in range(6) if e[k])
                prev = mono(tuple(x - (k == i) for k, x in enumerate(e)))
                cache[e] = [a * forms[i][c] for c, a in enumerate(prev)]
        return cache[e]

    sers = [mono(e) for e in basis]
    # B: order >= L + degree at each cusp, so that j B stays in R_degree
    rows = []
    for c in range(ncusp):
        for n in range(1, L + degree):
            rows.append([s[c][n] for s in sers])
    Bspace = rational_nullspace(rows, len(basis))
    log.info("jmap: denominator space of dim %d", len(Bspace))
    Q = [parse_poly(q, NAMES) for q in QUADRICS]
    best = None
    for combo in itertools.product(range(-2, 3), repeat=len(Bspace)):
        if not any(combo):
            continue
        vec = [sum(cf * v[i] for cf, v in zip(combo, Bspace)) for i in range(len(basis))]
        Bp = HomogPoly(6, {e: x for e, x in zip(basis, vec) if x})
        if all(Bp(pt) != 0 for pt in KNOWN_POINTS):
            best = vec
            break
    assert best is not None
    Bp = HomogPoly(6, {e: x for e, x in zip(basis, best) if x})
    jB = []
    for c in range(ncusp):
        acc = None
        for s, x in zip(sers, best):
            if x:
                tm = s[c] * x
                acc = tm if acc is None else acc + tm
        jB.append(jser * acc)
    # A in the same basis: match coefficients 1..prec-L at every cusp
    rows, rhs = [], []
    for c in range(ncusp):
        for n in range(1, prec - L):
            rows.append([s[c][n] for s in sers])
            rhs.append(jB[c][n])
    rows_aug = [r + [-x] for r, x in zip(rows, rhs)]
    sol = rational_nullspace(rows_aug, len(basis) + 1)
    assert len(sol) == 1 and sol[0][-1] != 0
    avec = [x / sol[0][-1] for x in sol[0][:-1]]
    Ap = HomogPoly(6, {e: x for e, x in zip(basis, avec) if x})
    # valence: A - jB has weight 24; zero if order > 2 * index total
    order = 0
    for c in range(ncusp):
        diff = Ap.evaluate([f[c] for f in forms]) - jB[c]
        assert diff.is_zero(), "A - jB has a nonzero coefficient"
        order += diff.prec
    assert order > 2 * 108, f"valence bound not reached ({order})"
    return Ap, Bp


# ---------------------------------------------------------------------------


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/modec/data/36.108.6.g.1.json"))
    ap.add_argument("--cache", default="/tmp/fixture36")
    ap.add_argument("--prec", type=int, default=136, help="declared bundle precision")
    ap.add_argument("--stored-prec", type=int, default=544, help="coefficients stored per cusp")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(asctime)s %(message)s")
    cache = Path(args.cache)
    cache.mkdir(parents=True, exist_ok=True)

    def stage(name, fn):
        path = cache / f"{name}.pkl"
        if path.exists():
            with open(path, "rb") as fh:
                return pickle.load(fh)
        t0 = time.time()
        res = fn()
        with open(path, "wb") as fh:
            pickle.dump(res, fh)
        log.info("stage %s: %.1fs", name, time.time() - t0)
        return res

    P = args.stored_prec
    nt = (P + 80) // 9 + 2
    ns = (P + 140) // 4 + 2
    T0, S0 = stage(f"ts_{P}", lambda: (t_expansion(nt), s_expansion(ns)))
    check_ts(T0, S0)
    perms = stage("perms", lambda: sheet_permutations(T0, S0))
    val = monodromy(perms)
    check_group(val)
    sheets = cusp_sheets(val)
    keys_all = ansatz_keys()
    keys = [(g, f) for g in keys_all for f in FKEYS]

    def low():
        per = []
        for sh in sheets:
            t, s = sheet_ts(T0, S0, sh)
            fn = ring_functions(t.truncate(110), s.truncate(170))
            per.append(ansatz_terms(fn, set(keys), FracQSeries(L, 0, [1], 200, L)))
        return solve_forms(per, keys)

    chosen = stage("chosen", low)
    Q = [parse_poly(q, NAMES) for q in QUADRICS]
    for p in KNOWN_POINTS:
        assert all(q(p) == 0 for q in Q)

    def flags():
        my = [flag(local_forms(t0, s0, keys, chosen)) for t0, s0 in TS_POINTS]
        pp = [flag(local_model(Q, p)) for p in KNOWN_POINTS]
        return match_basis(my, pp)

    M = stage("M", flags)
    final = [[sum(54 * M[r][c] * chosen[c][k] for c in range(6)) for k in range(len(keys))] for r in range(6)]
    used = [i for i in range(len(keys)) if any(v[i] for v in final)]
    ukeys = [keys[i] for i in used]
    final = [[v[i] for i in used] for v in final]

    def high():
        out = [[] for _ in range(6)]
        for sh in sheets:
            t, s = sheet_ts(T0, S0, sh)
            fn = ring_functions(t, s)
            terms = ansatz_terms(fn, set(ukeys), FracQSeries(L, 0, [1], 10**6, L))
            prec = min(terms[k].prec for k in ukeys)
            assert prec >= P, f"precision {prec} < {P}"
            m = combine(terms, final, ukeys, 1, P)
            for r in range(6):
                lo = min(terms[k].val for k in ukeys)
                assert all(combine(terms, [final[r]], ukeys, lo, 1)[0, e] == 0 for e in range((1 - lo) * PHI))
                out[r].append(mat_to_series(m, r, 1, P, P))
            log.info("cusp %s done", sh)
        return out

    forms = stage(f"forms_{P}", high)
    for c in range(3):
        for q in Q:
            assert q([f[c] for f in forms]).is_zero(), "model does not vanish"
    jA, jB = stage("jmap", lambda: jmap_solve([[s.truncate(200) for s in f] for f in forms], 200))
    jvals = [jA(p) / jB(p) for p in KNOWN_POINTS]
    assert jvals == [0, F(-(2**2) * 3**7 * 5**3 * 439**3), 0], jvals

    b = CurveBundle(
        label="36.108.6.g.1",
        level=L,
        index=108,
        genus=6,
        graded_deg=10,
        model=Q,
        nvars=6,
        cusps=[Cusp(m, 36, False) for m in CUSP_MATRICES],
        forms=forms,
        prec=args.prec,
        group_generators=GT_GENERATORS,
        jmap=(jA, jB),
        rational_cusp_count=0,
        cm_point_counts={"-3": 2},
        variables=NAMES,
        notes="built by scripts/make_level36_fixture.py",
    )
    b.validate(check_model=True)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_bundle(b, args.out)
    print("wrote", args.out)


if __name__ == "__main__":
    main()
