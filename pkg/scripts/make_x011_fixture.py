"""Build the X0(11) bundle from eta products and Eisenstein series.

The single cusp form is f = eta(t)^2 eta(11t)^2.  X0(11) has genus 1, so the
model is built from weight-4 forms (deg L = 4 >= 2g + 1):
E4(t), E4(11t), f^2 and f (E2(t) - 11 E2(11t)).  Their quadratic relations
cut out the curve in P^3.

Cusps are infinity (width 1) and 0 = S(infinity) (width 11).  Under
f |_2 S = -(1/11) eta(t)^2 eta(t/11)^2, E4(11t) |_4 S = 11^-4 E4(t/11) and
E2*(t) |_2 S = E2(t) - (1/11) E2(t/11); expansions at 0 are in Q = q^{1/11}.
"""

from __future__ import annotations

import argparse
from fractions import Fraction as F
from pathlib import Path

from modec.bundle import CurveBundle, Cusp, save_bundle
from modec.exactmath import HomogPoly, monomials, rational_nullspace
from modec.qexp import FracQSeries, eisenstein_coeffs, eta_power_coeffs

N = 11


def series(width, coeffs, prec):
    return FracQSeries(width, 0, coeffs[:prec], prec, N)


def spread(coeffs, step, n):
    """sum c_k q^{step k}, truncated to n terms."""
    out = [F(0)] * n
    for k, c in enumerate(coeffs):
        if k * step >= n:
            break
        out[k * step] = F(c)
    return out


def build(prec: int):
    n = prec + 2
    e4 = eisenstein_coeffs(4, n)
    e2 = eisenstein_coeffs(2, n)
    eta2 = eta_power_coeffs(n, 2)
    # cusp infinity, width 1
    f_inf = series(1, [F(0)] + [F(c) for c in _mul(eta2, spread(eta_power_coeffs(n, 2), 11, n), n)][: n - 1], prec)
    e4_inf = series(1, e4, prec)
    e4_11_inf = series(1, spread(e4, 11, n), prec)
    e2s_inf = series(1, [a - 11 * b for a, b in zip(e2, spread(e2, 11, n))], prec)
    # cusp 0, width 11, Q = q^{1/11}
    f_0 = series(11, [F(0)] + [F(-c, 11) for c in _mul(spread(eta2, 11, n), eta2, n)][: n - 1], prec)
    e4_0 = series(11, spread(e4, 11, n), prec)
    e4_11_0 = series(11, [c / 11**4 for c in e4], prec)
    e2s_0 = series(11, [a - b / 11 for a, b in zip(spread(e2, 11, n), e2)], prec)
    gens = [
        [e4_inf, e4_0],
        [e4_11_inf, e4_11_0],
        [f_inf * f_inf, f_0 * f_0],
        [f_inf * e2s_inf, f_0 * e2s_0],
    ]
    forms = [[f_inf, f_0]]
    return forms, gens


def _mul(a, b, n):
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j in range(n - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def quadrics(gens):
    mons = monomials(4, 2)
    rows = []
    for c in range(2):
        sers = []
        for e in mons:
            s = None
            for i, k in enumerate(e):
                for _ in range(k):
                    s = gens[i][c] if s is None else s * gens[i][c]
            sers.append(s)
        prec = min(s.prec for s in sers)
        for m in range(prec):
            rows.append([s[m] if m >= s.val else 0 for s in sers])
    ns = rational_nullspace(rows, len(mons))
    return [HomogPoly(4, {e: x for e, x in zip(mons, v) if x}).primitive() for v in ns]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/modec/data/11.12.1.a.1.json"))
    ap.add_argument("--prec", type=int, default=200)
    args = ap.parse_args(argv)
    forms, gens = build(args.prec)
    model = quadrics(gens)
    assert len(model) == 2, len(model)
    b = CurveBundle(
        label="X0(11)",
        level=N,
        index=12,
        genus=1,
        graded_deg=4,
        model=model,
        nvars=4,
        cusps=[Cusp((1, 0, 0, 1), 1, True), Cusp((0, -1, 1, 0), 11, True)],
        forms=forms,
        prec=args.prec,
        # Gamma_0(11) mod 11 acting on the stored expansions: c = 0
        group_generators=[(1, 1, 0, 1), (2, 0, 0, 6), (2, 0, 0, 1)],
        generators=gens,
        gen_weight=4,
        rational_cusp_count=2,
        variables=["x", "y", "z", "w"],
        notes="built by scripts/make_x011_fixture.py",
    )
    b.validate()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_bundle(b, args.out)
    print("wrote", args.out, [str(q) for q in model])


if __name__ == "__main__":
    main()
