"""Curve bundles: serialized modular curves and elliptic-curve tables.

A bundle carries everything the pipeline consumes about X_G: the model, the
cusps (representative matrices and widths), q-expansions of a basis of
weight-2 cusp forms at every cusp, and optionally a j-map.  Rationals are
written as "num/den" strings so files are radix-exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .exactmath import CyclotomicNumber, HomogPoly, euler_phi, variable_names
from .qexp import FracQSeries


class BundleError(ValueError):
    """Malformed bundle or violated bundle invariant."""


def frac_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(s)


@dataclass(frozen=True)
class Cusp:
    matrix: tuple  # (a, b, c, d) in SL2(Z); the cusp is a/c
    width: int
    rational: bool = False

    @property
    def point(self) -> str:
        a, _, c, _ = self.matrix
        if c == 0:
            return "oo"
        g = math.gcd(a, c)
        a, c = a // g, c // g
        if c < 0:
            a, c = -a, -c
        return f"{a}/{c}"


@dataclass
class CurveBundle:
    label: str
    level: int
    index: int
    genus: int
    graded_deg: int
    model: list  # HomogPoly
    nvars: int
    cusps: list  # Cusp
    forms: list  # forms[i][j]: FracQSeries of basis form i at cusp j
    prec: int
    group_generators: list = field(default_factory=list)  # generators of G^T in GL2(Z/N), as (a,b,c,d)
    generators: Optional[list] = None  # degree-1 ring generators if not the forms themselves
    gen_weight: int = 2
    jmap: Optional[tuple] = None  # (numerator, denominator) HomogPoly
    rational_cusp_count: Optional[int] = None
    cm_point_counts: Optional[dict] = None
    variables: Optional[list] = None
    notes: str = ""

    # -- derived ----------------------------------------------------------
    @property
    def coeff_level(self) -> int:
        return self.level

    @property
    def ring_generators(self) -> list:
        return self.generators if self.generators is not None else self.forms

    @property
    def stored_prec(self) -> int:
        """Largest precision available at every cusp for every stored series."""
        series = [s for f in self.forms for s in f]
        if self.generators is not None:
            series += [s for f in self.generators for s in f]
        return min(s.prec for s in series)

    def cusp_widths(self) -> list[int]:
        return [c.width for c in self.cusps]

    def forms_at(self, prec: int) -> list:
        """Form expansions truncated to ``prec`` (in units of 1/width at each cusp)."""
        if prec > self.stored_prec:
            raise BundleError(f"requested prec {prec} exceeds stored prec {self.stored_prec}")
        return [[s.truncate(prec) for s in f] for f in self.forms]

    def generators_at(self, prec: int) -> list:
        return [[s.truncate(prec) for s in f] for f in self.ring_generators]

    def summary(self) -> dict:
        return {
            "label": self.label,
            "level": self.level,
            "index": self.index,
            "genus": self.genus,
            "cusps": [c.point for c in self.cusps],
            "widths": self.cusp_widths(),
            "prec": self.prec,
            "stored_prec": self.stored_prec,
            "model_equations": len(self.model),
            "variables": self.variables or variable_names(self.nvars),
            "has_jmap": self.jmap is not None,
        }

    # -- validation -------------------------------------------------------
    def validate(self, check_model: bool = True, check_prec: Optional[int] = None) -> None:
        """Raise BundleError on the first violated invariant."""
        if self.level < 1 or self.index < 1:
            raise BundleError("level and index must be positive")
        if self.genus > 0 and not self.forms:
            raise BundleError("bundle has positive genus but no forms")
        if len(self.forms) != self.genus:
            raise BundleError(f"expected {self.genus} forms, found {len(self.forms)}")
        if not self.cusps:
            raise BundleError("bundle has no cusps")
        for c in self.cusps:
            a, b, cc, d = c.matrix
            if a * d - b * cc != 1:
                raise BundleError(f"cusp matrix {c.matrix} does not have determinant 1")
            if c.width < 1:
                raise BundleError(f"cusp width {c.width} must be positive")
        for label, family in (("form", self.forms), ("generator", self.generators or [])):
            for i, f in enumerate(family):
                if len(f) != len(self.cusps):
                    raise BundleError(f"{label} {i} has {len(f)} expansions for {len(self.cusps)} cusps")
                for j, (s, c) in enumerate(zip(f, self.cusps)):
                    if s.width != c.width:
                        raise BundleError(f"{label} {i} at cusp {j}: width {s.width} != cusp width {c.width}")
                    if s.level != self.level and s.level is not None:
                        raise BundleError(f"{label} {i} at cusp {j}: coefficient level {s.level} != {self.level}")
                    if s.prec < self.prec:
                        raise BundleError(f"{label} {i} at cusp {j}: stored prec {s.prec} < declared prec {self.prec}")
        for f in self.forms:
            for j, s in enumerate(f):
                if not s.is_zero() and s.val < 1:
                    raise BundleError(f"form has a nonzero coefficient at exponent {s.val}/{s.width} <= 0 at cusp {j}; not a cusp form")
        ngen = len(self.ring_generators)
        if ngen != self.nvars:
            raise BundleError(f"model has {self.nvars} variables but {ngen} degree-1 generators")
        for p in self.model:
            if p.nvars != self.nvars:
                raise BundleError("model polynomial has the wrong number of variables")
        if self.cusps and sum(c.width for c in self.cusps) != self.index:
            # every cusp of a bundle is listed once, so the widths sum to the index
            # (index counted in PSL2 when -I lies in the group)
            raise BundleError(f"cusp widths sum to {sum(c.width for c in self.cusps)}, index is {self.index}")
        if check_model:
            self.check_model(check_prec)

    def check_model(self, prec: Optional[int] = None) -> None:
        """Exact check that every model polynomial kills the generator expansions."""
        prec = self.prec if prec is None else prec
        gens = self.generators_at(prec)
        for j in range(len(self.cusps)):
            point = [g[j] for g in gens]
            for k, poly in enumerate(self.model):
                val = poly.evaluate(point)
                if not val.is_zero():
                    raise BundleError(
                        f"model polynomial {k} does not vanish on the expansions at cusp {j}: "
                        f"first nonzero term at exponent {val.val}/{val.width}"
                    )


# ---------------------------------------------------------------------------
# serialization


def series_to_json(s: FracQSeries) -> dict:
    phi = euler_phi(s.level)
    return {
        "width": s.width,
        "valuation": s.val,
        "prec": s.prec,
        "coeffs": [[frac_str(x) for x in c.coeffs] if not c.is_zero() else [] for c in s.coeffs] if phi else [],
    }


def series_from_json(d: dict, level: int) -> FracQSeries:
    phi = euler_phi(level)
    coeffs = []
    for v in d["coeffs"]:
        if len(v) not in (0, phi):
            raise BundleError(f"coefficient vector of length {len(v)}, expected {phi}")
        coeffs.append(CyclotomicNumber(level, [parse_frac(x) for x in v]))
    prec = d.get("prec", d["valuation"] + len(coeffs))
    return FracQSeries(int(d["width"]), int(d["valuation"]), coeffs, int(prec), level)


def poly_to_json(p: HomogPoly) -> list:
    return p.to_json()


def poly_from_json(data, nvars: int) -> HomogPoly:
    try:
        return HomogPoly.from_json(nvars, data)
    except (TypeError, ValueError) as exc:
        raise BundleError(f"bad polynomial: {exc}") from exc


def bundle_to_json(b: CurveBundle) -> dict:
    out = {
        "label": b.label,
        "level": b.level,
        "index": b.index,
        "genus": b.genus,
        "graded_deg": b.graded_deg,
        "nvars": b.nvars,
        "variables": b.variables or variable_names(b.nvars),
        "model": [poly_to_json(p) for p in b.model],
        "cusps": [{"matrix": list(c.matrix), "width": c.width, "rational": c.rational} for c in b.cusps],
        "prec": b.prec,
        "group_generators": [list(g) for g in b.group_generators],
        "gen_weight": b.gen_weight,
        "forms": [[series_to_json(s) for s in f] for f in b.forms],
    }
    if b.generators is not None:
        out["generators"] = [[series_to_json(s) for s in f] for f in b.generators]
    if b.jmap is not None:
        out["jmap"] = [poly_to_json(b.jmap[0]), poly_to_json(b.jmap[1])]
    if b.rational_cusp_count is not None:
        out["rational_cusp_count"] = b.rational_cusp_count
    if b.cm_point_counts is not None:
        out["cm_point_counts"] = b.cm_point_counts
    if b.notes:
        out["notes"] = b.notes
    return out


def bundle_from_json(d: dict) -> CurveBundle:
    try:
        level = int(d["level"])
        nvars = int(d["nvars"]) if "nvars" in d else len(d["model"][0][0][0])
        forms = [[series_from_json(s, level) for s in f] for f in d["forms"]]
        gens = None
        if "generators" in d:
            gens = [[series_from_json(s, level) for s in f] for f in d["generators"]]
        jmap = None
        if d.get("jmap"):
            jmap = (poly_from_json(d["jmap"][0], nvars), poly_from_json(d["jmap"][1], nvars))
        b = CurveBundle(
            label=d.get("label", ""),
            level=level,
            index=int(d["index"]),
            genus=int(d["genus"]),
            graded_deg=int(d["graded_deg"]),
            model=[poly_from_json(p, nvars) for p in d["model"]],
            nvars=nvars,
            cusps=[Cusp(tuple(int(x) for x in c["matrix"]), int(c["width"]), bool(c.get("rational", False))) for c in d["cusps"]],
            forms=forms,
            prec=int(d["prec"]),
            group_generators=[tuple(int(x) for x in g) for g in d.get("group_generators", [])],
            generators=gens,
            gen_weight=int(d.get("gen_weight", 2)),
            jmap=jmap,
            rational_cusp_count=d.get("rational_cusp_count"),
            cm_point_counts=d.get("cm_point_counts"),
            variables=d.get("variables"),
            notes=d.get("notes", ""),
        )
    except KeyError as exc:
        raise BundleError(f"missing key {exc}") from exc
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, BundleError):
            raise
        raise BundleError(f"malformed bundle: {exc}") from exc
    return b


def save_bundle(b: CurveBundle, path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(bundle_to_json(b), fh, separators=(",", ":"))
    tmp.replace(path)


def load_bundle(path, validate: bool = True, check_model: bool = True) -> CurveBundle:
    path = Path(path)
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise BundleError(f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    b = bundle_from_json(data)
    if validate:
        b.validate(check_model=check_model)
    return b


# ---------------------------------------------------------------------------
# elliptic curve tables


@dataclass(frozen=True)
class EllCurveRecord:
    label: str
    ainvs: tuple  # (a1, a2, a3, a4, a6) as Fractions
    conductor: int
    rank: int
    isogeny_class: str

    def __post_init__(self):
        from .elliptic import EllipticCurveQ

        if EllipticCurveQ(*self.ainvs).discriminant == 0:
            raise BundleError(f"{self.label}: singular curve")

    def curve(self):
        from .elliptic import EllipticCurveQ

        return EllipticCurveQ(*self.ainvs, label=self.label)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "ainvs": [frac_str(a) for a in self.ainvs],
            "conductor": self.conductor,
            "rank": self.rank,
            "isogeny_class": self.isogeny_class,
        }

    @classmethod
    def from_json(cls, d: dict) -> "EllCurveRecord":
        return cls(
            label=d["label"],
            ainvs=tuple(parse_frac(a) for a in d["ainvs"]),
            conductor=int(d["conductor"]),
            rank=int(d["rank"]),
            isogeny_class=d.get("isogeny_class", d["label"].rstrip("0123456789")),
        )


def load_elliptic_table(path) -> list[EllCurveRecord]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                out.append(EllCurveRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise BundleError(f"{path}:{lineno}: {exc}") from exc
    return out


def group_classes(table: list[EllCurveRecord]) -> dict:
    classes: dict = {}
    for r in table:
        classes.setdefault(r.isogeny_class, []).append(r)
    return classes


def candidate_factors(bundle: CurveBundle, table: list[EllCurveRecord], pmax: int = 7, prec: Optional[int] = None) -> list:
    """Isogeny classes that may occur in J(X_G), with Hecke-kernel multiplicity bounds.

    Only classes whose conductor divides N^2 are considered.  For each, the
    bound is dim of the intersection over primes p <= pmax, p not dividing N,
    of ker(T(p) - a_p(E)) on the span of the bundle's forms.
    """
    from .elliptic import ap
    from .hecke import hecke_kernel

    if bundle.genus == 0 or not bundle.forms:
        return []
    n2 = bundle.level**2
    primes = [p for p in range(2, pmax + 1) if all(p % q for q in range(2, int(p**0.5) + 1)) and bundle.level % p]
    out = []
    for cls_label, recs in group_classes(table).items():
        rec = recs[0]
        if n2 % rec.conductor:
            continue
        E = rec.curve()
        targets = {p: ap(E, p) for p in primes}
        dim = len(hecke_kernel(bundle, targets, prec=prec))
        if dim > 0:
            out.append((cls_label, dim))
    return out
