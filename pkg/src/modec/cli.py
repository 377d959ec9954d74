"""Command-line driver: init, candidates, find-map, rat-pts.

Each subcommand loads a bundle, runs its part of the pipeline and writes a
JSON report.  find-map chooses the candidate (form, curve) pair of least
modular degree; rat-pts pulls back every point of E'(Q) along the certified
map and takes the union.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from .bundle import CurveBundle, group_classes, candidate_factors, load_bundle, load_elliptic_table
from .elliptic import O, mordell_weil_rank0
from .hecke import PRIME_BOUND, combine_forms, isolate_eigenform, primes_up_to
from .mapbuild import CertifiedMap, MapError, certify_map, degree_window, map_precision, solve_map
from .periods import (
    LatticeError,
    cusp_constants,
    match_optimal_curve,
    modular_degree,
    recognize_lattice,
    sample_periods,
)
from .qexp import PrecisionError
from .ratpoints import (
    PointReport,
    ZeroDimError,
    check_j_counts,
    evaluate_j,
    local_solvability,
    point_search,
    pullback_scheme,
    solve_zerodim,
)

log = logging.getLogger("modec")


class PipelineError(RuntimeError):
    """A pipeline step failed; the message says which and what to change."""


def default_table() -> Path:
    return Path(str(resources.files("modec") / "data" / "curves.jsonl"))


@dataclass
class PipelineConfig:
    precmult: Fraction = Fraction(1)
    ignore_base: bool = False
    verbose: bool = False
    num_mats: int = 20
    precision_bits: int = 100
    seed: int = 0
    prime_bound: int = 400  # l search for the upper bound on |Z(Q)|
    height_bound: int = 10  # base point search
    hecke_prime_bound: int = PRIME_BOUND
    resample_rounds: int = 3

    def __post_init__(self):
        self.precmult = Fraction(self.precmult)
        if self.precmult < 1:
            raise ValueError("precmult must be at least 1")
        if self.num_mats < 1 or self.precision_bits < 53:
            raise ValueError("num_mats must be positive and precision_bits at least 53")

    def working_prec(self, bundle: CurveBundle) -> int:
        prec = math.floor(bundle.prec * self.precmult)
        if prec > bundle.stored_prec:
            raise PrecisionError(
                f"precmult {self.precmult} asks for {prec} coefficients; the bundle stores {bundle.stored_prec}"
            )
        return prec


@dataclass
class RunReport:
    label: str = ""
    status: str = "started"
    timings: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    isogeny_class: Optional[str] = None
    optimal_curve: Optional[str] = None
    manin_constant: Optional[str] = None
    degree: Optional[int] = None
    lattice: Optional[dict] = None
    cusp_constants: list = field(default_factory=list)
    base_point: Optional[list] = None
    ignore_base: bool = False
    local_solvability: dict = field(default_factory=dict)
    certificate: Optional[dict] = None
    map: Optional[dict] = None
    point_report: Optional[dict] = None
    j_values: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @contextmanager
    def timed(self, step: str):
        t = time.perf_counter()
        log.info("%s ...", step)
        try:
            yield
        finally:
            self.timings[step] = round(time.perf_counter() - t, 3)
            log.info("%s done in %.2fs", step, self.timings[step])

    def to_json(self) -> dict:
        return asdict(self)


def write_report(report: dict, path) -> None:
    """Atomic write: dump to a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(report, fh, indent=2, default=str)
        fh.write("\n")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# subcommands as functions


def cmd_init(bundle_path) -> dict:
    return load_bundle(bundle_path).summary()


def cmd_candidates(bundle: CurveBundle, table_path, pmax: int = 7) -> list:
    table = load_elliptic_table(table_path)
    return candidate_factors(bundle, table, pmax=pmax)


@dataclass
class _Candidate:
    cls: str
    records: list
    coords: list
    series: list
    match: object
    degree: int
    lattice: object


def _analytic_data(bundle, cls, records, multiplicity, config, report) -> _Candidate:
    """Eigenform, lattice, optimal curve and degree for one isogeny class."""
    prec = config.working_prec(bundle)
    curve = records[0].curve()
    with report.timed(f"{cls}: eigenform"):
        ef = isolate_eigenform(bundle, curve, multiplicity, config.hecke_prime_bound, prec=prec)
    series = combine_forms(bundle.forms, ef.coords)  # all stored coefficients
    num_mats, seed = config.num_mats, config.seed
    lat, err = None, None
    with report.timed(f"{cls}: periods"):
        for rnd in range(config.resample_rounds):
            vals = [v for _, v in sample_periods(series, bundle, num_mats, config.precision_bits, seed)]
            try:
                lat = recognize_lattice(vals, precision_bits=config.precision_bits)
                match = match_optimal_curve(lat, records, config.precision_bits)
                break
            except LatticeError as exc:
                err = exc
                log.info("round %d: %s; resampling with %d matrices", rnd, exc, 2 * num_mats)
                num_mats, seed = 2 * num_mats, seed + 1
        else:
            raise PipelineError(f"{cls}: period lattice not recognized after {config.resample_rounds} rounds: {err}")
    with report.timed(f"{cls}: degree"):
        deg = modular_degree(series, bundle.cusp_widths(), match.c, match.lattice)
    log.info("%s: optimal curve %s, c = %s, degree %d", cls, match.record.label, match.c, deg)
    return _Candidate(cls, records, ef.coords, series, match, deg, lat)


def find_base_point(bundle, config, report) -> Optional[tuple]:
    """A rational point of small height, or None.  Records local obstructions on the report."""
    with report.timed("point search"):
        pts = point_search(bundle.model, bundle.nvars, config.height_bound)
    if pts:
        return pts[0]
    with report.timed("local solvability"):
        for p in (p for p in primes_up_to(bundle.level) if bundle.level % p == 0):
            report.local_solvability[str(p)] = local_solvability(bundle, p)
    return None


def cmd_find_map(bundle: CurveBundle, classes: dict, multiplicities: dict, config: PipelineConfig,
                 report: Optional[RunReport] = None) -> tuple[Optional[CertifiedMap], RunReport]:
    """classes: isogeny-class label -> curve records.  Returns (map or None, report)."""
    report = report or RunReport(bundle.label, config=_config_json(config))
    if not classes:
        raise PipelineError("no candidate isogeny classes")
    base = None
    if config.ignore_base:
        report.ignore_base = True
    else:
        base = find_base_point(bundle, config, report)
        if base is None:
            bad = [p for p, v in report.local_solvability.items() if v == "empty"]
            if bad:
                report.status = "obstructed"
                report.notes.append(f"no points mod powers of {', '.join(bad)}; X(Q) is empty")
                report.point_report = PointReport([], complete=True).to_json()
                return None, report
            report.ignore_base = True
            report.notes.append("no rational point found and no local obstruction; proceeding without a base point")
        else:
            report.base_point = list(base)
    cands = [_analytic_data(bundle, cls, classes[cls], multiplicities.get(cls, 1), config, report) for cls in classes]
    best = min(cands, key=lambda c: c.degree)
    curve = best.match.record.curve()
    report.isogeny_class = best.cls
    report.optimal_curve = best.match.record.label
    report.manin_constant = str(best.match.c)
    report.degree = best.degree
    report.lattice = {
        "omega1": str(best.lattice.omega1),
        "omega2": str(best.lattice.omega2),
        "shape": best.lattice.shape,
    }
    with report.timed("cusp constants"):
        cc = cusp_constants(best.series, bundle, best.match.c, curve, best.match.lattice, config.precision_bits)
    report.cusp_constants = [
        {"cusp": bundle.cusps[k.cusp].point, "coords": [str(x) for x in k.coords], "order": k.order,
         "point": None if k.point is O else [str(x) for x in k.point]}
        for k in cc
    ]
    prec = config.working_prec(bundle)
    with report.timed("solve map"):
        try:
            cmap = solve_map(bundle, best.series, best.match.c, curve, cc, best.degree,
                             None if report.ignore_base else base, max_prec=prec)
        except PrecisionError as exc:
            hi = max(degree_window(best.degree, bundle.genus, bundle.graded_deg))
            need = Fraction(map_precision(bundle, hi), bundle.prec)
            raise PipelineError(f"{exc}; try --precmult {math.ceil(need)}") from exc
    with report.timed("certify"):
        try:
            certify_map(bundle, cmap, min(map_precision(bundle, cmap.degree), bundle.stored_prec))
        finally:
            report.certificate = cmap.certificate.to_json() if cmap.certificate else None
    report.map = cmap.to_json()
    report.status = "map certified"
    return cmap, report


def cmd_rat_pts(bundle: CurveBundle, cmap: CertifiedMap, config: PipelineConfig, rank: int = 0,
                report: Optional[RunReport] = None) -> tuple[PointReport, RunReport]:
    """X(Q) as the union over T in E'(Q) of the rational points of the pullback of T."""
    report = report or RunReport(bundle.label, config=_config_json(config))
    if cmap.status != "certified":
        raise PipelineError("rat-pts needs a certified map")
    with report.timed("Mordell-Weil"):
        targets = mordell_weil_rank0(cmap.curve, rank)
    total = PointReport([], complete=True)
    found = set()
    for T in targets:
        name = "O" if T is O else f"({T[0]}, {T[1]})"
        with report.timed(f"pullback {name}"):
            Z = pullback_scheme(cmap, T, bundle.model)
            try:
                rep = solve_zerodim(Z, config.prime_bound, bundle.level)
            except ZeroDimError as exc:
                total.complete = False
                total.fallback_needed = True
                total.notes.append(f"T = {name}: {exc}")
                continue
        found.update(rep.points)
        total.notes.append(
            f"T = {name}: {len(rep.points)} points, lower prime {rep.lower_prime}, "
            f"upper bound {rep.upper_bound} at l = {rep.upper_prime}"
        )
        total.notes.extend(f"T = {name}: {n}" for n in rep.notes)
        if not rep.complete:
            total.complete = False
            total.fallback_needed = True
        total.lower_prime = rep.lower_prime if total.lower_prime is None else max(total.lower_prime, rep.lower_prime)
        if rep.upper_prime is not None:
            total.upper_prime = rep.upper_prime if total.upper_prime is None else max(total.upper_prime, rep.upper_prime)
    total.points = sorted(found)
    if total.complete:
        total.upper_bound = len(total.points)
    if bundle.jmap is not None:
        with report.timed("j-invariants"):
            total.j_values = evaluate_j(bundle, total.points)
        if total.complete:
            total.notes.extend(check_j_counts(bundle, total.j_values))
    report.point_report = total.to_json()
    report.j_values = [j.to_json() for j in total.j_values]
    report.status = "success" if total.complete else "indeterminate"
    return total, report


def _config_json(config: PipelineConfig) -> dict:
    d = asdict(config)
    d["precmult"] = str(config.precmult)
    return d


# ---------------------------------------------------------------------------
# argument parsing


def _selected_classes(bundle, table, args, report) -> tuple[dict, dict]:
    by_class = group_classes(table)
    if args.cls:
        missing = [c for c in args.cls if c not in by_class]
        if missing:
            raise PipelineError(f"classes not in the table: {missing}")
        return {c: by_class[c] for c in args.cls}, {}
    with report.timed("candidates"):
        cands = candidate_factors(bundle, table, pmax=args.pmax, prec=min(bundle.prec, bundle.stored_prec))
    report.notes.append(f"candidates: {cands}")
    # the kernel bound is only an upper bound; more Hecke primes cut it to 1
    classes = {cls: by_class[cls] for cls, _ in cands if by_class[cls][0].rank == 0}
    if not classes:
        raise PipelineError(f"no rank-0 candidate classes among {cands}")
    return classes, {cls: 1 for cls in classes}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modec", description="Maps from modular curves to rank-0 elliptic curves.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, pipeline=True):
        p.add_argument("bundle", help="curve bundle (JSON)")
        p.add_argument("-o", "--out", help="write the JSON report here (default: stdout)")
        p.add_argument("--verbose", action="store_true", help="log each step")
        if not pipeline:
            return
        p.add_argument("--table", default=None, help="elliptic curve table (JSONL); default: packaged table")
        p.add_argument("--class", dest="cls", action="append", help="isogeny class to use (repeatable)")
        p.add_argument("--pmax", type=int, default=7, help="largest prime for the candidate search")
        p.add_argument("--precmult", type=Fraction, default=Fraction(1), help="multiply the working precision")
        p.add_argument("--ignore-base", action="store_true", help="skip the base point and its translation")
        p.add_argument("--num-mats", type=int, default=20, help="matrices sampled for periods")
        p.add_argument("--precision-bits", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--prime-bound", type=int, default=400, help="bound on l for the upper count")
        p.add_argument("--height-bound", type=int, default=10, help="height bound for the point search")

    common(sub.add_parser("init", help="validate a bundle and print its summary"), pipeline=False)
    p = sub.add_parser("candidates", help="isogeny classes that may occur in the Jacobian")
    common(p, pipeline=False)
    p.add_argument("--table", default=None)
    p.add_argument("--pmax", type=int, default=7)
    common(sub.add_parser("find-map", help="build and certify a map to an elliptic curve"))
    p = sub.add_parser("rat-pts", help="determine X(Q) from a certified map")
    common(p)
    p.add_argument("--map", help="find-map report to take the map from (default: run find-map)")
    return ap


def config_from_args(args) -> PipelineConfig:
    return PipelineConfig(
        precmult=args.precmult,
        ignore_base=args.ignore_base,
        verbose=args.verbose,
        num_mats=args.num_mats,
        precision_bits=args.precision_bits,
        seed=args.seed,
        prime_bound=args.prime_bound,
        height_bound=args.height_bound,
    )


def run(args) -> dict:
    if args.command == "init":
        return cmd_init(args.bundle)
    bundle = load_bundle(args.bundle)
    table_path = args.table or default_table()
    if args.command == "candidates":
        return {"label": bundle.label, "candidates": cmd_candidates(bundle, table_path, args.pmax)}
    config = config_from_args(args)
    report = RunReport(bundle.label, config=_config_json(config))
    try:
        if args.command == "rat-pts" and args.map:
            with open(args.map) as fh:
                data = json.load(fh)
            cmap = CertifiedMap.from_json(data.get("map") or data)
            with report.timed("certify"):
                certify_map(bundle, cmap, min(map_precision(bundle, cmap.degree), bundle.stored_prec))
            report.map, report.certificate = cmap.to_json(), cmap.certificate.to_json()
        else:
            classes, mults = _selected_classes(bundle, load_elliptic_table(table_path), args, report)
            cmap, report = cmd_find_map(bundle, classes, mults, config, report)
        if args.command == "rat-pts" and cmap is not None:
            cmd_rat_pts(bundle, cmap, config, report=report)
    except (PipelineError, MapError, PrecisionError, ArithmeticError) as exc:
        report.status = "failed"
        report.notes.append(f"{type(exc).__name__}: {exc}")
    return report.to_json()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(message)s",
        stream=sys.stderr,
    )
    try:
        out = run(args)
    except Exception as exc:  # bundle errors etc.: one line, nonzero exit
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.out:
        write_report(out, args.out)
    else:
        json.dump(out, sys.stdout, indent=2, default=str)
        sys.stdout.write("\n")
    return 1 if isinstance(out, dict) and out.get("status") == "failed" else 0


if __name__ == "__main__":
    sys.exit(main())
