"""Command-line front end: ``crnhopf <command> NETWORK [options]``.

Exit status is 0 on success, 1 when the analysis itself fails and 2 on
usage errors (bad flags, missing input).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bimolecular as bm
from . import continuation as cont
from . import dynamics as dyn
from . import focal
from . import library
from .dsl import DSLError, NetworkSource, load_network, parse_network
from .equilibria import CurveError, equilibrium_at_class, toric_equilibrium_curve, trace_on_curve, trace_roots
from .network import deficiency_one_applicable, structure_report
from .polyfield import build_vector_field
from .report import render_json, render_text

__all__ = ["AnalysisConfig", "UsageError", "main", "run", "build_parser", "resolve_network"]


class UsageError(Exception):
    """Bad command line; exit status 2."""


class AnalysisError(Exception):
    """The requested analysis failed; exit status 1."""


@dataclass(frozen=True)
class AnalysisConfig:
    command: str
    input: str | None
    tol: float
    out: Path | None
    json: bool
    gnuplot: bool
    seed: int

    def __post_init__(self):
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)
            if not self.out.is_dir():
                raise UsageError(f"--out {self.out} is not a directory")


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(Fraction(v)) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _grid(text: str) -> tuple[int, int]:
    try:
        n, m = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}") from None
    if n < 1 or m < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return n, m


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def resolve_network(name: str) -> NetworkSource:
    """Load a ``.crn`` file, or a bundled network by name (``net5_g2``)."""
    path = Path(name)
    if path.exists():
        try:
            return load_network(path)
        except OSError as exc:
            raise UsageError(f"cannot read {name}: {exc}") from exc
    name = path.name if path.suffix == ".crn" else path.name + ".crn"
    bundled = resources.files("crnhopf").joinpath("data", name)
    if bundled.is_file():
        return parse_network(bundled.read_text())
    raise UsageError(f"no such network file or bundled network: {name}")


def bundled_networks() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files("crnhopf").joinpath("data").iterdir() if p.name.endswith(".crn"))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-12, help="integration tolerance (default 1e-12)")
    common.add_argument("--out", type=Path, default=None, help="directory for written artifacts")
    common.add_argument("--json", action="store_true", help="print JSON instead of text")
    common.add_argument("--gnuplot", action="store_true", help="also write gnuplot scripts")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")

    p = argparse.ArgumentParser(prog="crnhopf", description="Oscillation analysis of mass-action reaction networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def net_cmd(name, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("network", help="a .crn file or the name of a bundled network")
        return sp

    net_cmd("analyze", "structural invariants")
    sp = net_cmd("equilibria", "toric equilibrium curve and the trace along it")
    sp.add_argument("--level", type=float, help="also report the equilibrium of this class level")
    sp = net_cmd("hopf", "Hopf points on the curve, or an L1 sign map over (a, b)")
    sp.add_argument("--scan-ab", action="store_true", help="sign map of L1 over the (a, b) family")
    sp.add_argument("--grid", type=_grid, default=(20, 20), help="scan grid NxM (default 20x20)")
    sp.add_argument("--a-range", type=_range, default=(1 / 400, 1 / 32), help="scan range for a")
    sp.add_argument("--b-range", type=_range, default=(1 / 400, 1 / 8), help="scan range for b")
    sp.add_argument("--depth", type=int, default=3, choices=(1, 2, 3), help="focal values to compute")
    sp = net_cmd("cycle", "limit cycle in one stoichiometric class")
    sp.add_argument("--level", type=float, help="class level d.x (default: the class of the curve point t=1)")
    sp.add_argument("--s0", type=float, help="seed section coordinate; default scans for cycles")
    sp = net_cmd("continue", "continue a cycle in the class level or a rate parameter")
    sp.add_argument("--param", choices=("class", "a", "b"), default="class")
    sp.add_argument("--range", type=_range, required=True, dest="p_range", help="parameter range lo:hi")
    sp.add_argument("--level", type=float, help="class level (start value for --param class)")
    sp.add_argument("--s0", type=float, help="seed section coordinate of the starting cycle")
    sp.add_argument("--max-points", type=int, default=400)
    net_cmd("classify", "bimolecular rank-two decision procedure")
    sp = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    sp.add_argument("--criteria", default=None, help="comma-separated criterion numbers (default: all)")
    sub.add_parser("list", help="list bundled networks")
    return p


def _emit(cfg: AnalysisConfig, name: str, result) -> None:
    text = render_json(result) if cfg.json else render_text(result)
    sys.stdout.write(text)
    if cfg.out is not None:
        (cfg.out / f"{name}.json").write_text(render_json(result))


def _conservation(net: NetworkSource):
    rep = structure_report(net)
    if len(rep.conservation_basis) != 1:
        return rep, None
    return rep, tuple(rep.conservation_basis[0])


def cmd_analyze(cfg, args, net):
    rep = structure_report(net)
    app = deficiency_one_applicable(net, rep)
    fld = build_vector_field(net)
    out = rep.to_json()
    out["deficiencyOneApplicable"] = {"passed": app.passed, "failed": list(app.failed)}
    out["species"] = list(net.species)
    out["vectorField"] = fld.to_strings()
    _emit(cfg, "analyze", out)


def cmd_equilibria(cfg, args, net):
    fld = build_vector_field(net)
    try:
        cur = toric_equilibrium_curve(fld)
    except CurveError as exc:
        raise AnalysisError(str(exc)) from exc
    tr = trace_on_curve(fld, cur)
    out = {"curve": cur.to_json(), "trace": tr.to_json()}
    out["traceRoots"] = [{"t": t, "multiplicity": m} for t, m in trace_roots(tr, with_multiplicity=True)] if tr else []
    if args.level is not None:
        _, d = _conservation(net)
        if d is None:
            raise AnalysisError("class levels need exactly one conservation law")
        t, x = equilibrium_at_class(cur, d, args.level)
        out["classEquilibrium"] = {"level": args.level, "t": t, "x": list(x)}
    _emit(cfg, "equilibria", out)


def cmd_hopf(cfg, args, net):
    if args.scan_ab:
        fam = library.two_parameter_family(net)
        if fam is None:
            raise AnalysisError("--scan-ab needs a network of the (a, b) parallelogram families")
        name, builder = fam
        a_mid, b_mid = (Fraction(sum(r) / 2).limit_denominator(10**9) for r in (args.a_range, args.b_range))
        f_mid = build_vector_field(builder(a_mid, b_mid))
        single = len(trace_on_curve(f_mid, toric_equilibrium_curve(f_mid)).terms) <= 1
        mode = "hopf-locus" if single else "grid"
        scan = focal.hopf_locus_sign_map if single else focal.focal_sign_map
        rows = scan(builder, args.a_range, args.b_range, args.grid)
        csv = focal.sign_map_csv(rows)
        if cfg.out is not None:
            (cfg.out / "signmap.csv").write_text(csv)
            if cfg.gnuplot:
                (cfg.out / "signmap.gp").write_text(_signmap_gnuplot("signmap.csv"))
        if cfg.json:
            sys.stdout.write(render_json({"family": name, "mode": mode, "grid": list(args.grid), "rows": [r.csv_fields() for r in rows]}))
        else:
            sys.stdout.write(csv)
        return
    fld = build_vector_field(net)
    try:
        cur = toric_equilibrium_curve(fld)
    except CurveError as exc:
        raise AnalysisError(str(exc)) from exc
    tr = trace_on_curve(fld, cur)
    roots = trace_roots(tr) if tr else []
    pts = []
    for t in roots:
        tq = Fraction(t).limit_denominator(10**6)
        t_use = tq if abs(float(tq) - t) <= 1e-14 * max(1.0, t) and tr(tq) == 0 else t
        try:
            pts.append(focal.hopf_classify(fld, cur, t_use, depth=args.depth))
        except focal.NotHopfCandidate as exc:
            pts.append({"tStar": t, "notHopf": str(exc)})
    _emit(cfg, "hopf", {"trace": tr.to_json(), "hopfPoints": pts, "normalization": focal.NORMALIZATION})


def _signmap_gnuplot(csv: str) -> str:
    return (
        "set datafile separator ','\n"
        "set xlabel 'a'\nset ylabel 'b'\n"
        "set palette defined (-1 'blue', 0 'grey', 1 'red')\n"
        f"plot '{csv}' every ::1 using 1:2:4 with points pt 5 palette title 'sign L1 at t1', \\\n"
        f"     '{csv}' every ::1 using 1:2:6 with points pt 4 palette title 'sign L1 at t2'\n"
    )


def _start_cycle(fld, d, level, s0, tol, x_ref=None):
    frame = dyn.class_frame(fld, d, level, x_ref=x_ref)
    if s0 is not None:
        return dyn.find_limit_cycle(fld, d, level, seed=s0, frame=frame, int_tol=tol)
    top = frame.s_max if np.isfinite(frame.s_max) else 2.0 * float(np.abs(frame.x_eq).max())
    cys = dyn.scan_cycles(fld, frame, np.geomspace(1e-3 * top, 0.99 * top, 40), int_tol=tol)
    if not cys:
        raise AnalysisError("no limit cycle found in the class; try --s0")
    return cys[-1]


def _default_level(fld, d) -> float:
    cur = toric_equilibrium_curve(fld)
    return float(np.dot([float(v) for v in d], cur.point_float(1.0)))


def cmd_cycle(cfg, args, net):
    fld = build_vector_field(net)
    rep, d = _conservation(net)
    if rep.rank != 2:
        raise AnalysisError(f"cycles are computed in two-dimensional classes; rank is {rep.rank}")
    x_ref = None
    level = args.level
    if d is not None and level is None:
        level = _default_level(fld, d)
    if d is None:
        x_ref = np.ones(fld.n)
    cy = _start_cycle(fld, d, level, args.s0, cfg.tol, x_ref=x_ref)
    out = cy.to_json()
    if cfg.out is not None:
        dyn.export_cycle(cy, cfg.out / "cycle.csv")
    _emit(cfg, "cycle", out)


def cmd_continue(cfg, args, net):
    fld = build_vector_field(net)
    rep, d = _conservation(net)
    if d is None:
        raise AnalysisError("continuation needs exactly one conservation law")
    lo, hi = args.p_range
    if args.param == "class":
        p0 = args.level if args.level is not None else float(np.sqrt(lo * hi))
        fam = cont.ClassLevelFamily(fld, d)
        start = _start_cycle(fld, d, p0, args.s0, cfg.tol)
    else:
        found = library.two_parameter_family(net)
        params = library.family_parameters(net)
        if found is None or params is None:
            raise AnalysisError(f"--param {args.param} needs a network of the (a, b) parallelogram families")
        _, builder = found
        a0, b0 = params
        level = args.level if args.level is not None else _default_level(fld, d)
        if args.param == "b":
            fam = cont.ParameterFamily(lambda b: builder(a0, Fraction(b).limit_denominator(10**12)), d, level, name="b")
            p0 = float(b0)
        else:
            fam = cont.ParameterFamily(lambda a: builder(Fraction(a).limit_denominator(10**12), b0), d, level, name="a")
            p0 = float(a0)
        start = _start_cycle(fld, d, level, args.s0, cfg.tol)
    if not lo <= p0 <= hi:
        raise UsageError(f"start value {p0:g} outside --range {lo:g}:{hi:g}")
    branches = []
    for direction in (-1, 1):
        try:
            branches.append(
                cont.continue_cycles(
                    fam, start, p0, (lo, hi), direction=direction, max_points=args.max_points, int_tol=cfg.tol
                )
            )
        except cont.ContinuationError as exc:
            raise AnalysisError(str(exc)) from exc
    down, up = branches
    merged = cont.CycleBranch(
        up.param_name, list(reversed(down.points)) + up.points[1:], down.folds + up.folds,
        up.hopf_endpoint if up.hopf_endpoint is not None else down.hopf_endpoint,
        f"{down.termination}/{up.termination}", fam, up.scales,
    )
    out = {
        "parameter": merged.param_name,
        "points": len(merged),
        "termination": {"decreasing": down.termination, "increasing": up.termination},
        "range": [float(merged.params.min()), float(merged.params.max())],
        "folds": [f.to_json() for f in merged.folds],
        "hopfEndpoint": merged.hopf_endpoint,
    }
    if cfg.out is not None:
        path = cont.export_branch(merged, cfg.out / "branch", gnuplot=cfg.gnuplot)
        out["files"] = sorted(str(p.relative_to(cfg.out)) for p in cfg.out.glob(path.stem + "*"))
    _emit(cfg, "continue", out)


def cmd_classify(cfg, args, net):
    v = bm.classify_rank2_bimolecular(net)
    out = v.to_json()
    if v.is_center:
        out["firstIntegrals"] = [str(h) for h in bm.center_first_integral(v)]
    _emit(cfg, "classify", out)


def cmd_verify(cfg, args):
    from . import acceptance

    nums = None
    if args.criteria:
        try:
            nums = [int(v) for v in args.criteria.split(",")]
        except ValueError:
            raise UsageError("--criteria expects comma-separated integers") from None
        if any(k not in acceptance.CRITERIA for k in nums):
            raise UsageError(f"criteria are numbered 1..{len(acceptance.CRITERIA)}")
    results = acceptance.run(nums, seed=cfg.seed, echo=None if cfg.json else print)
    summary = {str(r.number): {"passed": r.passed, "title": r.title, "detail": r.detail} for r in results}
    if cfg.json:
        sys.stdout.write(render_json(summary))
    if cfg.out is not None:
        (cfg.out / "verify.json").write_text(render_json(summary))
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "analyze": cmd_analyze,
    "equilibria": cmd_equilibria,
    "hopf": cmd_hopf,
    "cycle": cmd_cycle,
    "continue": cmd_continue,
    "classify": cmd_classify,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "list":
            print("\n".join(bundled_networks()))
            return 0
        cfg = AnalysisConfig(
            args.command, getattr(args, "network", None), args.tol, args.out, args.json, args.gnuplot, args.seed
        )
        if args.command == "verify":
            return cmd_verify(cfg, args)
        net = resolve_network(args.network)
        COMMANDS[args.command](cfg, args, net)
        return 0
    except UsageError as exc:
        print(f"crnhopf: usage error: {exc}", file=sys.stderr)
        return 2
    except DSLError as exc:
        print(f"crnhopf: {args.network}: {exc}", file=sys.stderr)
        return 1
    except (AnalysisError, CurveError, dyn.DynamicsError, cont.ContinuationError, focal.NotHopfCandidate) as exc:
        print(f"crnhopf {args.command}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
