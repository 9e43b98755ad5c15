# app/cli.py
"""
``nilgeo`` command line.

Reports go to stdout (``--json`` for the schema-versioned JSON form); diagnostics go to
stderr.  Exit codes: 0 success, 1 invalid input, 2 internal inconsistency.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .core.config import settings
from .core.exceptions import NilgeoException, exit_code_for
from .core.logging_config import setup_logging
from .models.structeq import ComplexNilmanifold, parse_manifold, print_manifold, validate
from .schemas import reports as schemas
from .services import builtins, cohomology, deform, frolicher, kuranishi, metrics
from .services.report import run_report, summary_line

logger = logging.getLogger(__name__)


def load_manifold(source: str) -> ComplexNilmanifold:
    text, name = builtins.read_source(source)
    return validate(parse_manifold(text), name=name)


def load_psi(source: Optional[str], manifold: ComplexNilmanifold, max_degree: Optional[int] = None):
    """``builtin:iwasawa`` (closed formula), a vector-form file, or the solver's ψ."""
    if source is None:
        return kuranishi.solution_for(manifold, max_degree=max_degree)
    if source == f"{builtins.BUILTIN_PREFIX}iwasawa":
        return kuranishi.nakamura_psi()
    text, _ = builtins.read_source(source)
    return kuranishi.parse_vector_form(text)


def _emit(model, as_json: bool, human: str):
    if as_json:
        print(model.model_dump_json(by_alias=True, indent=2))
    else:
        print(human)


def _table_text(rows: Sequence[Sequence[int]]) -> str:
    return "\n".join("  " + " ".join(f"{x:3d}" for x in row) for row in rows)


def _flags_text(manifold: ComplexNilmanifold) -> str:
    f = manifold.flags
    marks = [name for name, on in (("integrable", f.integrable), ("d^2=0", f.d_squared_zero),
                                   ("unimodular", f.unimodular), ("nilpotent", f.nilpotent),
                                   ("parallelisable", f.parallelisable)) if on]
    return f"valid: n={manifold.n} " + " ".join(marks)


# commands

def cmd_validate(args) -> int:
    manifold = load_manifold(args.file)
    _emit(schemas.ValidateOut.from_manifold(manifold), args.json,
          _flags_text(manifold) + "\n" + print_manifold(manifold.eqs).rstrip())
    return 0


def cmd_cohomology(args) -> int:
    manifold = load_manifold(args.file)
    theories = list(cohomology.Theory) if args.theory == "all" else [cohomology.Theory(args.theory)]
    results = [cohomology.compute(manifold, theory) for theory in theories]
    if args.json:
        payload = [schemas.CohomologyOut.from_report(r) for r in results]
        for model in payload:
            print(model.model_dump_json(by_alias=True, indent=2))
        return 0
    for report in results:
        if report.theory == cohomology.Theory.DERHAM:
            print(f"derham: b = {report.betti}")
        else:
            print(f"{report.theory.value}: h[p][q]")
            print(_table_text(report.table()))
    return 0


def cmd_frolicher(args) -> int:
    manifold = load_manifold(args.file)
    spectral = frolicher.pages(manifold, r_max=args.max_page)
    lines = []
    for r, page in enumerate(spectral.pages, start=1):
        lines.append(f"E_{r}:")
        lines.append(_table_text([[page[(p, q)] for q in range(manifold.n + 1)] for p in range(manifold.n + 1)]))
    lines.append(f"degeneration page: {spectral.degeneration_page}")
    lines.extend(f"b_{row.k} = {row.betti} {'=' if row.equal else '<'} {row.hodge_sum}" for row in spectral.equality)
    _emit(schemas.FrolicherOut.from_pages(spectral), args.json, "\n".join(lines))
    return 0


def cmd_ddbar(args) -> int:
    manifold = load_manifold(args.file)
    report = cohomology.ddbar_check(manifold)
    human = f"ddbar-lemma: {'holds' if report.overall else 'fails'}"
    if report.failures():
        human += f" (failing bidegrees: {', '.join(f'({p},{q})' for p, q in report.failures())})"
    _emit(schemas.DdbarOut.from_report(report), args.json, human)
    return 0


def cmd_metrics(args) -> int:
    manifold = load_manifold(args.file)
    which = args.which or ["all"]
    kinds = [k.value for k in metrics.IMPLICATION_ORDER] if "all" in which else which
    classification = metrics.classify(manifold, budget=args.budget, seed=args.seed, kinds=kinds)
    lines = []
    for kind, report in classification.reports.items():
        lines.append(f"{kind.value}: {report.verdict.value}")
        if report.witness is not None:
            lines.append(f"  witness: {report.witness}")
        if report.certificate is not None:
            lines.append(f"  certificate ({report.certificate.style}): {report.certificate.positive_part}")
            if report.certificate.alpha is not None:
                lines.append(f"  alpha: {report.certificate.alpha}")
    lines.extend(f"audit: {entry}" for entry in classification.audit)
    _emit(schemas.MetricsOut.from_classification(classification, name=manifold.name), args.json, "\n".join(lines))
    return 0


def cmd_kuranishi(args) -> int:
    from .services.report import kuranishi_summary

    manifold = load_manifold(args.file)
    summary = kuranishi_summary(manifold, max_degree=args.max_degree)
    lines = [f"r = {summary.r}", f"h01 = {summary.h01}",
             f"dim H01(T) = {summary.tangent_dims[0]}, dim H02(T) = {summary.tangent_dims[1]}"]
    if summary.solution is not None:
        lines.append(f"psi = {summary.solution.psi}")
        lines.append(f"degree = {summary.solution.degree}")
        if summary.solution.obstructed:
            lines.append(f"obstruction (degree {summary.solution.obstruction_degree}) = {summary.solution.obstruction}")
    if summary.note:
        lines.append(f"note: {summary.note}")
    _emit(schemas.KuranishiOut.from_summary(summary), args.json, "\n".join(lines))
    return 0


def cmd_deform(args) -> int:
    manifold = load_manifold(args.file)
    psi = load_psi(args.psi, manifold, max_degree=args.max_degree)
    structure = deform.deformed_structure(manifold, psi, deform.parse_point(args.at))
    text = print_manifold(structure.new_eqs)
    if args.emit:
        Path(args.emit).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {args.emit}")
    _emit(schemas.DeformOut.from_structure(structure), args.json, text.rstrip())
    return 0


def cmd_family(args) -> int:
    manifold = load_manifold(args.file)
    psi = load_psi(args.psi, manifold, max_degree=args.max_degree)
    points = [deform.parse_point(chunk) for chunk in args.points.split(";") if chunk.strip()]
    rows = deform.scan_family(manifold, psi, points, budget=args.budget, seed=args.seed)
    lines = []
    for row in rows:
        label = deform.format_point(row.point)
        if not row.ok:
            lines.append(f"{label}: {row.error_code} ({row.message})")
            continue
        verdicts = ", ".join(f"{k}={v}" for k, v in row.verdicts.items())
        lines.append(f"{label}: b={row.betti} ddbar={row.ddbar} page={row.degeneration_page} {verdicts}")
    _emit(schemas.FamilyOut.from_rows(rows, base=manifold.name), args.json, "\n".join(lines))
    return 0


def cmd_example(args) -> int:
    if args.list or not args.name:
        for name in builtins.available():
            print(f"{name}: {builtins.DESCRIPTIONS[name]}")
        return 0
    text = builtins.builtin(args.name)
    if args.emit:
        Path(args.emit).write_text(text, encoding="utf-8")
    print(text.rstrip())
    return 0


def cmd_report(args) -> int:
    text, name = builtins.read_source(args.file)
    report = run_report(text, name=name, budget=args.budget, seed=args.seed, max_degree=args.max_degree)
    if args.json:
        print(schemas.FullReportOut.from_report(report).model_dump_json(by_alias=True, indent=2))
        return 0
    n = report.manifold.n
    print(f"{name}: {_flags_text(report.manifold)}")
    print(f"b = {report.derham.betti}")
    print("h[p][q] Dolbeault:")
    print(_table_text(report.dolbeault.table()))
    print("h[p][q] Bott-Chern:")
    print(_table_text(report.bottchern.table()))
    print(f"Frolicher degeneration page: {report.spectral.degeneration_page} (pages computed: "
          f"{len(report.spectral.pages)}, n={n})")
    if report.kuranishi is not None and report.kuranishi.solution is not None:
        print(f"Kuranishi: r = {report.kuranishi.r}, psi = {report.kuranishi.solution.psi}")
    print(summary_line(report))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("main:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nilgeo", description="Exact geometry of complex nilmanifolds")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="stderr log level")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help_text, with_file=True):
        p = sub.add_parser(name, help=help_text)
        if with_file:
            p.add_argument("file", help="manifold file or builtin:<name>")
        p.add_argument("--json", action="store_true", help="print the JSON report")
        p.set_defaults(handler=handler)
        return p

    command("validate", cmd_validate, "check d^2 = 0, integrability and structural flags")
    p = command("cohomology", cmd_cohomology, "De Rham, Dolbeault and Bott-Chern numbers")
    p.add_argument("--theory", default="all", choices=["all"] + [t.value for t in cohomology.Theory])
    p = command("frolicher", cmd_frolicher, "Frolicher spectral sequence pages")
    p.add_argument("--max-page", dest="max_page", type=int, default=None, help="last page E_r to compute")
    command("ddbar", cmd_ddbar, "invariant ddbar-lemma check")
    for name, handler, help_text in (("metrics", cmd_metrics, "metric existence witnesses and certificates"),
                                     ("report", cmd_report, "full pipeline report")):
        p = command(name, handler, help_text)
        p.add_argument("--seed", type=int, default=settings.SEED)
        p.add_argument("--budget", type=int, default=settings.BUDGET)
        if name == "metrics":
            p.add_argument("--which", action="append", choices=[k.value for k in metrics.MetricKind] + ["all"],
                           help="metric kind to decide (repeatable, default all)")
        else:
            p.add_argument("--max-degree", type=int, default=None)
    p = command("kuranishi", cmd_kuranishi, "Kuranishi family of a complex parallelisable manifold")
    p.add_argument("--max-degree", type=int, default=None)
    p = command("deform", cmd_deform, "structure equations of a deformed complex structure")
    p.add_argument("--psi", default=None, help="vector form file or builtin:iwasawa (default: solve)")
    p.add_argument("--at", required=True, help="point, e.g. t12=1/10,t11=0")
    p.add_argument("--emit", default=None, help="write the new structure equations to this file")
    p.add_argument("--max-degree", type=int, default=None)
    p = command("family", cmd_family, "invariants along a list of deformation parameters")
    p.add_argument("--psi", default=None, help="vector form file or builtin:iwasawa (default: solve)")
    p.add_argument("--points", required=True, help="points separated by ';', e.g. 't12=1/10;t12=1/2'")
    p.add_argument("--seed", type=int, default=settings.SEED)
    p.add_argument("--budget", type=int, default=settings.BUDGET)
    p.add_argument("--max-degree", type=int, default=None)
    p = command("example", cmd_example, "print builtin manifolds", with_file=False)
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("--emit", default=None)
    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except NilgeoException as e:
        print(f"error [{e.error_code}]: {e.message}", file=sys.stderr)
        return exit_code_for(e)
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=True)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
