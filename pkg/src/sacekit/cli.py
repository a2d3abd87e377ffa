"""Command line front end.

Exit codes: 0 success, 1 failed checks or lint errors, 2 usage errors,
3 unparseable artifacts.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .assembly import assemble_full_case, bindings_for
from .common import dump_json, write_text_if_changed
from .errors import ArtifactParseError, SaceError
from .fixtures import EXAMPLES, materialize_fixture
from .gsn import to_dict, to_dot
from .instantiation import instantiate, instantiate_decomposition
from .lint import has_errors, lint, render_trace_matrix, trace_matrix
from .odm import evaluate_trace, load_trace_csv
from .patterns import PatternId
from .project import OUT_DIR, load_project, project_root
from .registry import MANIFEST_NAME, STAGES, load_manifest, stage_readiness, stale_check
from .reqlang import Ontology, lint_terms, parse
from .workflow import enumerate_project, hazard_checklist, init_project, odm_violations, validate_stage

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sacekit", description="Staged safety assurance case toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("init", help="create a project in the current directory")
    s.add_argument("--name", help="system name (defaults to the directory name)")
    s.add_argument("--tiers", type=int, default=1, help="number of design tiers")
    s.add_argument("--example", choices=sorted(EXAMPLES), help="copy a bundled example project instead")

    sub.add_parser("status", help="show per-stage readiness")

    s = sub.add_parser("validate", help="mark a stage's outputs as validated")
    s.add_argument("--stage", type=int, required=True, choices=range(1, 9), metavar="N")
    s.add_argument("--tier", type=int, metavar="T")

    sub.add_parser("enumerate", help="regenerate decision tables and hazardous scenarios")

    s = sub.add_parser("requirements", help="requirement checks")
    s.add_argument("action", choices=["check"])

    s = sub.add_parser("odm", help="ODM, ROD and boundary model checks")
    s.add_argument("action", choices=["check"])

    s = sub.add_parser("boundary", help="boundary recognizer evaluation")
    s.add_argument("action", choices=["eval"])
    s.add_argument("--trace", required=True, metavar="FILE")
    s.add_argument("--recognizer", type=int, default=0, metavar="INDEX",
                   help="which recognizer in the boundary interpretation to use")

    s = sub.add_parser("instantiate", help="expand one argument pattern with project data")
    s.add_argument("--pattern", required=True, metavar="ID")
    s.add_argument("--tier", type=int, metavar="T")

    sub.add_parser("assemble", help="build the full argument into out/argument.{json,dot}")
    sub.add_parser("lint", help="cross-artifact completeness checks")

    s = sub.add_parser("export", help="print the argument or a project report")
    s.add_argument("--format", required=True, choices=["dot", "report"])

    sub.add_parser("trace-matrix", help="requirement traceability table")
    return p


def _root() -> Path:
    return project_root()


def _require_project(root: Path) -> None:
    if not (root / MANIFEST_NAME).is_file():
        raise UsageError(f"{root} has no {MANIFEST_NAME}; run 'sacekit init' first")


def cmd_init(args, out: TextIO) -> int:
    root = _root()
    if (root / MANIFEST_NAME).exists():
        raise UsageError(f"{root / MANIFEST_NAME} already exists")
    if args.example:
        if root.exists() and any(root.iterdir()):
            raise UsageError(f"{root} must be empty to copy an example")
        materialize_fixture(root, example=args.example)
        print(f"created example project {args.example} in {root}", file=out)
        return EXIT_OK
    if args.tiers < 1:
        raise UsageError("--tiers must be at least 1")
    name = args.name or root.resolve().name
    init_project(root, name, args.tiers)
    print(f"created project {name!r} with {args.tiers} tier(s) in {root}", file=out)
    return EXIT_OK


def cmd_status(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    m = load_manifest(root)
    print(f"{m.name} ({m.tiers} tier{'s' if m.tiers != 1 else ''})", file=out)
    for n, spec in sorted(STAGES.items()):
        tiers = list(m.tier_range()) if spec.tiered else [None]
        for t in tiers:
            rep = stage_readiness(m, n, t)
            label = f"stage {n}" + (f" tier {t}" if t is not None else "")
            state = "ready" if rep.ready else "missing " + ", ".join(sorted(rep.missing))
            print(f"{label:<16}{spec.name:<44}{state}", file=out)
    for f in stale_check(m):
        print(f"stale: {f}", file=out)
    return EXIT_OK


def cmd_validate(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    if STAGES[args.stage].tiered and args.tier is None:
        raise UsageError(f"stage {args.stage} is tier-indexed; pass --tier")
    res = validate_stage(root, args.stage, args.tier)
    for r in res.missing:
        print(f"missing output {r}", file=out)
    for p in res.problems:
        print(p, file=out)
    for r in res.validated:
        print(f"validated {r}", file=out)
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_enumerate(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    res = enumerate_project(root)
    n_rows = sum(len(r) for r in res.rows.values())
    print(f"{len(res.rows)} decision point(s), {n_rows} situation rows, "
          f"{len(res.scenarios)} hazardous scenario(s)", file=out)
    for s in res.scenarios:
        print(f"{s.id} [{s.severity.value}] {s.statement}", file=out)
    return EXIT_OK


def cmd_requirements(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    proj = load_project(root)
    onto = proj.ontology or Ontology(frozenset())
    failed = False
    for r in proj.all_requirements():
        try:
            req = parse(r.text, r.id)
        except SaceError as exc:
            failed = True
            print(f"{r.id}@{r.tier} syntax error: {exc}", file=out)
            continue
        print(f"{r.id}@{r.tier} {req.template.value}", file=out)
        if proj.ontology is not None:
            for w in lint_terms(req, onto):
                print(f"{r.id}@{r.tier} warning: {w}", file=out)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_odm(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    proj = load_project(root)
    found = odm_violations(proj)
    for v in found:
        print(v, file=out)
    if not found:
        print("no problems found", file=out)
    return EXIT_FAIL if found else EXIT_OK


def cmd_boundary(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    proj = load_project(root)
    if not proj.recognizers:
        raise UsageError("the boundary interpretation defines no recognizers")
    if not 0 <= args.recognizer < len(proj.recognizers):
        raise UsageError(f"--recognizer must be in 0..{len(proj.recognizers) - 1}")
    path = Path(args.trace)
    if not path.is_file() and not path.is_absolute():
        path = root / path
    trace, truth = load_trace_csv(path)
    metrics = evaluate_trace(proj.recognizers[args.recognizer], trace, truth)
    out.write(dump_json(metrics.to_dict()))
    bad = metrics.false_negatives or any(d.late for d in metrics.detections)
    return EXIT_FAIL if bad else EXIT_OK


def cmd_instantiate(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    try:
        pid = PatternId.parse(args.pattern)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    proj = load_project(root)
    if pid == PatternId.BASELINE:
        raise UsageError("the baseline argument is built by 'assemble'")
    if pid == PatternId.DECOMPOSITION:
        from .assembly import tier_specs
        arg = instantiate_decomposition(proj.name, tier_specs(proj))
        name = "decomposition"
    else:
        bindings = bindings_for(proj)
        if pid.tiered and args.tier is None:
            raise UsageError(f"{pid.value} is tier-indexed; pass --tier")
        if pid == PatternId.UU:
            keys = [k for k in bindings if k.startswith("UU#") and k.endswith(f"@{args.tier}")]
            if not keys:
                raise UsageError(f"no verified requirements at tier {args.tier}")
            key = keys[0]
        else:
            key = pid.instance_artifact.value + (f"@{args.tier}" if pid.tiered else "")
        if key not in bindings:
            raise UsageError(f"no binding for {key}")
        arg = instantiate(pid, bindings[key])
        name = key.replace("@", "-tier-").replace("#", "-")
    dest = root / OUT_DIR / "instances"
    dest.mkdir(parents=True, exist_ok=True)
    write_text_if_changed(dest / f"{name}.json", dump_json(to_dict(arg.graph)))
    write_text_if_changed(dest / f"{name}.dot", to_dot(arg.graph))
    print(f"{len(arg.graph.nodes)} nodes written to {OUT_DIR}/instances/{name}.{{json,dot}}", file=out)
    for w in arg.warnings:
        print(f"warning: {w}", file=out)
    return EXIT_OK


def _assemble(root: Path):
    proj = load_project(root)
    return proj, assemble_full_case(proj, strict=False)


def cmd_assemble(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    _, case = _assemble(root)
    dest = root / OUT_DIR
    dest.mkdir(parents=True, exist_ok=True)
    write_text_if_changed(dest / "argument.json", dump_json(to_dict(case.graph)))
    write_text_if_changed(dest / "argument.dot", to_dot(case.graph))
    print(f"{len(case.graph.nodes)} nodes, {len(case.attached)} claim points developed, "
          f"{len(case.open_acps)} open", file=out)
    for s in case.skipped:
        print(f"open: {s}", file=out)
    for w in case.warnings:
        print(f"warning: {w}", file=out)
    return EXIT_OK


def cmd_lint(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    findings = lint(load_project(root))
    for f in findings:
        print(f, file=out)
    return EXIT_FAIL if has_errors(findings) else EXIT_OK


def _report(root: Path) -> str:
    proj, case = _assemble(root)
    findings = lint(proj)
    lines = [f"# {proj.name}", "", "## Hazardous scenarios", ""]
    lines += [f"- {s.id} ({s.severity.value}): {s.statement}" for s in proj.hazardous or ()] or ["- none"]
    lines += ["", "## Hazard validation checklist", ""]
    lines += [f"- [{'x' if item.passed else ' '}] {item.check}" for item in hazard_checklist(proj)]
    lines += ["", "## Argument", "",
              f"{len(case.graph.nodes)} nodes; claim points developed: {len(case.attached)}; "
              f"open: {', '.join(case.open_acps) or 'none'}", "", "## Traceability", "", "```"]
    lines += render_trace_matrix(trace_matrix(proj)).rstrip("\n").split("\n")
    lines += ["```", "", "## Lint", ""]
    lines += [f"- {f}" for f in findings] or ["- no findings"]
    return "\n".join(lines) + "\n"


def cmd_export(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    if args.format == "dot":
        _, case = _assemble(root)
        out.write(to_dot(case.graph))
    else:
        out.write(_report(root))
    return EXIT_OK


def cmd_trace_matrix(args, out: TextIO) -> int:
    root = _root()
    _require_project(root)
    out.write(render_trace_matrix(trace_matrix(load_project(root))))
    return EXIT_OK


COMMANDS = {
    "init": cmd_init, "status": cmd_status, "validate": cmd_validate, "enumerate": cmd_enumerate,
    "requirements": cmd_requirements, "odm": cmd_odm, "boundary": cmd_boundary,
    "instantiate": cmd_instantiate, "assemble": cmd_assemble, "lint": cmd_lint,
    "export": cmd_export, "trace-matrix": cmd_trace_matrix,
}


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"sacekit: error: {exc}", file=err)
        return EXIT_USAGE
    except ArtifactParseError as exc:
        print(f"sacekit: {exc}", file=err)
        return EXIT_PARSE
    except (SaceError, FileExistsError) as exc:
        print(f"sacekit: {type(exc).__name__}: {exc}", file=err)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())
