"""Command line interface: ``walkbounds {validate,run,report}``.

Exit status is 0 on success.  ``run`` exits 1 when an inequality row is
violated or a stage errors; invalid configs exit 2.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, bundled_configs, diagnostics, load_document, parse_config
from .pipeline import render_markdown, run

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2


def _resolve(path: str) -> Path:
    """A config path, or the name of a bundled config."""
    p = Path(path)
    if p.exists():
        return p
    bundled = bundled_configs()
    if path in bundled:
        return Path(str(bundled[path]))
    raise FileNotFoundError(f"no config file {path!r} and no bundled config of that name "
                            f"(bundled: {', '.join(bundled)})")


def _load(path: str):
    try:
        return load_document(_resolve(path)), None
    except (OSError, ValueError) as exc:
        return None, [f"config: {exc}"]


def _overrides(doc: dict, args) -> dict:
    doc = dict(doc)
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.stages:
        doc["stages"] = [s.strip() for s in args.stages.split(",") if s.strip()]
    if args.budget_mem is not None:
        doc["budgets"] = {**doc.get("budgets", {}), "memory_bytes": args.budget_mem}
    return doc


def cmd_validate(args) -> int:
    doc, errs = _load(args.config)
    if doc is not None:
        errs = [str(e) for e in diagnostics(_overrides(doc, args))]
    for e in errs:
        print(f"error: {e}", file=sys.stderr)
    if errs:
        return EXIT_INVALID
    print(f"{args.config}: valid")
    return EXIT_OK


def cmd_run(args) -> int:
    doc, errs = _load(args.config)
    if doc is None:
        print(f"error: {errs[0]}", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = parse_config(_overrides(doc, args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    bundle = run(cfg)
    out = bundle.write(args.out)
    st = bundle.report["status"]
    for name, stage in bundle.report["stages"].items():
        if isinstance(stage, dict) and "error" in stage:
            print(f"stage {name} failed: {stage['error']}", file=sys.stderr)
    for row in st["violated"]:
        print(f"violated: {row}", file=sys.stderr)
    for row in st["cross_check_disagreements"]:
        print(f"warning: estimates-only cross-check disagrees on {row}", file=sys.stderr)
    print(f"wrote {out} (exit {st['exit_code']})")
    return st["exit_code"]


def cmd_report(args) -> int:
    src = Path(args.out) / "report.json"
    try:
        report = json.loads(src.read_text())
    except (OSError, ValueError) as exc:
        print(f"error: cannot read {src}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    md = render_markdown(report)
    (Path(args.out) / "bounds.md").write_text(md)
    if not args.quiet:
        sys.stdout.write(md)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="walkbounds", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="config file (YAML or JSON) or bundled config name")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--stages", help="comma-separated stage list overriding the config")
        sp.add_argument("--budget-mem", type=float, help="memory budget in bytes")

    v = sub.add_parser("validate", help="check a config without running it")
    common(v)
    v.set_defaults(func=cmd_validate)
    r = sub.add_parser("run", help="run the enabled stages and write the report bundle")
    common(r)
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=cmd_run)
    rep = sub.add_parser("report", help="re-render bounds.md from a saved bundle")
    rep.add_argument("--out", required=True, help="bundle directory containing report.json")
    rep.add_argument("--quiet", action="store_true", help="do not print the table")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
