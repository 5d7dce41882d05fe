"""Command-line entry points.

Exit codes: 0 success, 1 findings or infeasible result, 2 usage or I/O error.
Relative output paths are resolved against ``$ECUSYNTH_OUT_DIR`` when set.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .analysis import analyze_system, validate_requirements
from .config import ConfigError, parse_config
from .fidelity import fidelity_report, fidelity_to_dict
from .generator import GenerationError
from .pipeline import build_system
from .serialize import (FIDELITY_SCHEMA, SchemaError, canonical_json,
                        deserialize_system, report_to_json, seal,
                        serialize_system)

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _out_path(path):
    p = Path(path)
    base = os.environ.get("ECUSYNTH_OUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, text):
    try:
        _out_path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _load_system(path):
    try:
        return deserialize_system(_read(path))
    except SchemaError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _emit_findings(findings, stream):
    for f in findings:
        stream.write(json.dumps(dataclasses.asdict(f), sort_keys=True) + "\n")


def _batch_path(out, seed):
    if "{seed}" in out:
        return out.format(seed=seed)
    p = Path(out)
    return str(p.with_name(f"{p.stem}-{seed}{p.suffix}"))


def cmd_generate(args):
    text = _read(args.config) if args.config else ""
    try:
        config = parse_config(text)
        if args.seed is not None:
            config = config.replace(seed=args.seed)
    except ConfigError as exc:
        raise UsageError(f"config: {exc}") from None
    status = EXIT_OK
    count = args.count or 1
    for k in range(count):
        cfg = config if count == 1 else config.replace(seed=config.seed + k)
        out = args.out if count == 1 else _batch_path(args.out, cfg.seed)
        try:
            system, alloc = build_system(cfg)
        except GenerationError as exc:
            print(f"seed {cfg.seed}: generation failed: {exc}", file=sys.stderr)
            status = EXIT_FINDINGS
            continue
        _write(out, serialize_system(system))
        for entity, reason in alloc.rejections:
            print(json.dumps({"code": "allocation", "entity": entity,
                              "message": reason}, sort_keys=True))
        if not alloc.feasible:
            status = EXIT_FINDINGS
    return status


def cmd_analyze(args):
    system = _load_system(args.system)
    report = analyze_system(system, simulate=not args.no_simulation)
    _write(args.report, report_to_json(report, system))
    _emit_findings(report.findings, sys.stdout)
    return EXIT_OK if report.accepted else EXIT_FINDINGS


def cmd_validate(args):
    system = _load_system(args.system)
    findings = validate_requirements(system)
    _emit_findings(findings, sys.stdout)
    return EXIT_FINDINGS if findings else EXIT_OK


def cmd_fidelity(args):
    system = _load_system(args.system)
    report = fidelity_report(system)
    doc = seal(FIDELITY_SCHEMA, fidelity_to_dict(report), system.seed,
               system.config_digest)
    _write(args.report, canonical_json(doc))
    print(f"worst share deviation {report.worst_deviation:.2f} points, "
          f"{report.out_of_range} out-of-range values")
    return EXIT_FINDINGS if report.out_of_range else EXIT_OK


def make_parser():
    parser = argparse.ArgumentParser(prog="ecusynth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate and synthesize a system")
    g.add_argument("--config", help="configuration file (defaults when omitted)")
    g.add_argument("--out", required=True, help="system JSON output")
    g.add_argument("--seed", type=int, help="override the configured seed")
    g.add_argument("--count", type=int, help="generate COUNT consecutive seeds; "
                   "--out may contain {seed}")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="schedulability and data-age report")
    a.add_argument("--system", required=True)
    a.add_argument("--report", required=True)
    a.add_argument("--no-simulation", action="store_true",
                   help="skip trace-based age measurement")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("validate", help="check requirements, print findings")
    v.add_argument("--system", required=True)
    v.set_defaults(func=cmd_validate)

    f = sub.add_parser("fidelity", help="compare against the workload tables")
    f.add_argument("--system", required=True)
    f.add_argument("--report", required=True)
    f.set_defaults(func=cmd_fidelity)
    return parser


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "count", None) is not None and args.count < 1:
        print("ecusynth: --count must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ecusynth: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
