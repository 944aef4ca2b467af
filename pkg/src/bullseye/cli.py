"""Command-line entry point: run, gen, budget, profile.

Exit codes: 0 ok, 1 usage error, 2 input error (missing/bad trace, config or spec).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from pathlib import Path

from .budget import budget_report, format_budget
from .config import ConfigError, SimConfig, load_preset, preset_path, tomllib
from .hit import HIT
from .sim import Simulator
from .trace_io import SpecError, SyntheticSpec, TraceError, gen_synthetic, read_trace_file, write_trace_file

EXIT_OK, EXIT_USAGE, EXIT_INPUT = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; map that onto the usage code instead
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def load_config(path: str | None) -> SimConfig:
    if path is None:
        return load_preset()
    p = Path(path)
    if not p.exists() and preset_path(path).exists():
        p = preset_path(path)
    return SimConfig.load(p)


def load_spec(path: str | Path, seed: int | None = None) -> SyntheticSpec:
    """Read a TOML synthetic-trace spec; ``seed`` overrides the file's seed."""
    p = Path(path)
    if not p.exists() and preset_path(f"suite/{path}").exists():
        p = preset_path(f"suite/{path}")
    try:
        data = tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise SpecError(f"bad spec TOML: {exc}") from None
    spec = SyntheticSpec.from_dict(data)
    if seed is not None:
        spec.seed = seed
    spec.validate()
    return spec


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bullseye", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def common(p, trace=True):
        if trace:
            p.add_argument("--trace", required=True, help="text or binary trace file")
        p.add_argument("--config", help="TOML config (default: packaged default.toml)")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    run = sub.add_parser("run", help="simulate a trace and emit a metrics report")
    common(run)
    run.add_argument("--disable-bullseye", action="store_true", help="bare TAGE-SC-L")
    run.add_argument("--rule", choices=("iii", "iv"), help="arbitration rule override")
    run.add_argument("--decision-log", help="write a per-branch decision CSV here")
    run.add_argument("--residency-log", help="write the H2P residency event CSV here")

    gen = sub.add_parser("gen", help="synthesize a trace from a spec file")
    gen.add_argument("--spec", required=True, help="TOML spec (path or packaged suite name)")
    gen.add_argument("--seed", type=int, help="override the spec's seed")
    gen.add_argument("--out", required=True)
    gen.add_argument("--binary", action="store_true", help="write the binary trace format")

    bud = sub.add_parser("budget", help="print the storage budget table")
    common(bud, trace=False)
    bud.set_defaults(format="text")
    bud._option_string_actions["--format"].choices = ("text", "json", "csv")

    prof = sub.add_parser("profile", help="HIT-only H2P tail report (per-PC misprediction shares)")
    common(prof)
    return ap


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.disable_bullseye:
        cfg.bullseye_enabled = False
    if args.rule:
        cfg.arbiter.rule = args.rule
    cfg.validate()
    trace = read_trace_file(args.trace)
    sim = Simulator(cfg, log_decisions=bool(args.decision_log), log_residency=bool(args.residency_log))
    report = sim.run(trace)
    _emit(report.to_json() if args.format == "json" else report.to_csv(), args.out)
    if args.decision_log:
        Path(args.decision_log).write_text(sim.decisions_csv())
    if args.residency_log:
        Path(args.residency_log).write_text(sim.cache.events_csv())
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = load_spec(args.spec, args.seed)
    write_trace_file(args.out, gen_synthetic(spec), binary=args.binary)
    return EXIT_OK


def cmd_budget(args) -> int:
    report = budget_report(load_config(args.config))
    if args.format == "json":
        text = json.dumps(report, indent=2) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["component", "item", "bits", "detail"])
        for line in report["lines"]:
            w.writerow([line["component"], line["item"], line["bits"], line["detail"]])
        for comp, v in report["components"].items():
            w.writerow([comp, "TOTAL", v["bits"], f"{v['kB']} kB"])
        text = buf.getvalue()
    else:
        text = format_budget(report)
    _emit(text, args.out)
    return EXIT_OK


def profile_trace(trace, cfg: SimConfig) -> tuple[dict, HIT]:
    """Run bare TAGE-SC-L with a HIT observing every branch (no admissions)."""
    cfg = dataclasses.replace(cfg, bullseye_enabled=False)
    sim = Simulator(cfg)
    hit = HIT(cfg.hit)
    tage = sim.tage
    qualified: set[int] = set()
    for pc, taken, insts in trace:
        t = tage.predict(pc)
        if hit.observe(pc, t.pred == taken, 0):
            qualified.add(pc)
        sim.step(pc, taken, insts)
    rep = sim.report()
    total = rep.mispredictions or 1
    rows = sorted(sim.pc_mis.items(), key=lambda kv: (-kv[1], kv[0]))
    cum = 0
    table = []
    for pc, m in rows[:cfg.top_k]:
        cum += m
        table.append({"pc": f"{pc:#x}", "executions": sim.pc_exec[pc], "mispredictions": m,
                      "share": m / total, "cumulative_share": cum / total,
                      "qualified": pc in qualified})
    summary = {
        "instructions": rep.instructions,
        "branches": rep.branches,
        "mispredictions": rep.mispredictions,
        "brmispki": rep.brmispki,
        "static_branches": len(sim.pc_exec),
        "mispredicting_branches": len(sim.pc_mis),
        "qualified_h2p": len(qualified),
        "qualified_share": sum(sim.pc_mis.get(pc, 0) for pc in qualified) / total,
        "top": table,
    }
    return summary, hit


def cmd_profile(args) -> int:
    cfg = load_config(args.config)
    summary, hit = profile_trace(read_trace_file(args.trace), cfg)
    _emit(json.dumps(summary, indent=2) + "\n" if args.format == "json" else hit.dump_csv(0), args.out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "gen": cmd_gen, "budget": cmd_budget, "profile": cmd_profile}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:          # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return COMMANDS[args.cmd](args)
    except (OSError, TraceError, ConfigError, SpecError) as exc:
        print(f"bullseye {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
