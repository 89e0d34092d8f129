"""Command line entry point: construct / verify / entropy / mobius / correlate.

Exit status: 0 all checks pass, 1 computation error, 2 invalid configuration,
3 at least one check failed (the report is still written).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import complexity, construct, metrics, mobius
from .report import TOOL_VERSION, CheckResult, all_passed, emit_report, parse_rational
from .seq import CylinderSpec, SequenceError, format_seqw, parse_source_spec

log = logging.getLogger("toeplitz_reduce")

EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG, EXIT_CHECKS = 0, 1, 2, 3
SELF_CHECK_LIMIT = 10 ** 4


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    k: int = 2
    source: str | None = None
    epsilon: Fraction | None = None
    stages: int = 2
    window: int | None = None
    l_overrides: dict[int, int] = field(default_factory=dict)
    epsilon_overrides: dict[int, Fraction] = field(default_factory=dict)
    seed: int | None = None
    out: str | None = None
    options: dict = field(default_factory=dict)

    def echo(self) -> dict:
        return {
            "command": self.command, "k": self.k, "source": self.source, "epsilon": self.epsilon,
            "stages": self.stages, "window": self.window,
            "override_l": {str(m): v for m, v in sorted(self.l_overrides.items())},
            "override_epsilon": {str(m): v for m, v in sorted(self.epsilon_overrides.items())},
            "seed": self.seed, "out": self.out, "options": dict(sorted(self.options.items())),
        }


def _parse_override(text: str, value_type):
    m, sep, v = text.partition("=")
    if not sep:
        raise ConfigError(f"override must look like M=value, got {text!r}")
    try:
        return int(m), value_type(v)
    except ValueError as exc:
        raise ConfigError(f"bad override {text!r}: {exc}") from None


def _parse_recoding(text: str | None) -> dict[int, Fraction]:
    if not text:
        return {}
    out = {}
    for part in text.split(","):
        s, sep, v = part.partition("=")
        if not sep:
            raise ConfigError(f"recoding entries look like symbol=value, got {part!r}")
        try:
            out[int(s)] = parse_rational(v)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return out


def _add_common(p: argparse.ArgumentParser, construction: bool = True) -> None:
    p.add_argument("--k", type=int, default=2, help="alphabet size (symbols 1..k)")
    p.add_argument("--source", help="periodic:1,2,2 | constant:1 | bernoulli:seed=42 | file:path")
    p.add_argument("--seed", type=int, help="seed used when --source is a bare 'bernoulli'")
    p.add_argument("--window", type=int, help="checks run on indices [-N, N]")
    p.add_argument("--out", help="JSON report path")
    if construction:
        p.add_argument("--epsilon", help="target closeness as a rational, e.g. 3/10")
        p.add_argument("--stages", type=int, default=2)
        p.add_argument("--override-l", action="append", default=[], metavar="M=VALUE")
        p.add_argument("--override-epsilon", action="append", default=[], metavar="M=P/Q")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toeplitz-reduce", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build the Toeplitz approximation and check stage properties")
    _add_common(p)
    p.add_argument("--trace-out", help="write the construction trace JSON here")
    p.add_argument("--seqw-out", help="write b on [-window, window] as a SEQW file")
    p.add_argument("--provenance-radius", type=int, help="store provenance on [-R, R]")

    p = sub.add_parser("verify", help="construct, then run every exact check")
    _add_common(p)
    p.add_argument("--chain-window", type=int, help="window for the complexity chain (default 3*l_max)")

    p = sub.add_parser("entropy", help="windowed block counts and entropy estimate")
    _add_common(p, construction=False)
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--csv-out")

    p = sub.add_parser("mobius", help="sieve mu, Mertens checkpoints, factorization self-check")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--table-out", help="one mu value per line")

    p = sub.add_parser("correlate", help="normalized sums of mu(n) * f(xi_n)")
    _add_common(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--toeplitz", action="store_true", help="correlate against the constructed b instead of the source")
    p.add_argument("--self", dest="self_corr", action="store_true", help="correlate mu with itself")
    p.add_argument("--recode", help="symbol=value pairs, e.g. 1=1,2=-1")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cmd = args.command
    cfg = ExperimentConfig(command=cmd, out=args.out)
    if cmd == "mobius":
        if args.N < 1:
            raise ConfigError("--N must be >= 1")
        cfg.options = {"N": args.N, "table_out": args.table_out}
        return cfg

    cfg.k, cfg.source, cfg.seed, cfg.window = args.k, args.source, args.seed, args.window
    if cfg.k < 2 or cfg.k > 255:
        raise ConfigError("--k must lie in 2..255")
    if cmd == "correlate" and args.self_corr:
        cfg.options = {"N": args.N, "self": True}
        if args.N < 1:
            raise ConfigError("--N must be >= 1")
        return cfg
    if not cfg.source:
        raise ConfigError("--source is required")

    if cmd == "entropy":
        if cfg.window is None:
            raise ConfigError("--window is required")
        cfg.options = {"nmax": args.nmax, "csv_out": args.csv_out}
        if not 1 <= args.nmax <= 2 * cfg.window + 1:
            raise ConfigError("--nmax must lie in 1..2*window+1")
        return cfg

    needs_construction = cmd in ("construct", "verify") or (cmd == "correlate" and args.toeplitz)
    if needs_construction:
        if args.epsilon is None:
            raise ConfigError("--epsilon is required")
        try:
            cfg.epsilon = parse_rational(args.epsilon)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if cfg.epsilon <= 0:
            raise ConfigError(f"--epsilon must be positive, got {args.epsilon}")
        cfg.stages = args.stages
        cfg.l_overrides = dict(_parse_override(o, int) for o in args.override_l)
        cfg.epsilon_overrides = dict(_parse_override(o, parse_rational) for o in args.override_epsilon)
        try:
            sched = construct.schedule(cfg.epsilon, cfg.k, cfg.stages, cfg.l_overrides, cfg.epsilon_overrides)
        except construct.ScheduleError as exc:
            raise ConfigError(str(exc)) from None
        l_max = sched[-1][1]
        if cmd in ("construct", "verify"):
            if cfg.window is None:
                raise ConfigError("--window is required")
            if cfg.window < l_max:
                raise ConfigError(f"--window must be >= l_max = {l_max}")
        if cmd == "construct":
            cfg.options = {"trace_out": args.trace_out, "seqw_out": args.seqw_out,
                           "provenance_radius": args.provenance_radius}
        elif cmd == "verify":
            chain = args.chain_window if args.chain_window is not None else 3 * l_max
            if chain < l_max or complexity.aligned_starts(l_max, chain).size < 3:
                raise ConfigError(f"--chain-window {chain} needs at least 3 aligned blocks of length {l_max}")
            cfg.options = {"chain_window": chain}
    if cmd == "correlate":
        cfg.options = {"N": args.N, "toeplitz": bool(args.toeplitz), "recode": _parse_recoding(args.recode)}
        if args.N < 1:
            raise ConfigError("--N must be >= 1")
    return cfg


def _source(cfg: ExperimentConfig):
    try:
        return parse_source_spec(cfg.source, cfg.k, default_seed=cfg.seed)
    except SequenceError as exc:
        raise ConfigError(str(exc)) from None


def _build(cfg: ExperimentConfig, a, window_range=None):
    return construct.build(a, cfg.epsilon, cfg.stages, cfg.l_overrides, cfg.epsilon_overrides,
                           window_range=window_range)


def run(cfg: ExperimentConfig, a=None) -> tuple[dict, dict[str, str]]:
    """Execute one experiment; returns the report document and side files (path -> text)."""
    if a is None and cfg.source is not None:
        a = _source(cfg)
    doc: dict = {"config": cfg.echo(), "stages": [], "checks": [], "metrics": {}, "tool_version": TOOL_VERSION}
    files: dict[str, str] = {}
    checks: list[CheckResult] = doc["checks"]
    m = doc["metrics"]
    N = cfg.window
    opt = cfg.options

    if cfg.command in ("construct", "verify"):
        rad = opt.get("provenance_radius")
        b, trace = _build(cfg, a, None if rad is None else (-rad, rad))
        doc["stages"] = [construct.stage_json(p) for p in trace.stages]
        checks += construct.verify_stage_properties(trace, N)
        checks += construct.check_stabilization(trace)
        dens = metrics.difference_density(a, b, N)
        bound = sum((p.density_bound(cfg.k) for p in trace.stages), Fraction(0))
        m["difference_density"] = dens
        m["density_bound_sum"] = bound
        checks.append(CheckResult("density_below_epsilon", dens < cfg.epsilon,
                                  detail={"density": dens, "epsilon": cfg.epsilon}))
        checks.append(CheckResult("density_below_stage_bounds", dens <= bound,
                                  detail={"density": dens, "bound": bound}))
        if cfg.command == "construct":
            if opt.get("trace_out"):
                files[opt["trace_out"]] = emit_report(trace.to_json())
            if opt.get("seqw_out"):
                files[opt["seqw_out"]] = format_seqw(cfg.k, -N, b.values(-N, N))
        else:
            cov = metrics.toeplitz_coverage(b, trace, N)
            checks.append(cov.check())
            m["coverage"] = cov.fraction
            for p in trace.stages:
                rts = metrics.returning_times(b, CylinderSpec(p.varpi), N)
                missing = [t for t in range(-(N // p.l) * p.l, N + 1, p.l) if t not in rts]
                checks.append(CheckResult(f"returning_times_{p.M}", not missing,
                                          witness={"t": missing[0]} if missing else None,
                                          detail={"count": len(rts), "period": p.l}))
                gap = metrics.max_gap(rts)
                checks.append(CheckResult(f"max_gap_{p.M}", gap <= p.l, detail={"max_gap": gap, "period": p.l}))
            checks += complexity.verify_complexity_chain(a, trace, opt["chain_window"])

    elif cfg.command == "entropy":
        prof = complexity.entropy_estimate(a, opt["nmax"], N)
        m["entropy_estimate"] = prof.estimate
        m["log_base"] = prof.log_base
        m["profile"] = [{"n": n, "count": c, "log_count_over_n": h} for n, c, h in prof.rows]
        if opt.get("csv_out"):
            files[opt["csv_out"]] = prof.to_csv()

    elif cfg.command == "mobius":
        table = mobius.mobius_sieve(opt["N"])
        limit = min(table.N, SELF_CHECK_LIMIT)
        bad = next((n for n in range(1, limit + 1) if table[n] != mobius.mobius_by_factorization(n)), None)
        checks.append(CheckResult("sieve_vs_factorization", bad is None,
                                  witness=None if bad is None else {"n": bad}, detail={"limit": limit}))
        m["mertens"] = [{"N": n, "M": mobius.mertens(table, n)} for n in metrics.log_checkpoints(table.N)]
        m["squarefree_count"] = int((table.values[1:] != 0).sum())
        if opt.get("table_out"):
            files[opt["table_out"]] = table.to_text()

    elif cfg.command == "correlate":
        table = mobius.mobius_sieve(opt["N"])
        if opt.get("self"):
            xi, rec = mobius.mobius_sequence(table), mobius.MU_RECODING
        else:
            xi = _build(cfg, a)[0] if opt["toeplitz"] else a
            rec = opt["recode"]
        rep = mobius.correlate(table, xi, opt["N"], rec)
        bound = max(abs(v) for v in rep.recoding.values())
        checks.append(CheckResult("correlation_bounded", all(abs(s) <= bound for _, s in rep.checkpoints),
                                  detail={"max_abs_f": bound}))
        m["correlation"] = rep.to_json()
    return doc, files


def _write_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, target)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        a = _source(cfg) if cfg.source is not None and not cfg.options.get("self") else None
    except (ConfigError, construct.ScheduleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        doc, files = run(cfg, a)
        text = emit_report(doc)
    except (ConfigError, ValueError, OSError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    try:
        for path, body in sorted(files.items()):
            _write_atomic(path, body)
        if cfg.out:
            _write_atomic(cfg.out, text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    for c in doc["checks"]:
        log.info("%s %s%s", c.name, "pass" if c.passed else "FAIL", " (flag)" if c.flagged else "")
    return EXIT_OK if all_passed(doc["checks"]) else EXIT_CHECKS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
