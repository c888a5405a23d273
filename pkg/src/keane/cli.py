"""Command-line front end.

Subcommands: ``params``, ``verify``, ``dimension``, ``generic`` and
``recurrence``.  Every option may also come from a JSON ``--config`` file
whose keys mirror the long flags (dashes or underscores); flags given on
the command line win.  Exit codes: 0 ok, 1 a verification FAIL, 2 usage or
validation error, 3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import numeric
from .construction import KeaneConstruction, ParamSeq, admissible, all_return_times
from .dimension import DIRECTIONS, dim_bounds, generate_rule, generic_analysis, parse_rule
from .errors import DomainError, ResourceError, step_budget
from .measures import fmt, lemma_csv, lemma_suite
from .oracle import induction_oracle
from .recurrence import (
    RECORD_COLUMNS,
    control_most_bound,
    controlled_nice_check,
    recurrence_stat,
    sample_point,
)
from .towers import TowerDecomposition

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

COMMON = {"config": None, "format": "json", "budget": None, "digits": 50, "out": None}
DEFAULTS = {
    "params": {"rule": None, "alpha": None, "K": 4, "n1": 10, "file": None},
    "verify": {"rule": "minimal-admissible", "alpha": None, "n1": 10, "file": None,
               "K_max": 3, "r": 3, "oracle_levels": 2},
    "dimension": {"rule": "minimal-admissible", "alpha": None, "n1": 10, "file": None,
                  "direction": "both", "K": 5, "r": None},
    "generic": {"rule": "generic", "alpha": None, "n1": 10, "file": None, "k": 2, "eps": "1/100"},
    "recurrence": {"rule": "appendix", "alpha": "9/10", "n1": 10, "file": None, "K": 4, "level": None,
                   "N": 10000, "samples": 5, "seed": None, "x_measure": 2, "y_measure": 3,
                   "c": "1", "nice_alpha": "1/2"},
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None


def _fraction(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="keane", description="Keane's non-uniquely-ergodic 4-IETs")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with option values")
        p.add_argument("--format", choices=["json", "csv"])
        p.add_argument("--budget", type=int, help="step budget (default: $KEANE_STEP_BUDGET or 10^7)")
        p.add_argument("--digits", type=int, help="decimal digits for logarithms")
        p.add_argument("--out", help="write the report here instead of stdout")

    def source(p):
        p.add_argument("--rule", help="flip00|flip01|flip10|flip11|alpha2|alpha3|generic|appendix|"
                                      "minimal-admissible|explicit")
        p.add_argument("--alpha", help="target exponent for alpha2/alpha3")
        p.add_argument("--n1", type=int)
        p.add_argument("--file", help="ParamSeq JSON")

    p = sub.add_parser("params", help="generate or validate a parameter sequence")
    common(p), source(p)
    p.add_argument("--K", type=int, help="number of pairs")

    p = sub.add_parser("verify", help="lemma suite and induction oracle")
    common(p), source(p)
    p.add_argument("--K-max", dest="K_max", type=int)
    p.add_argument("--r", type=int, help="truncation depth")
    p.add_argument("--oracle-levels", dest="oracle_levels", type=int)

    p = sub.add_parser("dimension", help="dimension bound sequences")
    common(p), source(p)
    p.add_argument("--direction", choices=["2", "3", "both"])
    p.add_argument("--K", type=int, help="deepest level")
    p.add_argument("--r", type=int)

    p = sub.add_parser("generic", help="phase counting and the covering condition")
    common(p), source(p)
    p.add_argument("--k", type=int)
    p.add_argument("--eps")

    p = sub.add_parser("recurrence", help="recurrence statistic and the rate estimates")
    common(p), source(p)
    p.add_argument("--K", type=int)
    # here --alpha is the exponent of the statistic, not a rule parameter
    p.add_argument("--level", type=int, help="tower level for distances (default K-2)")
    p.add_argument("--N", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--x-measure", dest="x_measure", type=int, choices=[2, 3])
    p.add_argument("--y-measure", dest="y_measure", type=int, choices=[2, 3])
    p.add_argument("--c")
    p.add_argument("--nice-alpha", dest="nice_alpha")
    return parser


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge flags, config file and defaults, rejecting unknown config keys."""
    known = {**COMMON, **DEFAULTS[args.command]}
    options = {key: getattr(args, key, None) for key in known}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        for raw_key, value in data.items():
            key = raw_key.replace("-", "_")
            if key == "command":
                if value != args.command:
                    raise UsageError(f"config is for command {value!r}, not {args.command!r}")
                continue
            if key not in known or key == "config":
                raise UsageError(f"unknown config key {raw_key!r}")
            if options[key] is None:
                options[key] = value
    for key, value in known.items():
        if options[key] is None:
            options[key] = value
    return RunConfig(args.command, options)


def load_sequence(cfg: RunConfig, K: int) -> ParamSeq:
    if cfg.file:
        try:
            seq = ParamSeq.from_json(Path(cfg.file).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {cfg.file}: {exc}") from None
        if seq.K < K:
            raise DomainError(f"{cfg.file} has {seq.K} pairs, the command needs {K}")
        return seq
    if cfg.rule in (None, "explicit"):
        raise UsageError("give --file for an explicit sequence, or a --rule")
    rule = parse_rule(cfg.rule, cfg.alpha, int(cfg.n1))
    return generate_rule(rule, K)


# -- commands ------------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _seq_json(seq: ParamSeq) -> dict:
    return json.loads(seq.to_json())


def cmd_params(cfg: RunConfig) -> tuple[str, int]:
    if cfg.rule in (None, "explicit") and not cfg.file:
        raise UsageError("params needs --rule or --file")
    seq = load_sequence(cfg, 1 if cfg.file else int(cfg.K))
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "m", "n"])
        for k, (m, n) in enumerate(seq.pairs, start=1):
            w.writerow([k, m, n])
        return buf.getvalue(), EXIT_OK
    return seq.to_json() + "\n", EXIT_OK


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    K_max, r = int(cfg.K_max), int(cfg.r)
    seq = load_sequence(cfg, K_max + r)
    rows = lemma_suite(seq, K_max, r)
    budget = step_budget(cfg.budget)
    oracles = []
    bs = all_return_times(seq)
    for k in range(1, min(int(cfg.oracle_levels), seq.K) + 1):
        if sum(bs[k]) > budget:
            break
        oracles.append(induction_oracle(seq, k, budget))
    failed = any(row.verdict == "FAIL" for row in rows) or not all(o.ok for o in oracles)
    code = EXIT_FAIL if failed else EXIT_OK
    if cfg.format == "csv":
        return lemma_csv(rows), code
    counts = {v: sum(1 for row in rows if row.verdict == v) for v in ("PASS", "INCONCLUSIVE", "FAIL")}
    report = {
        "sequence": _seq_json(seq),
        "admissibility": [{"k": a.k, "condition": a.condition, "status": a.status, "detail": a.detail}
                          for a in admissible(seq)],
        "oracle": [o.as_dict() for o in oracles],
        "lemmas": [{"lemma_id": row.lemma_id, "k": row.k, "verdict": row.verdict, "bound": fmt(row.bound),
                    "enclosure_lo": fmt(row.enclosure_lo), "enclosure_hi": fmt(row.enclosure_hi),
                    "margin": fmt(row.margin)} for row in rows],
        "summary": counts,
    }
    return _dump(report), code


def cmd_dimension(cfg: RunConfig) -> tuple[str, int]:
    K_max = int(cfg.K)
    seq = load_sequence(cfg, K_max + 2)
    directions = ["2", "3"] if cfg.direction == "both" else [str(cfg.direction)]
    digits = int(cfg.digits)
    seqs = [dim_bounds(seq, d, K_max, cfg.r, digits) for d in directions]
    if cfg.format == "csv":
        parts = [s.to_csv(min(digits, 30)) for s in seqs]
        return parts[0] + "".join(p.split("\n", 1)[1] for p in parts[1:]), EXIT_OK
    out = {"sequence": _seq_json(seq), "digits": digits, "directions": []}
    for s in seqs:
        rows = []
        for row, up_min, lo_min in zip(s.rows, s.running_min_upper, s.running_min_lower):
            entry = {"k": row.k, "flagged": row.flagged, "note": row.note}
            if not row.flagged:
                entry["upper"] = list(numeric.bounds_str(row.upper, digits))
                entry["lower"] = list(numeric.bounds_str(row.lower, digits))
            if up_min is not None:
                entry["running_min_upper"] = numeric.decimal_str(up_min[1], digits, "up")
                entry["running_min_lower"] = numeric.decimal_str(lo_min[1], digits, "up")
            rows.append(entry)
        out["directions"].append({"direction": DIRECTIONS[s.direction], "rows": rows})
    return _dump(out), EXIT_OK


def cmd_generic(cfg: RunConfig) -> tuple[str, int]:
    k = int(cfg.k)
    seq = load_sequence(cfg, k + 2)
    report = generic_analysis(seq, k, _fraction(cfg.eps), digits=int(cfg.digits))
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["piece", "run_length", "good_phases", "fraction"])
        for piece, (L, good) in sorted(report.piece_runs.items()):
            w.writerow([piece, L, good, fmt(Fraction(good, L))])
        return buf.getvalue(), EXIT_OK
    out = {"sequence": _seq_json(seq), **report.as_dict(min(int(cfg.digits), 30))}
    return _dump(out), EXIT_OK


def cmd_recurrence(cfg: RunConfig) -> tuple[str, int]:
    if cfg.seed is None:
        raise UsageError("recurrence needs an explicit --seed")
    K = int(cfg.K)
    seq = load_sequence(cfg, K)
    level = int(cfg.level) if cfg.level is not None else seq.K - 2
    budget = cfg.budget
    construction = KeaneConstruction(seq)
    towers = TowerDecomposition(construction, level, budget)
    rng = random.Random(int(cfg.seed))
    alpha = _fraction(cfg.alpha)
    runs = []
    for _ in range(int(cfg.samples)):
        x = sample_point(towers, int(cfg.x_measure), rng)
        y = sample_point(towers, int(cfg.y_measure), rng)
        run = recurrence_stat(seq, x, y, int(cfg.N), alpha, towers=towers, budget=budget)
        run.x_measure, run.y_measure = int(cfg.x_measure), int(cfg.y_measure)
        runs.append(run)

    checks = {}
    code = EXIT_OK
    if level >= 2 and level + 2 <= seq.K:
        nice = [controlled_nice_check(seq, level, _fraction(cfg.c), _fraction(cfg.nice_alpha), e,
                                      towers=towers)
                for e in (None, Fraction(1, 2))]
        most = control_most_bound(seq, level)
        checks = {"controlled_nice": [n.as_dict() for n in nice], "control_most": most.as_dict()}
        if most.verdict == "FAIL":
            code = EXIT_FAIL

    digits = min(int(cfg.digits), 30)
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample", *RECORD_COLUMNS])
        for s, run in enumerate(runs):
            w.writerows([s, *row] for row in run.rows(digits))
            if run.truncated:
                w.writerow([s, "# truncated", "", "", "", "", ""])
        return buf.getvalue(), code
    out = {
        "sequence": _seq_json(seq), "level": level, "alpha": fmt(alpha), "seed": int(cfg.seed),
        "samples": [{
            "x": fmt(run.x), "y": fmt(run.y), "x_measure": run.x_measure, "y_measure": run.y_measure,
            "N": run.N, "truncated": run.truncated,
            "final_running_min_hi": numeric.decimal_str(run.records[-1][5], digits, "up") if run.records else None,
            "records": [dict(zip(RECORD_COLUMNS, row)) for row in run.rows(digits)],
        } for run in runs],
        "checks": checks,
    }
    return _dump(out), code


COMMANDS = {"params": cmd_params, "verify": cmd_verify, "dimension": cmd_dimension,
            "generic": cmd_generic, "recurrence": cmd_recurrence}


def main(argv: list[str] | None = None) -> int:
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)  # parameter rules produce very long integers
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve(args)
        text, code = COMMANDS[cfg.command](cfg)
    except (UsageError, DomainError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
