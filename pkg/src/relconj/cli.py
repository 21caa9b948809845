"""Command-line front end.

Every command prints one JSON report on stdout.  Exit codes: 0 conjugate /
success, 1 not conjugate (or verification failed), 2 inconclusive, 3 bad
input, 4 missing constant, 5 not a conjugator, 6 oracle failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .errors import (
    InconsistentDuplicates,
    MissingConstant,
    NotAConjugator,
    OracleFailure,
    RelconjError,
)
from .gcp import (
    ConjugacyInstance,
    ConstantsProfile,
    Decision,
    SearchConfig,
    SearchStats,
    Status,
    compress_with_report,
    exact_decimal,
    load_instance,
    load_profile,
    relative_length_bound,
    shortening_steps,
    solve,
    theorem4_bound,
    verify_conjugator,
)
from .groups import DEFAULT_MAX_ELEMENTS, Group, factor_name, load_group, x_length
from .oracles import calibrate_chi
from .relative import relative_length, relative_normal_form

EXIT_CONJUGATE = 0
EXIT_NOT_CONJUGATE = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT = 3
EXIT_MISSING_CONSTANT = 4
EXIT_NOT_CONJUGATOR = 5
EXIT_ORACLE = 6

STATUS_EXIT = {
    Status.CONJUGATE: EXIT_CONJUGATE,
    Status.NOT_CONJUGATE: EXIT_NOT_CONJUGATE,
    Status.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}

ENV_MAX_ELEMENTS = "RELCONJ_MAX_ELEMENTS"


@dataclass
class RunReport:
    payload: dict[str, Any]
    exit_code: int

    def to_json(self) -> str:
        return json.dumps(self.payload, indent=2, sort_keys=True)


def resolve_max_elements(flag: Optional[int]) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(ENV_MAX_ELEMENTS)
    if env:
        return int(env)
    return DEFAULT_MAX_ELEMENTS


def _base(command: str) -> dict[str, Any]:
    return {"command": command, "version": __version__}


def stats_json(stats: SearchStats, timing: bool) -> dict[str, Any]:
    out = {
        "elements_enumerated": stats.elements_enumerated,
        "candidates_checked": stats.candidates_checked,
        "radius_reached": stats.radius_reached,
    }
    if timing:
        out["wall_time"] = round(stats.wall_time, 6)
    return out


def decision_json(d: Decision) -> dict[str, Any]:
    out: dict[str, Any] = {"status": d.status.value}
    if d.status is Status.CONJUGATE:
        out["witness"] = str(d.witness)
        out["witness_x_length"] = x_length(d.witness)
        try:
            out["witness_relative"] = str(relative_normal_form(d.witness))
        except RelconjError:
            pass
    else:
        out["radius"] = None if d.radius is None else str(d.radius)
    if d.reason:
        out["reason"] = d.reason
    return out


def bounds_json(mu: int, alphabet_size: int, profile: Optional[ConstantsProfile]) -> Optional[dict[str, Any]]:
    if profile is None:
        return None
    out = {"L": exact_decimal(relative_length_bound(mu, alphabet_size, profile))}
    try:
        out["R"] = exact_decimal(theorem4_bound(mu, alphabet_size, profile))
    except MissingConstant:
        out["R"] = None
    return out


# ---------------------------------------------------------------------------
# commands on loaded objects


def cmd_solve(
    group: Group,
    instance: ConjugacyInstance | InconsistentDuplicates,
    profile: Optional[ConstantsProfile] = None,
    config: Optional[SearchConfig] = None,
    timing: bool = False,
) -> RunReport:
    config = config or SearchConfig()
    payload = _base("solve")
    payload["mode"] = config.mode
    if isinstance(instance, InconsistentDuplicates):
        payload["decision"] = {"status": Status.NOT_CONJUGATE.value, "radius": None, "reason": str(instance)}
        payload["bounds"] = None
        payload["stats"] = stats_json(SearchStats(), timing)
        return RunReport(payload, EXIT_NOT_CONJUGATE)
    payload["m"] = instance.m
    payload["mu"] = instance.mu
    payload["bounds"] = bounds_json(instance.mu, group.alphabet.size, profile)
    decision = solve(instance, profile, config)
    payload["decision"] = decision_json(decision)
    payload["stats"] = stats_json(decision.stats, timing)
    return RunReport(payload, STATUS_EXIT[decision.status])


def cmd_verify(group: Group, instance: ConjugacyInstance | InconsistentDuplicates, conjugator: str) -> RunReport:
    x = group.parse(conjugator)
    payload = _base("verify")
    payload["conjugator"] = str(x)
    ok = not isinstance(instance, InconsistentDuplicates) and verify_conjugator(instance, x)
    payload["valid"] = ok
    return RunReport(payload, EXIT_CONJUGATE if ok else EXIT_NOT_CONJUGATE)


def _require_instance(instance):
    if isinstance(instance, InconsistentDuplicates):
        raise NotAConjugator(f"instance lists are not conjugate ({instance})")
    return instance


def cmd_shorten(group: Group, instance, conjugator: str) -> RunReport:
    instance = _require_instance(instance)
    x = relative_normal_form(group.parse(conjugator))
    y, steps = shortening_steps(x, instance)
    payload = _base("shorten")
    payload.update(
        input=str(x.element()),
        input_relative=str(x),
        output=str(y.element()),
        output_relative=str(y),
        relative_length_before=len(x),
        relative_length_after=len(y),
        steps=[{"s": st.s, "t": st.t, "before": st.before, "after": st.after} for st in steps],
    )
    return RunReport(payload, EXIT_CONJUGATE)


def cmd_compress(group: Group, instance, conjugator: str, profile: Optional[ConstantsProfile] = None) -> RunReport:
    instance = _require_instance(instance)
    x = relative_normal_form(group.parse(conjugator))
    y, records = compress_with_report(x, instance, profile=profile)
    rows = []
    for r in records:
        row: dict[str, Any] = {"position": r.position, "case": r.case}
        if r.case != "free_letter":
            row["factor"] = factor_name(r.factor)
            row["original"] = str(r.original)
        if r.case == "case2":
            row.update(
                witness=str(r.witness),
                deleted=r.deleted,
                connector_mu=r.connector_mu,
                theta_bound=r.theta_bound,
            )
        rows.append(row)
    payload = _base("compress")
    payload.update(
        input=str(x.element()),
        input_relative=str(x),
        output=str(y.element()),
        output_relative=str(y),
        relative_length_before=len(x),
        relative_length_after=len(y),
        syllables=rows,
    )
    return RunReport(payload, EXIT_CONJUGATE)


def cmd_bound(mu: int, alphabet_size: int, profile: ConstantsProfile) -> RunReport:
    payload = _base("bound")
    payload.update(mu=mu, alphabet_size=alphabet_size)
    payload["L"] = exact_decimal(relative_length_bound(mu, alphabet_size, profile))
    payload["g"] = profile.g_at(mu)
    payload["R"] = exact_decimal(theorem4_bound(mu, alphabet_size, profile))
    return RunReport(payload, EXIT_CONJUGATE)


def cmd_calibrate(group: Group, k: int, samples: int, seed: int, x_radius: Optional[int] = None,
                  max_elements: int = DEFAULT_MAX_ELEMENTS) -> RunReport:
    report = calibrate_chi(group, k, samples, seed, x_radius=x_radius, max_elements=max_elements)
    payload = _base("calibrate")
    payload.update(report.to_json())
    return RunReport(payload, EXIT_CONJUGATE)


def cmd_bench(
    group: Group,
    suite: dict[str, Any],
    base_dir: Path,
    profile: Optional[ConstantsProfile] = None,
    config: Optional[SearchConfig] = None,
) -> RunReport:
    config = config or SearchConfig()
    entries = suite.get("instances")
    if not isinstance(entries, list):
        raise ValueError("suite file must hold an 'instances' list")
    rows = []
    for entry in entries:
        path = base_dir / entry["instance"]
        g = load_group(base_dir / entry["group"]) if "group" in entry else group
        expect = entry.get("expect", "unknown")
        row: dict[str, Any] = {"instance": entry["instance"], "expect": expect}
        t0 = time.perf_counter()
        try:
            inst = load_instance(g, path)
        except InconsistentDuplicates as exc:
            row.update(status=Status.NOT_CONJUGATE.value, reason=str(exc), mu=None)
            inst = None
        if inst is not None:
            d = solve(inst, profile, config)
            row.update(
                status=d.status.value,
                mu=inst.mu,
                elements_enumerated=d.stats.elements_enumerated,
                radius_reached=d.stats.radius_reached,
            )
            L = relative_length_bound(inst.mu, g.alphabet.size, profile) if profile else None
            row["L"] = None if L is None else exact_decimal(L)
            if d.is_conjugate:
                rel = relative_length(d.witness)
                row.update(witness=str(d.witness), witness_x_length=x_length(d.witness), witness_relative_length=rel)
                row["ratio"] = None if L is None else rel / L
        row["wall_time"] = round(time.perf_counter() - t0, 6)
        row["expect_met"] = expect != "conjugate" or row["status"] == Status.CONJUGATE.value
        rows.append(row)
    payload = _base("bench")
    payload["rows"] = rows
    payload["summary"] = {
        "instances": len(rows),
        "conjugate": sum(r["status"] == "conjugate" for r in rows),
        "expectations_met": sum(r["expect_met"] for r in rows),
    }
    return RunReport(payload, EXIT_CONJUGATE)


def render_table(rows: Sequence[dict[str, Any]]) -> str:
    cols = ["instance", "status", "mu", "witness_x_length", "witness_relative_length", "elements_enumerated", "wall_time", "ratio"]
    cells = [cols] + [["" if r.get(c) is None else str(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells)


def render_pretty(payload: dict[str, Any], indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for key in sorted(payload):
        value = payload[key]
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(render_pretty(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for item in value:
                lines.append(render_pretty(item, indent + 1))
                lines.append("")
        else:
            lines.append(f"{pad}{key}: {value}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# argument parsing


def _load_instance_or_negative(group: Group, path):
    try:
        return load_instance(group, path)
    except InconsistentDuplicates as exc:
        return exc


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the "inconclusive" exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")
    common.add_argument("--timing", action="store_true", help="include wall-clock times in the report")
    common.add_argument("--max-elements", type=int, default=None)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--constants", type=Path, default=None)
    search.add_argument("--force-profile", action="store_true", help="accept a degenerate all-zero profile")
    search.add_argument("--mode", choices=["heuristic", "certified"], default="heuristic")
    search.add_argument("--max-radius", type=int, default=8)

    parser = _Parser(prog="relconj", description="Generalized conjugacy search in free products")
    parser.add_argument("--version", action="version", version=f"relconj {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common, search], help="decide conjugacy of two lists")
    p.add_argument("group", type=Path)
    p.add_argument("instance", type=Path)

    p = sub.add_parser("verify", parents=[common], help="check a proposed conjugator")
    p.add_argument("group", type=Path)
    p.add_argument("instance", type=Path)
    p.add_argument("conjugator")

    p = sub.add_parser("shorten", parents=[common], help="pigeonhole-shorten a conjugator")
    p.add_argument("group", type=Path)
    p.add_argument("instance", type=Path)
    p.add_argument("conjugator")

    p = sub.add_parser("compress", parents=[common], help="compress parabolic syllables of a conjugator")
    p.add_argument("group", type=Path)
    p.add_argument("instance", type=Path)
    p.add_argument("conjugator")
    p.add_argument("--constants", type=Path, default=None)

    p = sub.add_parser("bound", parents=[common], help="print the relative-length and X-length bounds")
    p.add_argument("--mu", type=int, required=True)
    p.add_argument("--alphabet-size", type=int, required=True)
    p.add_argument("--constants", type=Path, required=True)
    p.add_argument("--force-profile", action="store_true")

    p = sub.add_parser("calibrate", parents=[common], help="empirical lower estimate of chi(k)")
    p.add_argument("group", type=Path)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--x-radius", type=int, default=None)

    p = sub.add_parser("bench", parents=[common, search], help="run a suite of instances")
    p.add_argument("group", type=Path)
    p.add_argument("suite", type=Path)
    return parser


def _dispatch(args) -> RunReport:
    max_elements = resolve_max_elements(args.max_elements)
    profile = None
    if getattr(args, "constants", None) is not None:
        profile = load_profile(args.constants, force=getattr(args, "force_profile", False))
    if args.command == "bound":
        return cmd_bound(args.mu, args.alphabet_size, profile)
    group = load_group(args.group)
    if args.command == "calibrate":
        return cmd_calibrate(group, args.k, args.samples, args.seed, args.x_radius, max_elements)
    if args.command == "bench":
        config = SearchConfig(args.mode, args.max_radius, max_elements, args.workers)
        with open(args.suite, encoding="utf-8") as fh:
            suite = json.load(fh)
        report = cmd_bench(group, suite, args.suite.parent, profile, config)
        print(render_table(report.payload["rows"]), file=sys.stderr)
        return report
    instance = _load_instance_or_negative(group, args.instance)
    if args.command == "solve":
        config = SearchConfig(args.mode, args.max_radius, max_elements, args.workers)
        return cmd_solve(group, instance, profile, config, timing=args.timing)
    if args.command == "verify":
        return cmd_verify(group, instance, args.conjugator)
    if args.command == "shorten":
        return cmd_shorten(group, instance, args.conjugator)
    if args.command == "compress":
        return cmd_compress(group, instance, args.conjugator, profile)
    raise ValueError(f"unknown command {args.command}")


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, MissingConstant):
        return EXIT_MISSING_CONSTANT
    if isinstance(exc, NotAConjugator):
        return EXIT_NOT_CONJUGATOR
    if isinstance(exc, OracleFailure):
        return EXIT_ORACLE
    return EXIT_INPUT


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = _dispatch(args)
    except (RelconjError, OSError, ValueError, KeyError, TypeError) as exc:
        kind = type(exc).__name__
        print(f"relconj {args.command}: {kind}: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    if args.pretty:
        print(render_pretty(report.payload))
    else:
        print(report.to_json())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
