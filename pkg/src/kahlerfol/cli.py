"""Command-line runner: ``kahlerfol run|sweep|profile|list-scenarios``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bundles import WarpedBundleMetric, component_grid_csv
from .convergence import convergence_table, orders_by_check, row_orders
from .report import VerificationReport
from .scenario import (
    SWEEP_PARAMETERS,
    Scenario,
    ScenarioError,
    build_bundle,
    bundled_scenarios,
    load_scenario,
    parse_scenario,
    run_scenario,
)

log = logging.getLogger("kahlerfol")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _prepare(args) -> Scenario:
    scn = load_scenario(args.scenario)
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    if args.fd_step is not None:
        scn = scn.with_fd_step(args.fd_step)
    return scn


def _write(out: Path | None, name: str, text: str) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)
    log.info("wrote %s", out / name)


def _informational_misses(rep: VerificationReport) -> list[str]:
    return sorted({r.check for r in rep.rows if r.informational and not r.passed})


def _verdict(rep: VerificationReport, strict: bool) -> bool:
    if not rep.passed:
        return False
    if strict and (_informational_misses(rep) or [n for n in rep.notes if n.startswith("warning")]):
        return False
    return True


def cmd_run(args) -> int:
    scn = _prepare(args)
    rep = run_scenario(scn)
    out = Path(args.out) if args.out else None
    _write(out, f"{scn.name}.jsonl", rep.to_jsonl())
    _write(out, f"{scn.name}.txt", rep.summary_text())
    sys.stdout.write(rep.summary_text())
    for c in _informational_misses(rep):
        sys.stdout.write(f"warning: informational check {c} outside tolerance\n")
    return EXIT_OK if _verdict(rep, args.strict) else EXIT_FAIL


def _parse_values(param: str, raw: str) -> list:
    conv = int if param in ("n_grid", "sample_count") else float
    try:
        return [conv(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise ScenarioError(f"cannot parse sweep values {raw!r}", key="--values") from None


def cmd_sweep(args) -> int:
    scn = _prepare(args)
    if args.param not in SWEEP_PARAMETERS:
        raise ScenarioError(f"unknown sweep parameter {args.param!r}; expected one of {', '.join(SWEEP_PARAMETERS)}",
                            key="--param")
    values = _parse_values(args.param, args.values)
    if len(values) < 1:
        raise ScenarioError("no sweep values", key="--values")
    out = Path(args.out) if args.out else None
    reports = []
    ok = True
    lines = [f"sweep {scn.name} over {args.param}: {', '.join(repr(v) for v in values)}"]
    for v in values:
        rep = run_scenario(scn.with_parameter(args.param, v))
        rep.name = f"{scn.name}[{args.param}={v!r}]"
        reports.append(rep)
        ok = ok and _verdict(rep, args.strict)
        _write(out, f"{scn.name}-{args.param}-{v!r}.jsonl", rep.to_jsonl())
        lines.append(f"  {args.param}={v!r}: rows={len(rep.rows)} pass={rep.n_pass} fail={rep.n_fail} "
                     f"max_residual={rep.max_residual:.3e}")
    table = [f"{'check':34s} " + " ".join(f"{repr(v):>12s}" for v in values)]
    checks = sorted({r.check for r in reports[0].rows})
    for c in checks:
        vals = []
        for rep in reports:
            rows = rep.rows_for(c)
            nums = [r.numeric for r in rows if r.numeric is not None and np.isfinite(r.numeric)]
            vals.append(f"{(max(r.residual for r in rows) if rows else float('nan')):12.4e}")
            if nums and args.numeric:
                vals[-1] = f"{float(np.mean(nums)):12.6g}"
        table.append(f"{c:34s} " + " ".join(vals))
    text = "\n".join(lines) + "\n\n" + "\n".join(table) + "\n"
    if args.param == "fd_step" and len(values) > 1:
        text += "\nobserved orders (furthest from 2 per check)\n"
        for (h1, r1), (h2, r2) in zip(zip(values, reports), zip(values[1:], reports[1:])):
            rows = row_orders(r1, r2, ratio=h1 / h2)
            orders = orders_by_check(rows)
            text += f"-- {h1!r} -> {h2!r}\n"
            text += "".join(f"  {c:34s} {o:8.3f}\n" for c, o in sorted(orders.items()) if np.isfinite(o))
            _write(out, f"{scn.name}-orders-{h1!r}-{h2!r}.txt", convergence_table(rows))
    _write(out, f"{scn.name}-sweep-{args.param}.txt", text)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_profile(args) -> int:
    scn = _prepare(args)
    bundle = build_bundle(scn)
    if not isinstance(bundle, WarpedBundleMetric):
        raise ScenarioError("the profile verb needs a warped or product bundle", key="bundle.kind")
    csv_text = bundle.profile.to_csv()
    out = Path(args.out) if args.out else None
    if out is None:
        sys.stdout.write(csv_text)
    _write(out, f"{scn.name}-profile.csv", csv_text)
    if args.grid:
        pts = bundle.sample(np.random.default_rng(scn.seed), args.grid)
        grid = component_grid_csv(bundle.metric, pts)
        if out is None:
            sys.stdout.write(grid)
        _write(out, f"{scn.name}-metric.csv", grid)
    return EXIT_OK


def cmd_list(args) -> int:
    for name, text in bundled_scenarios().items():
        scn = parse_scenario(text, f"{name}.scn")
        sys.stdout.write(f"{name:18s} {scn.bundle.kind:8s} {','.join(scn.suites):40s} {scn.description}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kahlerfol", description="Verify Kähler foliation constructions numerically.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help="directory for report files"):
        sp.add_argument("--scenario", required=True, help="scenario file path or bundled scenario name")
        sp.add_argument("--out", default=None, help=out_help)
        sp.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        sp.add_argument("--fd-step", type=float, default=None, help="override the first-derivative FD step")
        sp.add_argument("--strict", action="store_true", help="treat warnings as failures")

    sp = sub.add_parser("run", help="run a scenario and write reports")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run a scenario over several values of one parameter")
    common(sp)
    sp.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.add_argument("--numeric", action="store_true", help="tabulate mean numeric values instead of residuals")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("profile", help="emit the realized profile as CSV")
    common(sp, out_help="directory for CSV files (stdout if omitted)")
    sp.add_argument("--grid", type=int, default=0, help="also tabulate metric components at N sample points")
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("list-scenarios", help="list bundled scenarios")
    sp.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        sys.stderr.write(f"kahlerfol: scenario error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
