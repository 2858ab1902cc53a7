"""Command-line front end.

Three subcommands: `check-lin` runs the bounded history-inclusion check,
`check-proof` verifies per-method proof outlines plus the soundness
obligations, and `histories` prints a generated history set.  Exit codes
are the machine contract: 0 pass, 1 verdict failure (counterexample or
rejected proof), 2 model or usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .errors import FaultReachable, ModelError, RelviewsError, UniverseTooLarge
from .linearizability import (
    abstract_histories,
    all_instances,
    check_linearizable,
    check_obligations,
    concrete_histories,
    history_sort_key,
    render_history,
)
from .model_io import load_model, load_outlines

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_ERROR = 2


@dataclass
class RunReport:
    verdict: str
    ok: bool
    counterexample: Optional[str] = None
    stats: Dict[str, int] = field(default_factory=dict)
    timing: float = 0.0
    detail: str = ""

    def render_text(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        if self.detail:
            lines.append(self.detail)
        if self.counterexample:
            lines.append("counterexample:")
            lines.extend("  " + l for l in self.counterexample.splitlines())
        for key in sorted(self.stats):
            lines.append(f"stat {key}: {self.stats[key]}")
        lines.append(f"time: {self.timing:.2f}s")
        return "\n".join(lines)

    def render_machine(self) -> str:
        return json.dumps({
            "verdict": self.verdict,
            "ok": self.ok,
            "counterexample": self.counterexample,
            "stats": self.stats,
            "detail": self.detail,
        }, sort_keys=True)


def _effective_cap(args) -> Optional[int]:
    if args.cap is not None:
        return args.cap
    env = os.environ.get("RELVIEWS_CAP")
    return int(env) if env else None


def _emit(report: RunReport, fmt: str) -> None:
    if fmt == "machine":
        print(report.render_machine())
    else:
        print(report.render_text())


def cmd_check_lin(args) -> int:
    t0 = time.time()
    model = load_model(args.model)
    try:
        res = check_linearizable(model, args.bound, cap=_effective_cap(args))
    except FaultReachable as exc:
        report = RunReport("fault reachable", False, detail=str(exc),
                           timing=time.time() - t0)
        _emit(report, args.format)
        return EXIT_VIOLATION
    ce = render_history(res.counterexample) if res.counterexample else None
    report = RunReport(res.verdict(), res.ok, counterexample=ce,
                       stats=res.stats, timing=time.time() - t0)
    if res.ok and res.still_growing:
        report.detail = ("the concrete history set is still growing at this "
                         "bound; inclusion is proved up to the bound only")
    _emit(report, args.format)
    return EXIT_OK if res.ok else EXIT_VIOLATION


def _check_instance(payload):
    model_path, outline_path, inst = payload
    model = load_model(model_path)
    load_outlines(outline_path, model)
    report = check_obligations(model, instances=[inst],
                               include_shared=False)
    return [(it.obligation, it.subject, it.ok, it.detail)
            for it in report.items]


def cmd_check_proof(args) -> int:
    """Per-instance checks are independent, so they may be farmed out to
    workers; the report is reassembled in instance order either way, which
    keeps the output identical across worker counts."""
    t0 = time.time()
    model = load_model(args.model)
    load_outlines(args.outline, model)
    instances = all_instances(model)
    payloads = [(args.model, args.outline, inst) for inst in instances]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            per_instance = list(pool.map(_check_instance, payloads))
    else:
        per_instance = [_check_instance(p) for p in payloads]
    shared = check_obligations(model, instances=[], include_shared=True)
    rows = [(it.obligation, it.subject, it.ok, it.detail)
            for it in shared.items[:1]]
    for chunk in per_instance:
        rows.extend(chunk)
    rows.extend((it.obligation, it.subject, it.ok, it.detail)
                for it in shared.items[1:])
    ok = all(row[2] for row in rows)
    first_fail = next((row for row in rows if not row[2]), None)
    lines = [f"[{'pass' if row[2] else 'FAIL'}] {row[0]} {row[1]}"
             + (f": {row[3]}" if row[3] and not row[2] else "")
             for row in rows]
    verdict = "proof accepted" if ok else "proof rejected"
    detail = "\n".join(lines)
    if first_fail:
        detail += (f"\nfirst failure: {first_fail[0]} {first_fail[1]}: "
                   f"{first_fail[3]}")
    out = RunReport(verdict, ok, stats={"checks": len(lines)},
                    timing=time.time() - t0, detail=detail)
    _emit(out, args.format)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_histories(args) -> int:
    t0 = time.time()
    model = load_model(args.model)
    cap = _effective_cap(args)
    if args.side == "abstract":
        hs = abstract_histories(model, args.bound, cap=cap)
    else:
        hs = concrete_histories(model, args.bound, cap=cap)
    ordered = sorted(hs, key=history_sort_key)
    for i, h in enumerate(ordered):
        if args.format == "machine":
            print(json.dumps([list(ev) for ev in h]))
        else:
            print(f"# history {i}")
            print(render_history(h))
    if args.format != "machine":
        print(f"{len(ordered)} histories ({args.side}, bound {args.bound}, "
              f"{time.time() - t0:.2f}s)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="relviews",
        description="bounded linearizability checking and relational-view "
                    "proof outlines for concurrent library models")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--cap", type=int, default=None,
                        help="state-count cap (also RELVIEWS_CAP)")
        sp.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for independent checks")
        sp.add_argument("--format", choices=("text", "machine"),
                        default="text")

    sp = sub.add_parser("check-lin", help="bounded history-inclusion check")
    sp.add_argument("model")
    sp.add_argument("--bound", type=int, required=True)
    common(sp)
    sp.set_defaults(fn=cmd_check_lin)

    sp = sub.add_parser("check-proof",
                        help="verify proof outlines and obligations")
    sp.add_argument("model")
    sp.add_argument("outline")
    common(sp)
    sp.set_defaults(fn=cmd_check_proof)

    sp = sub.add_parser("histories", help="print a generated history set")
    sp.add_argument("model")
    sp.add_argument("--side", choices=("concrete", "abstract"),
                    default="concrete")
    sp.add_argument("--bound", type=int, required=True)
    common(sp)
    sp.set_defaults(fn=cmd_histories)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ModelError, UniverseTooLarge, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except RelviewsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
