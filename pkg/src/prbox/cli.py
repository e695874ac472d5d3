"""Command-line interface: ``prbox <command> [--seed --n-runs --tol --out --format]``.

Exit codes: 0 pass, 1 check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from prbox import boxes, channels, protocol, quantum_bounds
from prbox.boxes import BIT_PAIRS, CorrelationBox
from prbox.verify import verify_all

COMMANDS = ("chsh-demo", "pr-box", "no-signaling", "local-bound", "tsirelson", "simulate", "verify-all")


@dataclass
class Report:
    data: dict
    box: CorrelationBox | None = None
    ok: bool = True


# -- formatting ---------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return None if math.isnan(x) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _nested(v) -> bool:
    return isinstance(v, dict) or (isinstance(v, list) and bool(v) and isinstance(v[0], (dict, list)))


def _text(x, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(x, dict):
        lines = []
        for k, v in x.items():
            if _nested(v):
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_text(v)}")
        return "\n".join(lines)
    if isinstance(x, list):
        if x and isinstance(x[0], (dict, list)):
            return "\n".join(_text(v, indent) if isinstance(v, dict) else pad + _text(v) for v in x)
        return "[" + ", ".join(_text(v) for v in x) + "]"
    if isinstance(x, float):
        return f"{x:.12g}"
    if x is None:
        return "-"
    return str(x)


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report.data), indent=2)
    if fmt == "csv":
        if report.box is None:
            raise UsageError("csv output is only available for commands that produce a box")
        return report.box.to_csv()
    return _text(_jsonable(report.data))


class UsageError(Exception):
    pass


def _load_box(path: str) -> CorrelationBox:
    text = Path(path).read_text()
    if path.endswith(".csv"):
        return CorrelationBox.from_csv(text)
    return CorrelationBox.from_json(text)


def _box_table(box: CorrelationBox) -> dict:
    return box.to_dict()["p"]


# -- commands -----------------------------------------------------------------

def cmd_chsh_demo(args) -> Report:
    if args.channel:
        ch = channels.channel_from_json(Path(args.channel).read_text())
    else:
        ch = channels.make_pr_channel()
    if args.write_channel:
        Path(args.write_channel).write_text(channels.channel_to_json(ch))
    box = boxes.box_from_channel(ch)
    corr = boxes.correlators(box)
    value = boxes.chsh(box)
    matches = box.allclose(boxes.make_pr_box(), args.tol)
    return Report({
        "box": _box_table(box),
        "correlators": {f"{X},{Y}": c for (X, Y), c in zip(BIT_PAIRS, corr)},
        "chsh": value,
        "equals_pr_box": matches,
    }, box)


def cmd_pr_box(args) -> Report:
    box = boxes.make_pr_box()
    return Report({"p": _box_table(box), "chsh": boxes.chsh(box)}, box)


def cmd_no_signaling(args) -> Report:
    box = _load_box(args.box) if args.box else boxes.box_from_channel(channels.make_pr_channel())
    rep = boxes.is_no_signaling(box, args.tol)
    return Report({"no_signaling": rep.no_signaling, "max_violation": rep.max_violation}, box,
                  ok=rep.no_signaling)


def cmd_local_bound(args) -> Report:
    rows = []
    for s in boxes.STRATEGIES:
        rows.append({"strategy": "".join(map(str, s)),
                     "chsh": boxes.chsh_signed(boxes.deterministic_box(s))})
    values = [r["chsh"] for r in rows]
    data = {
        "strategies": rows,
        "max": max(values),
        "count_plus_2": sum(v == 2 for v in values),
    }
    box = None
    if args.box:
        box = _load_box(args.box)
        model = boxes.local_membership(box, args.tol)
        data["local"] = model is not None
        data["weights"] = None if model is None else model.weights
    return Report(data, box)


def cmd_tsirelson(args) -> Report:
    cfg = quantum_bounds.SeesawConfig(restarts=args.restarts, max_iters=args.max_iters, seed=args.seed)
    res = quantum_bounds.seesaw_maximize(cfg)
    m = res.best.state.matrix
    return Report({
        "value": res.value,
        "tsirelson": quantum_bounds.TSIRELSON,
        "state": {"re": m.real, "im": m.imag},
        "alice": [o.bloch for o in res.best.alice],
        "bob": [o.bloch for o in res.best.bob],
        "trace": res.trace,
    }, ok=abs(res.value - quantum_bounds.TSIRELSON) <= 1e-6)


def cmd_simulate(args) -> Report:
    mc = protocol.monte_carlo_box(args.n_runs, args.seed, keep_transcripts=bool(args.transcripts))
    if args.transcripts:
        with open(args.transcripts, "w") as fh:
            protocol.write_transcripts(mc.transcripts, fh)
    p, se = mc.p, mc.stderr
    data = {
        "seed": args.seed,
        "n_runs": args.n_runs,
        "trials": {f"{X},{Y}": mc.trials[X, Y] for X, Y in BIT_PAIRS},
        "p": {f"{x},{y}|{X},{Y}": p[x, y, X, Y] for X, Y in BIT_PAIRS for x, y in BIT_PAIRS},
        "stderr": {f"{x},{y}|{X},{Y}": se[x, y, X, Y] for X, Y in BIT_PAIRS for x, y in BIT_PAIRS},
        "bits_communicated": args.n_runs,
        "shared_random_bits": args.n_runs,
    }
    box = None
    if mc.observed.all():
        box = mc.box()
        data["chsh"] = boxes.chsh(box)
    return Report(data, box)


def cmd_verify_all(args) -> Report:
    results = verify_all(seed=args.seed, tol=args.tol)
    ok = all(r.passed for r in results)
    return Report({"passed": ok, "checks": [r.to_dict() for r in results]}, ok=ok)


HANDLERS = {
    "chsh-demo": cmd_chsh_demo,
    "pr-box": cmd_pr_box,
    "no-signaling": cmd_no_signaling,
    "local-bound": cmd_local_bound,
    "tsirelson": cmd_tsirelson,
    "simulate": cmd_simulate,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--n-runs", type=int, default=100_000)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")

    parser = argparse.ArgumentParser(prog="prbox", description="Process-based PR box toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chsh-demo", parents=[common], help="box, correlators and CHSH of the PR channel")
    p.add_argument("--channel", help="Channel JSON to analyse instead of the PR channel")
    p.add_argument("--write-channel", help="also write the analysed channel as JSON")
    sub.add_parser("pr-box", parents=[common], help="the ideal PR box table")
    p = sub.add_parser("no-signaling", parents=[common], help="check marginal independence")
    p.add_argument("--box", help="box JSON or CSV (default: box of the PR channel)")
    p = sub.add_parser("local-bound", parents=[common], help="CHSH over deterministic strategies")
    p.add_argument("--box", help="also test local-polytope membership of this box")
    p = sub.add_parser("tsirelson", parents=[common], help="seesaw search for the quantum CHSH maximum")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=500)
    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo CHSH run of the classical protocol")
    p.add_argument("--transcripts", help="write one JSON line per protocol run")
    sub.add_parser("verify-all", parents=[common], help="run the full invariant battery")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on bad usage
    if args.n_runs < 1 or args.tol <= 0:
        parser.error("--n-runs must be >= 1 and --tol > 0")
    try:
        report = HANDLERS[args.command](args)
        text = render(report, args.format)
    except (UsageError, OSError, ValueError) as exc:
        print(f"prbox: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
