"""Command line surface.

Subcommands: ``validate``, ``complexity``, ``apply``, ``thin``, ``explore``,
``gen`` and ``selftest``.  Instances and moves travel as JSON documents; see
the README for the schemas.  Exit codes are stable: 0 success, 1 domain
rejection (validation failure, rejected certificate, step cap), 2 I/O or
parse trouble.  The WIDTHCALC_SEED environment variable overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .complexity import complexity, complexity_table, index_down, index_up
from .gen import GenConfig, enumerate_moves, gen_complex
from .model import (
    SchemaError,
    body_index,
    emit_complex,
    parse_complex,
    validate,
)
from .moves import MoveRejected, apply_move, parse_move
from .search import rewrite_graph, rewrite_graph_dot, thin
from .selftest import run_all

OK, DOMAIN_ERROR, IO_ERROR = 0, 1, 2


def _say(args, *parts) -> None:
    if not args.quiet:
        print(*parts)


def _load_json(path: str):
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as err:
        raise SystemExit(_fail_io(f"cannot read {path}: {err}"))
    except json.JSONDecodeError as err:
        raise SystemExit(_fail_io(f"cannot parse {path}: {err}"))


def _fail_io(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return IO_ERROR


def _load_instance(path: str):
    try:
        return parse_complex(_load_json(path))
    except SchemaError as err:
        raise SystemExit(_fail_io(f"bad instance document {path}: {err}"))


def _write_or_print(args, doc: dict) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if getattr(args, "out", None):
        with open(args.out, "w") as handle:
            handle.write(text + "\n")
    elif not args.quiet:
        print(text)


def instance_dot(cx) -> str:
    """Instance diagram: levels and bodies with their index annotations."""
    lines = ["digraph instance {", "  rankdir=BT;"]
    for t in sorted(cx.thick.values(), key=lambda t: t.id):
        label = (f"{t.id} ({t.surface.genus},{t.surface.punctures})"
                 f"\\nIup={index_up(cx, t.id)} Idown={index_down(cx, t.id)}")
        lines.append(f'  "{t.id}" [shape=box style=bold label="{label}"];')
    for f in sorted(cx.thin.values(), key=lambda f: f.id):
        lines.append(f'  "{f.id}" [shape=box style=dashed '
                     f'label="{f.id} ({f.surface.genus},{f.surface.punctures})"];')
    for b in sorted(cx.boundary.values(), key=lambda b: b.id):
        mark = " vertex" if b.is_drilled_vertex else ""
        lines.append(f'  "{b.id}" [shape=house '
                     f'label="{b.id} ({b.surface.genus},{b.surface.punctures}{mark})"];')
    for c in sorted(cx.cbs.values(), key=lambda c: c.id):
        lines.append(f'  "{c.id}" [shape=ellipse label="{c.id} idx={body_index(cx, c.id)}"];')
        upper = cx.thick[c.plus].upper_cb == c.id
        if upper:
            lines.append(f'  "{c.plus}" -> "{c.id}";')
        else:
            lines.append(f'  "{c.id}" -> "{c.plus}";')
        for port in c.minus:
            if port in cx.thin:
                if upper:  # orientation leaves an upper body through its thin levels
                    lines.append(f'  "{c.id}" -> "{port}";')
                else:
                    lines.append(f'  "{port}" -> "{c.id}";')
            else:
                lines.append(f'  "{port}" -> "{c.id}" [dir=none style=dotted];')
    lines.append("}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    cx = _load_instance(args.instance)
    report = validate(cx)
    if report.ok:
        _say(args, "valid")
        return OK
    print(report, file=sys.stderr)
    return DOMAIN_ERROR


def cmd_complexity(args) -> int:
    cx = _load_instance(args.instance)
    report = validate(cx)
    if not report.ok:
        print(report, file=sys.stderr)
        return DOMAIN_ERROR
    if args.format == "dot":
        print(instance_dot(cx))
        return OK
    rows = complexity_table(cx)
    if not args.quiet:
        header = f"{'id':<12}{'body_up':>9}{'body_down':>11}{'I_up':>7}{'I_down':>8}{'I':>6}"
        print(header)
        for row in rows:
            print(f"{row['id']:<12}{row['body_up']:>9}{row['body_down']:>11}"
                  f"{row['index_up']:>7}{row['index_down']:>8}{row['index']:>6}")
    print(json.dumps(list(complexity(cx))))
    return OK


def cmd_apply(args) -> int:
    doc = _load_json(args.instance)
    try:
        cx = parse_complex(doc)
    except SchemaError as err:
        return _fail_io(f"bad instance document {args.instance}: {err}")
    report = validate(cx)
    if not report.ok:
        print(report, file=sys.stderr)
        return DOMAIN_ERROR
    move_docs = [_load_json(path) for path in args.move or []]
    if not move_docs:
        # instance documents may embed their move sequence
        move_docs = doc.get("moves", [])
        if not move_docs:
            return _fail_io("no moves given (--move flags or an embedded 'moves' array)")
    for n, move_doc in enumerate(move_docs):
        try:
            move = parse_move(move_doc)
        except SchemaError as err:
            return _fail_io(f"bad move document #{n}: {err}")
        before = complexity(cx)
        try:
            cx = apply_move(cx, move)
        except MoveRejected as err:
            print(f"rejected: {err}", file=sys.stderr)
            return DOMAIN_ERROR
        _say(args, f"applied {type(move).__name__.lower()}: "
                   f"{list(before)} -> {list(complexity(cx))}")
    _write_or_print(args, emit_complex(cx))
    return OK


def cmd_thin(args) -> int:
    cx = _load_instance(args.instance)
    report = validate(cx)
    if not report.ok:
        print(report, file=sys.stderr)
        return DOMAIN_ERROR
    policy = "greedy-max-drop" if args.policy == "greedy" else "first"
    final, trace = thin(cx, enumerate_moves, policy=policy, cap=args.cap)
    print(json.dumps({"start": {"digest": trace.start_digest,
                                "vector": list(trace.start_vector)}}))
    for step in trace.steps:
        print(json.dumps({"digest": step.digest, "move": step.move,
                          "vector": list(step.vector)}))
    _write_or_print(args, emit_complex(final))
    if not trace.terminal:
        print("cap reached", file=sys.stderr)
        return DOMAIN_ERROR
    return OK


def cmd_explore(args) -> int:
    cx = _load_instance(args.instance)
    report = validate(cx)
    if not report.ok:
        print(report, file=sys.stderr)
        return DOMAIN_ERROR
    graph = rewrite_graph(cx, enumerate_moves, max_nodes=args.cap)
    if args.format == "dot":
        print(rewrite_graph_dot(graph))
    else:
        print(json.dumps({
            "root": graph.root,
            "complete": graph.complete,
            "nodes": {d: list(v) for d, v in sorted(graph.vectors.items())},
            "edges": [{"from": a, "move": m, "to": b} for a, m, b in graph.edges],
            "sinks": graph.sinks(),
        }, indent=2))
    if not graph.complete:
        print("incomplete: node budget reached", file=sys.stderr)
    return OK


def cmd_gen(args) -> int:
    cfg = GenConfig(max_thick=args.max_thick, max_genus=args.max_genus,
                    max_punctures=args.max_punctures, max_ports=args.max_ports,
                    allow_boundary=not args.no_boundary, seed=args.seed)
    cx = gen_complex(cfg)
    print(f"seed: {cfg.seed}", file=sys.stderr)
    text = json.dumps(emit_complex(cx), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text + "\n")
    else:
        print(text)
    return OK


def cmd_selftest(args) -> int:
    results = run_all(fast=args.fast)
    for result in results:
        print(result.line())
    return OK if all(r.ok for r in results) else DOMAIN_ERROR


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="widthcalc",
        description="Certified rewriting calculus for leveled splittings "
                    "of (3-manifold, graph) pairs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=False):
        p.add_argument("--quiet", action="store_true", help="suppress chatty output")
        p.add_argument("--seed", type=int, default=0,
                       help="rng seed (WIDTHCALC_SEED overrides)")
        if out:
            p.add_argument("--out", help="write the resulting instance here")

    p = sub.add_parser("validate", help="check an instance document")
    p.add_argument("instance")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("complexity", help="per-level indices and the vector")
    p.add_argument("instance")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    common(p)
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("apply", help="apply move certificates in order")
    p.add_argument("instance")
    p.add_argument("--move", action="append",
                   help="move document; repeat to chain (default: the "
                        "instance's embedded 'moves' array)")
    common(p, out=True)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("thin", help="drive an instance to a locally thin form")
    p.add_argument("instance")
    p.add_argument("--policy", choices=("first", "greedy"), default="first")
    p.add_argument("--cap", type=int, default=1_000_000, help="step cap")
    common(p, out=True)
    p.set_defaults(func=cmd_thin)

    p = sub.add_parser("explore", help="expand the rewrite graph")
    p.add_argument("instance")
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("--cap", type=int, default=200, help="node budget")
    common(p)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("gen", help="emit a random valid instance")
    p.add_argument("--max-thick", type=int, default=4)
    p.add_argument("--max-genus", type=int, default=3)
    p.add_argument("--max-punctures", type=int, default=6)
    p.add_argument("--max-ports", type=int, default=3)
    p.add_argument("--no-boundary", action="store_true")
    common(p, out=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.add_argument("--fast", action="store_true", help="reduced sample counts")
    common(p)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if "WIDTHCALC_SEED" in os.environ and hasattr(args, "seed"):
        args.seed = int(os.environ["WIDTHCALC_SEED"])
    try:
        return args.func(args)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
