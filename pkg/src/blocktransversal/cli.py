"""Command-line entry point.

Exit codes: 0 feasible / all checks pass, 1 infeasible / violation found,
2 usage or input error, 3 a size guard was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .block_theorem import (
    BRUTE_FORCE_LIMIT,
    PartitionError,
    QuotaMismatch,
    SearchSpaceTooLarge,
    TooManyBlocks,
    brute_force_solve,
    check_conditions,
    extract_witness,
    random_instance,
)
from .exact_linalg import LinalgError, determinant, make_field, submatrix
from .instance_io import (
    FORMAT_VERSION,
    ParseError,
    certificate_document,
    conditions_document,
    dump_document,
    format_instance,
    instance_summary,
    oracle_document,
    parse_instance,
)
from .matroid_core import (
    GroundTooLarge,
    kung_oracle,
    verify_bimatroid_axioms,
    verify_matroid_axioms,
    verify_rank_exchange,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _error(kind: str, message: str, **extra) -> str:
    doc = {"status": "error", "error": kind, "message": message} | extra
    return json.dumps(doc, indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="blocktransversal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version",
                   version=f"blocktransversal {__version__} (instance/certificate format {FORMAT_VERSION})")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="evaluate the rank conditions only")
    c.add_argument("file")
    s = sub.add_parser("solve", help="decide and emit a witness or violation certificate")
    s.add_argument("file")
    o = sub.add_parser("oracle", help="exhaustive search for a nonsingular selection")
    o.add_argument("file")
    o.add_argument("--limit", type=int, default=BRUTE_FORCE_LIMIT,
                   help="maximum number of candidate selections (default %(default)s)")
    a = sub.add_parser("axioms", help="check matroid, bimatroid and rank-exchange axioms for the matrix")
    a.add_argument("file")
    a.add_argument("--sampled", type=int, metavar="COUNT")
    a.add_argument("--seed", type=int)
    g = sub.add_parser("gen", help="write a random instance file")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--field", required=True, help="'gf <p>', 'gf<p>' or 'rational'")
    g.add_argument("--max-rows", type=int, default=6)
    g.add_argument("--max-cols", type=int, default=6)
    g.add_argument("--row-blocks", type=int, default=3)
    g.add_argument("--col-blocks", type=int, default=3)
    g.add_argument("--out", required=True, help="output path, or '-' for stdout")
    return p


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise _Usage(f"cannot read {path}: {e.strerror}") from None
    return parse_instance(text)


def _cmd_check(args, out) -> int:
    inst = _load(args.file)
    res = check_conditions(inst)
    out.write(dump_document(conditions_document(inst, res)))
    return EXIT_OK if res.feasible else EXIT_VIOLATION


def _cmd_solve(args, out) -> int:
    inst = _load(args.file)
    cert = extract_witness(inst)
    out.write(dump_document(certificate_document(inst, cert)))
    return EXIT_OK if cert.feasible else EXIT_VIOLATION


def _cmd_oracle(args, out) -> int:
    inst = _load(args.file)
    sel = brute_force_solve(inst, limit=args.limit)
    det = determinant(submatrix(inst.G, sel.rows, sel.cols)) if sel else None
    out.write(dump_document(oracle_document(inst, sel, det)))
    return EXIT_OK if sel is not None else EXIT_VIOLATION


def _cmd_axioms(args, out) -> int:
    if (args.sampled is None) != (args.seed is None):
        raise _Usage("--sampled and --seed must be given together")
    inst = _load(args.file)
    G = inst.G
    kw = {"sampled": args.sampled, "seed": args.seed}
    reports = [
        verify_matroid_axioms(kung_oracle(G), **kw),
        verify_bimatroid_axioms(G, **kw),
        verify_rank_exchange(G, **kw),
    ]
    passed = all(r.passed for r in reports)
    doc = {
        "tool": "blocktransversal",
        "tool_version": __version__,
        "format_version": FORMAT_VERSION,
        "command": "axioms",
        "instance": instance_summary(inst),
        "status": "pass" if passed else "violation",
        "reports": [r.as_dict() for r in reports],
    }
    out.write(dump_document(doc))
    return EXIT_OK if passed else EXIT_VIOLATION


def _cmd_gen(args, out) -> int:
    desc = args.field
    if desc.lower().startswith("gf") and desc[2:3].isdigit():
        desc = f"gf {desc[2:]}"
    field = make_field(desc)
    inst = random_instance(args.seed, field, args.max_rows, args.max_cols,
                           args.row_blocks, args.col_blocks)
    text = format_instance(inst, comment=f"generated by blocktransversal {__version__}, seed {args.seed}")
    if args.out == "-":
        out.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


COMMANDS = {
    "check": _cmd_check,
    "solve": _cmd_solve,
    "oracle": _cmd_oracle,
    "axioms": _cmd_axioms,
    "gen": _cmd_gen,
}


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except _Usage as e:
        err.write(_error("usage", str(e)))
    except ParseError as e:
        err.write(_error("parse", e.message, line=e.line, column=e.column))
    except (PartitionError, QuotaMismatch) as e:
        err.write(_error(type(e).__name__, str(e)))
    except (SearchSpaceTooLarge, TooManyBlocks, GroundTooLarge) as e:
        err.write(_error(type(e).__name__, str(e)))
        return EXIT_GUARD
    except (LinalgError, ValueError) as e:
        err.write(_error(type(e).__name__, str(e)))
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
