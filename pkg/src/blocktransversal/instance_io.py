"""Text instance format and JSON certificate documents.

Instance files are line oriented; ``#`` starts a comment::

    field gf 5
    rows 3
    cols 3
    rowblock 0 : 0 1
    rowblock 1 : 2
    colblock 0 : 0 1
    colblock 1 : 2
    require rows : 1 1
    require cols : 1 1
    matrix
    1 2 0
    2 4 1
    0 1 3

A block line with nothing after the colon declares an empty block.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import __version__
from .block_theorem import (
    BlockInstance,
    Certificate,
    ConditionResult,
    PartitionError,
    Selection,
    Violation,
)
from .exact_linalg import ExactMatrix, FieldSpec, LinalgError, Scalar, make_field, parse_raw

__all__ = [
    "FORMAT_VERSION",
    "ParseError",
    "parse_instance",
    "format_instance",
    "instance_summary",
    "certificate_document",
    "conditions_document",
    "oracle_document",
    "dump_document",
    "certificate_from_document",
]

FORMAT_VERSION = "1"


@dataclass
class ParseError(ValueError):
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}: {self.message}"


def _ints(tokens: list[str], line: int, col0: int) -> list[int]:
    out = []
    for tok in tokens:
        try:
            v = int(tok)
        except ValueError:
            raise ParseError(line, col0, f"expected an integer, got {tok!r}") from None
        if v < 0:
            raise ParseError(line, col0, f"expected a nonnegative integer, got {v}")
        out.append(v)
    return out


def parse_instance(text: str) -> BlockInstance:
    """Parse the instance format into a validated :class:`BlockInstance`.

    Malformed text raises :class:`ParseError` (with 1-based line and column);
    a bad partition raises ``PartitionError`` and unequal quota sums raise
    ``QuotaMismatch``.
    """
    field: FieldSpec | None = None
    n_rows = n_cols = None
    blocks: dict[str, dict[int, list[int]]] = {"rowblock": {}, "colblock": {}}
    quotas: dict[str, list[int]] = {}
    matrix_rows: list[list[str]] = []
    matrix_lines: list[int] = []
    in_matrix = False
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        tokens = line.split()
        if in_matrix:
            matrix_rows.append(tokens)
            matrix_lines.append(lineno)
            continue
        key = tokens[0].lower()
        if key == "field":
            try:
                field = make_field(" ".join(tokens[1:]))
            except LinalgError as e:
                raise ParseError(lineno, col, f"{type(e).__name__}: {e}") from None
        elif key in ("rows", "cols"):
            if len(tokens) != 2:
                raise ParseError(lineno, col, f"'{key}' takes exactly one integer")
            (v,) = _ints(tokens[1:], lineno, col)
            if key == "rows":
                n_rows = v
            else:
                n_cols = v
        elif key in blocks:
            head, sep, tail = line.partition(":")
            if not sep:
                raise ParseError(lineno, col, f"missing ':' in {key} line")
            ids = head.split()[1:]
            if len(ids) != 1:
                raise ParseError(lineno, col, f"{key} needs exactly one block number before ':'")
            (k,) = _ints(ids, lineno, col)
            if k in blocks[key]:
                raise ParseError(lineno, col, f"{key} {k} declared twice")
            blocks[key][k] = _ints(tail.split(), lineno, len(head) + 2)
        elif key == "require":
            head, sep, tail = line.partition(":")
            which = head.split()[1:]
            if not sep or which not in (["rows"], ["cols"]):
                raise ParseError(lineno, col, "expected 'require rows : ...' or 'require cols : ...'")
            if which[0] in quotas:
                raise ParseError(lineno, col, f"quotas for {which[0]} given twice")
            quotas[which[0]] = _ints(tail.split(), lineno, len(head) + 2)
        elif key == "matrix":
            if len(tokens) != 1:
                raise ParseError(lineno, col, "'matrix' takes no arguments")
            in_matrix = True
        else:
            raise ParseError(lineno, col, f"unknown directive {tokens[0]!r}")

    end = last_line + 1
    for name, value in (("field", field), ("rows", n_rows), ("cols", n_cols)):
        if value is None:
            raise ParseError(end, 1, f"missing '{name}' line")
    for name in ("rows", "cols"):
        if name not in quotas:
            raise ParseError(end, 1, f"missing 'require {name}' line")
    if not in_matrix:
        raise ParseError(end, 1, "missing 'matrix' section")
    if n_cols == 0 and not matrix_rows:
        matrix_rows, matrix_lines = [[] for _ in range(n_rows)], [end] * n_rows
    if len(matrix_rows) != n_rows:
        raise ParseError(end, 1, f"matrix has {len(matrix_rows)} rows, expected {n_rows}")

    data = []
    for tokens, lineno in zip(matrix_rows, matrix_lines):
        if len(tokens) != n_cols:
            raise ParseError(lineno, 1, f"matrix row has {len(tokens)} entries, expected {n_cols}")
        for tok in tokens:
            try:
                data.append(parse_raw(tok, field))
            except (LinalgError, ZeroDivisionError) as e:
                raise ParseError(lineno, 1, str(e)) from None

    ordered = {}
    for key, found in blocks.items():
        if sorted(found) != list(range(len(found))):
            raise PartitionError(f"{key} numbers must run consecutively from 0, got {sorted(found)}")
        ordered[key] = [found[k] for k in range(len(found))]

    return BlockInstance(
        ExactMatrix(field, n_rows, n_cols, tuple(data)),
        ordered["rowblock"],
        ordered["colblock"],
        quotas["rows"],
        quotas["cols"],
    )


def format_instance(inst: BlockInstance, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines += [f"field {inst.G.field}", f"rows {inst.G.n_rows}", f"cols {inst.G.n_cols}"]
    for k, b in enumerate(inst.row_blocks):
        lines.append(f"rowblock {k} :" + "".join(f" {x}" for x in b))
    for k, b in enumerate(inst.col_blocks):
        lines.append(f"colblock {k} :" + "".join(f" {x}" for x in b))
    lines.append("require rows :" + "".join(f" {q}" for q in inst.row_quotas))
    lines.append("require cols :" + "".join(f" {q}" for q in inst.col_quotas))
    lines.append("matrix")
    lines += [" ".join(r) for r in inst.G.to_text_rows()]
    return "\n".join(lines) + "\n"


def instance_summary(inst: BlockInstance) -> dict:
    return {
        "field": str(inst.G.field),
        "rows": inst.G.n_rows,
        "cols": inst.G.n_cols,
        "row_blocks": inst.m,
        "col_blocks": inst.n,
        "R": inst.R,
    }


def _header(command: str, inst: BlockInstance) -> dict:
    return {
        "tool": "blocktransversal",
        "tool_version": __version__,
        "format_version": FORMAT_VERSION,
        "command": command,
        "instance": instance_summary(inst),
    }


def _body(status: str, selection: Selection | None, det: Scalar | None,
          violation: Violation | None) -> dict:
    return {
        "status": status,
        "row_blocks_selected": [list(p) for p in selection.row_picks] if selection else None,
        "col_blocks_selected": [list(p) for p in selection.col_picks] if selection else None,
        "determinant": str(det) if det is not None else None,
        "violating_row_blocks": list(violation.I) if violation else None,
        "violating_col_blocks": list(violation.K) if violation else None,
        "lhs_rank": violation.lhs if violation else None,
        "rhs_bound": violation.rhs if violation else None,
    }


def certificate_document(inst: BlockInstance, cert: Certificate) -> dict:
    status = "feasible" if cert.feasible else "infeasible"
    return _header("solve", inst) | _body(status, cert.selection, cert.determinant, cert.violation)


def conditions_document(inst: BlockInstance, result: ConditionResult) -> dict:
    status = "feasible" if result.feasible else "infeasible"
    return _header("check", inst) | _body(status, None, None, result.violation)


def oracle_document(inst: BlockInstance, selection: Selection | None, det: Scalar | None) -> dict:
    status = "feasible" if selection is not None else "infeasible"
    return _header("oracle", inst) | _body(status, selection, det, None)


def dump_document(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def certificate_from_document(doc: dict | str, field: FieldSpec) -> Certificate:
    """Rebuild a :class:`Certificate` from a solve document (dict or JSON text)."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if doc["status"] == "feasible":
        sel = Selection(doc["row_blocks_selected"], doc["col_blocks_selected"])
        return Certificate(True, selection=sel, determinant=Scalar.parse(doc["determinant"], field))
    if doc["status"] == "infeasible":
        v = Violation(tuple(doc["violating_row_blocks"]), tuple(doc["violating_col_blocks"]),
                      doc["lhs_rank"], doc["rhs_bound"])
        return Certificate(False, violation=v)
    raise ValueError(f"not a certificate document: status {doc.get('status')!r}")

