"""Exact field arithmetic and exact rank/determinant.

Two fields are supported: prime fields GF(p) with ``p < 2**31`` and the
rationals.  Matrix entries are stored as raw field values (``int`` residues
or :class:`fractions.Fraction`) and wrapped in :class:`Scalar` only at the
API boundary.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "LinalgError",
    "NotPrime",
    "OutOfRange",
    "FieldMismatch",
    "IndexOutOfRange",
    "NotSquare",
    "FieldSpec",
    "Scalar",
    "ExactMatrix",
    "make_field",
    "is_prime",
    "submatrix",
    "rank",
    "determinant",
    "is_nonsingular",
    "transpose",
]

PRIME_LIMIT = 2**31

Raw = Union[int, Fraction]


class LinalgError(ValueError):
    pass


class NotPrime(LinalgError):
    pass


class OutOfRange(LinalgError):
    pass


class FieldMismatch(LinalgError):
    pass


class IndexOutOfRange(LinalgError, IndexError):
    pass


class NotSquare(LinalgError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n below 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Either ``FieldSpec("prime", p)`` or ``FieldSpec("rational")``."""

    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind == "prime":
            if not isinstance(self.p, int) or isinstance(self.p, bool):
                raise NotPrime(f"characteristic must be an integer, got {self.p!r}")
            if self.p >= PRIME_LIMIT:
                raise OutOfRange(f"p = {self.p} must be below 2^31")
            if not is_prime(self.p):
                raise NotPrime(f"{self.p} is not prime")
        elif self.kind == "rational":
            if self.p is not None:
                raise LinalgError("the rational field takes no characteristic")
        else:
            raise LinalgError(f"unknown field kind {self.kind!r}")

    @classmethod
    def prime_field(cls, p: int) -> FieldSpec:
        return cls("prime", p)

    @classmethod
    def rational(cls) -> FieldSpec:
        return cls("rational")

    @property
    def is_prime_field(self) -> bool:
        return self.kind == "prime"

    def __str__(self) -> str:
        return f"gf {self.p}" if self.is_prime_field else "rational"

    def coerce(self, value) -> Raw:
        """Map an int, Fraction, str or Scalar into this field's raw form."""
        if isinstance(value, Scalar):
            if value.field != self:
                raise FieldMismatch(f"scalar over {value.field} used in {self}")
            return value.value
        if isinstance(value, str):
            return parse_raw(value, self)
        if isinstance(value, bool):
            value = int(value)
        if self.is_prime_field:
            if isinstance(value, Fraction):
                num, den = value.numerator % self.p, value.denominator % self.p
                if den == 0:
                    raise ZeroDivisionError(f"{value} has no image in GF({self.p})")
                return num * pow(den, -1, self.p) % self.p
            if isinstance(value, int):
                return value % self.p
        else:
            if isinstance(value, (int, Fraction)):
                return Fraction(value)
        raise TypeError(f"cannot interpret {value!r} as an element of {self}")

    def zero(self) -> Raw:
        return 0 if self.is_prime_field else Fraction(0)

    def one(self) -> Raw:
        return 1 if self.is_prime_field else Fraction(1)


_GF_RE = re.compile(r"^\s*gf\s*:?\s*(\d+)\s*$", re.IGNORECASE)


def make_field(descriptor: str) -> FieldSpec:
    """Parse ``"gf <p>"`` or ``"rational"`` into a validated :class:`FieldSpec`.

    >>> make_field("gf 5")
    FieldSpec(kind='prime', p=5)
    """
    if descriptor.strip().lower() == "rational":
        return FieldSpec.rational()
    m = _GF_RE.match(descriptor)
    if m is None:
        raise LinalgError(f"bad field descriptor {descriptor!r}; expected 'gf <p>' or 'rational'")
    return FieldSpec.prime_field(int(m.group(1)))


_INT_RE = re.compile(r"^[+-]?\d+$")
_FRAC_RE = re.compile(r"^([+-]?\d+)/(\d+)$")


def parse_raw(text: str, field: FieldSpec) -> Raw:
    text = text.strip()
    if _INT_RE.match(text):
        return field.coerce(int(text))
    m = _FRAC_RE.match(text)
    if m and not field.is_prime_field:
        den = int(m.group(2))
        if den == 0:
            raise LinalgError(f"zero denominator in {text!r}")
        return Fraction(int(m.group(1)), den)
    raise LinalgError(f"cannot parse {text!r} as an element of {field}")


def format_raw(value: Raw, field: FieldSpec) -> str:
    if field.is_prime_field:
        return str(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Scalar:
    """An element of a :class:`FieldSpec`; arithmetic across fields is rejected."""

    value: Raw
    field: FieldSpec

    def __post_init__(self):
        object.__setattr__(self, "value", self.field.coerce(self.value))

    @classmethod
    def parse(cls, text: str, field: FieldSpec) -> Scalar:
        return cls(parse_raw(text, field), field)

    def _other(self, other) -> Raw:
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise FieldMismatch(f"cannot combine {self.field} with {other.field}")
            return other.value
        if isinstance(other, int):
            return self.field.coerce(other)
        return NotImplemented

    def _wrap(self, raw: Raw) -> Scalar:
        if self.field.is_prime_field:
            raw %= self.field.p
        return Scalar(raw, self.field)

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value - o)

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(o - self.value)

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.value)

    def inverse(self) -> Scalar:
        if self.is_zero():
            raise ZeroDivisionError("zero has no inverse")
        if self.field.is_prime_field:
            return self._wrap(pow(self.value, -1, self.field.p))
        return self._wrap(1 / self.value)

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self * Scalar(o, self.field).inverse()

    def is_zero(self) -> bool:
        return self.value == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, Scalar):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == self.field.coerce(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.field))

    def __str__(self) -> str:
        return format_raw(self.value, self.field)


@dataclass(frozen=True)
class ExactMatrix:
    """Dense immutable matrix over a :class:`FieldSpec`.

    ``data`` holds raw field values in row-major order.  Row indices are
    ``0..n_rows-1`` and column indices ``0..n_cols-1``.
    """

    field: FieldSpec
    n_rows: int
    n_cols: int
    data: tuple

    def __post_init__(self):
        if self.n_rows < 0 or self.n_cols < 0:
            raise LinalgError("dimensions must be nonnegative")
        data = tuple(self.field.coerce(x) for x in self.data)
        if len(data) != self.n_rows * self.n_cols:
            raise LinalgError(
                f"{len(data)} entries given for a {self.n_rows}x{self.n_cols} matrix"
            )
        object.__setattr__(self, "data", data)

    @classmethod
    def from_rows(cls, field: FieldSpec, rows: Sequence[Sequence], n_cols: int | None = None):
        rows = [list(r) for r in rows]
        if n_cols is None:
            n_cols = len(rows[0]) if rows else 0
        for i, r in enumerate(rows):
            if len(r) != n_cols:
                raise LinalgError(f"row {i} has {len(r)} entries, expected {n_cols}")
        return cls(field, len(rows), n_cols, tuple(x for r in rows for x in r))

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> ExactMatrix:
        return cls.from_rows(field, [[int(i == j) for j in range(n)] for i in range(n)], n)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def entries(self) -> list[Scalar]:
        return [Scalar(x, self.field) for x in self.data]

    def raw_rows(self) -> list[list[Raw]]:
        c = self.n_cols
        return [list(self.data[i * c:(i + 1) * c]) for i in range(self.n_rows)]

    def __getitem__(self, ij: tuple[int, int]) -> Scalar:
        i, j = ij
        if not (0 <= i < self.n_rows and 0 <= j < self.n_cols):
            raise IndexOutOfRange(f"entry ({i}, {j}) outside {self.n_rows}x{self.n_cols}")
        return Scalar(self.data[i * self.n_cols + j], self.field)

    def to_text_rows(self) -> list[list[str]]:
        return [[format_raw(x, self.field) for x in r] for r in self.raw_rows()]


def _check_indices(indices: Iterable[int], bound: int, what: str) -> list[int]:
    out = sorted(set(indices))
    for i in out:
        if not 0 <= i < bound:
            raise IndexOutOfRange(f"{what} index {i} out of range for dimension {bound}")
    return out


def submatrix(M: ExactMatrix, rows: Iterable[int], cols: Iterable[int]) -> ExactMatrix:
    """``M(rows, cols)`` with both index sets taken in ascending order."""
    rows = _check_indices(rows, M.n_rows, "row")
    cols = _check_indices(cols, M.n_cols, "column")
    c = M.n_cols
    data = tuple(M.data[i * c + j] for i in rows for j in cols)
    return ExactMatrix(M.field, len(rows), len(cols), data)


def transpose(M: ExactMatrix) -> ExactMatrix:
    c = M.n_cols
    data = tuple(M.data[i * c + j] for j in range(M.n_cols) for i in range(M.n_rows))
    return ExactMatrix(M.field, M.n_cols, M.n_rows, data)


# --- elimination kernels -------------------------------------------------


def _rank_mod_p(rows: list[list[int]], p: int) -> int:
    if not rows or not rows[0]:
        return 0
    a = [r[:] for r in rows]
    m, n = len(a), len(a[0])
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], -1, p)
        prow = [x * inv % p for x in a[r]]
        a[r] = prow
        for i in range(r + 1, m):
            f = a[i][c]
            if f:
                ai = a[i]
                a[i] = [(x - f * y) % p for x, y in zip(ai, prow)]
        r += 1
        if r == m:
            break
    return r


def _det_mod_p(rows: list[list[int]], p: int) -> int:
    a = [r[:] for r in rows]
    n = len(a)
    det = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c] % p
        inv = pow(a[c][c], -1, p)
        for i in range(c + 1, n):
            f = a[i][c] * inv % p
            if f:
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[c])]
    return det % p


def _clear_denominators(rows: list[list[Fraction]]) -> tuple[list[list[int]], int]:
    """Scale each row to integers; returns the rows and the product of scale factors."""
    out, scale = [], 1
    for r in rows:
        d = math.lcm(*(x.denominator for x in r)) if r else 1
        out.append([int(x * d) for x in r])
        scale *= d
    return out, scale


def _bareiss(a: list[list[int]], want_det: bool) -> tuple[int, int]:
    """Fraction-free elimination in place; returns (rank, signed last pivot).

    Every intermediate entry is a minor of the input, so the division by the
    previous pivot is exact.  For a square nonsingular input the final pivot
    times the swap sign is the determinant.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    prev, sign, r = 1, 1, 0
    for c in range(n):
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            if want_det:
                return r, 0
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
            sign = -sign
        pr = a[r]
        pv = pr[c]
        for i in range(r + 1, m):
            ai = a[i]
            f = ai[c]
            a[i] = [(pv * x - f * y) // prev for x, y in zip(ai, pr)]
        prev = pv
        r += 1
        if r == m:
            break
    return r, sign * prev if r else 0


def rank(M: ExactMatrix) -> int:
    """Exact rank; any matrix with no rows or no columns has rank 0."""
    if M.n_rows == 0 or M.n_cols == 0:
        return 0
    rows = M.raw_rows()
    if M.field.is_prime_field:
        return _rank_mod_p(rows, M.field.p)
    ints, _ = _clear_denominators(rows)
    return _bareiss(ints, want_det=False)[0]


def _require_square(M: ExactMatrix) -> None:
    if M.n_rows != M.n_cols:
        raise NotSquare(f"{M.n_rows}x{M.n_cols} matrix is not square")


def determinant(M: ExactMatrix) -> Scalar:
    """Exact determinant; the 0x0 matrix has determinant 1."""
    _require_square(M)
    if M.n_rows == 0:
        return Scalar(1, M.field)
    rows = M.raw_rows()
    if M.field.is_prime_field:
        return Scalar(_det_mod_p(rows, M.field.p), M.field)
    ints, scale = _clear_denominators(rows)
    r, last = _bareiss(ints, want_det=True)
    if r < M.n_rows:
        return Scalar(0, M.field)
    return Scalar(Fraction(last, scale), M.field)


def is_nonsingular(M: ExactMatrix) -> bool:
    _require_square(M)
    return rank(M) == M.n_rows
