"""Commutative semirings and dense matrices over them.

Every scalar that appears in a diagram lives in one of the semirings
defined here.  Matrices are stored dense and row major; they act on
column vectors, so composition of maps is ``second.matmul(first)``.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence


class Semiring:
    """A commutative semiring with an equality test and a conjugation.

    Conjugation defaults to the identity; the dagger of a diagram is
    purely structural, so nothing in the kernel calls ``conj``.  Rings
    whose scalars have a natural involution (complex numbers) expose it
    for callers that want conjugate-transpose checks.
    """

    name: str = "abstract"
    exact: bool = True

    @property
    def zero(self):
        raise NotImplementedError

    @property
    def one(self):
        raise NotImplementedError

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg_one(self):
        """Additive inverse of one, or None when the ring has no negatives."""
        return None

    def conj(self, a):
        return a

    def eq(self, a, b) -> bool:
        return a == b

    def fmt(self, a) -> str:
        return str(a)

    def parse(self, text: str):
        raise NotImplementedError

    def sample(self, rng) -> Any:
        raise NotImplementedError

    def sum(self, items) -> Any:
        acc = self.zero
        for x in items:
            acc = self.add(acc, x)
        return acc

    def __repr__(self) -> str:
        return f"<semiring {self.name}>"


_COMPLEX_TERM = re.compile(r"[+-]?[^+-]+")


def _parse_complex_token(tok: str) -> complex:
    tok = tok.strip()
    if tok in ("isqrt2", "+isqrt2"):
        return complex(2 ** -0.5)
    if tok == "-isqrt2":
        return complex(-(2 ** -0.5))
    if tok.endswith(("i", "j")):
        body = tok[:-1]
        if body in ("", "+", "-"):
            body += "1"
        return complex(0.0, float(Fraction(body)))
    return complex(float(Fraction(tok)))


class ComplexF64(Semiring):
    """Complex doubles with a tolerance-based equality."""

    name = "complex"
    exact = False

    def __init__(self, tol: float = 1e-9):
        self.tol = tol

    @property
    def zero(self):
        return 0j

    @property
    def one(self):
        return 1 + 0j

    def neg_one(self):
        return -1 + 0j

    def conj(self, a):
        return a.conjugate()

    def eq(self, a, b) -> bool:
        return abs(a - b) <= self.tol

    def fmt(self, a) -> str:
        re_, im = a.real, a.imag
        if abs(im) <= self.tol:
            return f"{re_:g}"
        if abs(re_) <= self.tol:
            return f"{im:g}i"
        sign = "+" if im >= 0 else "-"
        return f"{re_:g}{sign}{abs(im):g}i"

    def parse(self, text: str):
        text = text.strip().replace(" ", "")
        if not text:
            raise ValueError("empty scalar")
        total = 0j
        for term in _COMPLEX_TERM.findall(text):
            total += _parse_complex_token(term)
        return total

    def sample(self, rng):
        return complex(rng.randint(-3, 3), rng.randint(-3, 3)) / 2


class BooleanRing(Semiring):
    """Truth values with or/and; matrices over it are relations."""

    name = "bool"

    @property
    def zero(self):
        return False

    @property
    def one(self):
        return True

    def add(self, a, b):
        return a or b

    def mul(self, a, b):
        return a and b

    def fmt(self, a) -> str:
        return "1" if a else "0"

    def parse(self, text: str):
        text = text.strip().lower()
        if text in ("1", "true", "t"):
            return True
        if text in ("0", "false", "f"):
            return False
        raise ValueError(f"not a boolean scalar: {text!r}")

    def sample(self, rng):
        return rng.random() < 0.5


class NonNegF64(Semiring):
    """Non-negative doubles; no subtraction, tolerance equality."""

    name = "nonneg"
    exact = False

    def __init__(self, tol: float = 1e-9):
        self.tol = tol

    @property
    def zero(self):
        return 0.0

    @property
    def one(self):
        return 1.0

    def eq(self, a, b) -> bool:
        return abs(a - b) <= self.tol

    def fmt(self, a) -> str:
        return f"{a:g}"

    def parse(self, text: str):
        val = float(Fraction(text.strip()))
        if val < 0:
            raise ValueError("negative scalar in the non-negative ring")
        return val

    def sample(self, rng):
        return rng.randint(0, 6) / 2


class RationalRing(Semiring):
    """Exact rationals."""

    name = "rational"

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def neg_one(self):
        return Fraction(-1)

    def fmt(self, a) -> str:
        return str(a)

    def parse(self, text: str):
        return Fraction(text.strip())

    def sample(self, rng):
        return Fraction(rng.randint(-4, 4), rng.choice([1, 1, 2, 3]))


@dataclass(frozen=True)
class QS2(object):
    """Element a + b*sqrt2 where a and b are Gaussian rationals.

    Stored as four exact rationals: a = ar + ai*i, b = br + bi*i.  This
    is the smallest convenient extension in which 1/sqrt2, and hence the
    Hadamard gate, is exactly representable.
    """

    ar: Fraction = Fraction(0)
    ai: Fraction = Fraction(0)
    br: Fraction = Fraction(0)
    bi: Fraction = Fraction(0)

    def __add__(self, other: "QS2") -> "QS2":
        return QS2(self.ar + other.ar, self.ai + other.ai,
                   self.br + other.br, self.bi + other.bi)

    def __neg__(self) -> "QS2":
        return QS2(-self.ar, -self.ai, -self.br, -self.bi)

    def __sub__(self, other: "QS2") -> "QS2":
        return self + (-other)

    def __mul__(self, other: "QS2") -> "QS2":
        # (a1 + b1 s)(a2 + b2 s) = (a1 a2 + 2 b1 b2) + (a1 b2 + b1 a2) s
        a1r, a1i, b1r, b1i = self.ar, self.ai, self.br, self.bi
        a2r, a2i, b2r, b2i = other.ar, other.ai, other.br, other.bi
        ar = a1r * a2r - a1i * a2i + 2 * (b1r * b2r - b1i * b2i)
        ai = a1r * a2i + a1i * a2r + 2 * (b1r * b2i + b1i * b2r)
        br = a1r * b2r - a1i * b2i + b1r * a2r - b1i * a2i
        bi = a1r * b2i + a1i * b2r + b1r * a2i + b1i * a2r
        return QS2(ar, ai, br, bi)

    def conjugate(self) -> "QS2":
        return QS2(self.ar, -self.ai, self.br, -self.bi)

    def to_complex(self) -> complex:
        s = 2 ** 0.5
        return complex(float(self.ar) + float(self.br) * s,
                       float(self.ai) + float(self.bi) * s)

    @staticmethod
    def from_rational(q) -> "QS2":
        return QS2(Fraction(q))


ISQRT2 = QS2(br=Fraction(1, 2))


class QSqrt2iRing(Semiring):
    """Gaussian rationals extended by sqrt2; exact arithmetic."""

    name = "qsqrt2i"

    @property
    def zero(self):
        return QS2()

    @property
    def one(self):
        return QS2(ar=Fraction(1))

    def neg_one(self):
        return QS2(ar=Fraction(-1))

    def conj(self, a):
        return a.conjugate()

    def fmt(self, a) -> str:
        # four additive terms; a coefficient of one is kept explicit so
        # "1isqrt2" (meaning i*sqrt2) stays distinct from the shorthand
        # "isqrt2" (meaning 1/sqrt2)
        parts = []
        if a.ar:
            parts.append(str(a.ar))
        if a.ai:
            parts.append(f"{a.ai}i")
        if a.br:
            parts.append(f"{a.br}sqrt2")
        if a.bi:
            parts.append(f"{a.bi}isqrt2")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    def parse(self, text: str):
        text = text.strip().replace(" ", "")
        if not text:
            raise ValueError("empty scalar")
        total = QS2()
        for term in _COMPLEX_TERM.findall(text):
            total = total + self._parse_term(term)
        return total

    def _parse_term(self, term: str) -> QS2:
        sign = Fraction(1)
        if term.startswith("-"):
            sign, term = Fraction(-1), term[1:]
        elif term.startswith("+"):
            term = term[1:]
        if term == "isqrt2":
            return QS2(br=sign / 2)
        root = False
        for suffix in ("*sqrt2", "sqrt2"):
            if term.endswith(suffix):
                term, root = term[: -len(suffix)] or "1", True
                break
        imag = False
        if term.endswith("i"):
            term, imag = term[:-1] or "1", True
        coef = sign * Fraction(term)
        if root and imag:
            return QS2(bi=coef)
        if root:
            return QS2(br=coef)
        if imag:
            return QS2(ai=coef)
        return QS2(ar=coef)

    def sample(self, rng):
        return QS2(Fraction(rng.randint(-2, 2)), Fraction(rng.randint(-1, 1)),
                   Fraction(rng.randint(-2, 2), 2), Fraction(0))


COMPLEX = ComplexF64()
BOOLEAN = BooleanRing()
NONNEG = NonNegF64()
RATIONAL = RationalRing()
QSQRT2I = QSqrt2iRing()

RINGS = {r.name: r for r in (COMPLEX, BOOLEAN, NONNEG, RATIONAL, QSQRT2I)}


class SemiringMatrix:
    """Dense row-major matrix over a semiring."""

    __slots__ = ("ring", "rows", "cols", "data")

    def __init__(self, ring: Semiring, rows: int, cols: int,
                 data: Sequence[Sequence[Any]] | None = None):
        self.ring = ring
        self.rows = rows
        self.cols = cols
        if data is None:
            z = ring.zero
            self.data = [[z] * cols for _ in range(rows)]
        else:
            if len(data) != rows or any(len(r) != cols for r in data):
                raise ValueError("matrix data does not match its shape")
            self.data = [list(r) for r in data]

    @classmethod
    def identity(cls, ring: Semiring, n: int) -> "SemiringMatrix":
        m = cls(ring, n, n)
        for i in range(n):
            m.data[i][i] = ring.one
        return m

    @classmethod
    def zeros(cls, ring: Semiring, rows: int, cols: int) -> "SemiringMatrix":
        return cls(ring, rows, cols)

    @classmethod
    def from_rows(cls, ring: Semiring, rows: Sequence[Sequence[Any]]) -> "SemiringMatrix":
        return cls(ring, len(rows), len(rows[0]) if rows else 0, rows)

    @classmethod
    def scalar(cls, ring: Semiring, value) -> "SemiringMatrix":
        return cls(ring, 1, 1, [[value]])

    def __getitem__(self, rc):
        r, c = rc
        return self.data[r][c]

    def __setitem__(self, rc, value):
        r, c = rc
        self.data[r][c] = value

    def matmul(self, other: "SemiringMatrix") -> "SemiringMatrix":
        """self composed after other: (self.matmul(other))(v) = self(other(v))."""
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch: {self.rows}x{self.cols} @ "
                             f"{other.rows}x{other.cols}")
        ring = self.ring
        add, mul, zero = ring.add, ring.mul, ring.zero
        out = SemiringMatrix(ring, self.rows, other.cols)
        bt = list(zip(*other.data)) if other.data else []
        for i, row in enumerate(self.data):
            orow = out.data[i]
            for j in range(other.cols):
                col = bt[j]
                acc = zero
                for a, b in zip(row, col):
                    acc = add(acc, mul(a, b))
                orow[j] = acc
        return out

    def kron(self, other: "SemiringMatrix") -> "SemiringMatrix":
        """Kronecker product with self as the most significant factor."""
        ring = self.ring
        mul = ring.mul
        out = SemiringMatrix(ring, self.rows * other.rows, self.cols * other.cols)
        for i, row in enumerate(self.data):
            for k, orow in enumerate(other.data):
                target = out.data[i * other.rows + k]
                for j, a in enumerate(row):
                    base = j * other.cols
                    for l, b in enumerate(orow):
                        target[base + l] = mul(a, b)
        return out

    def add(self, other: "SemiringMatrix") -> "SemiringMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in add")
        ring = self.ring
        return SemiringMatrix(ring, self.rows, self.cols,
                              [[ring.add(a, b) for a, b in zip(r1, r2)]
                               for r1, r2 in zip(self.data, other.data)])

    def scalar_mul(self, s) -> "SemiringMatrix":
        ring = self.ring
        return SemiringMatrix(ring, self.rows, self.cols,
                              [[ring.mul(s, a) for a in row] for row in self.data])

    def transpose(self) -> "SemiringMatrix":
        return SemiringMatrix(self.ring, self.cols, self.rows,
                              [list(col) for col in zip(*self.data)] if self.data else [])

    def conj_transpose(self) -> "SemiringMatrix":
        ring = self.ring
        t = self.transpose()
        t.data = [[ring.conj(a) for a in row] for row in t.data]
        return t

    def equal(self, other: "SemiringMatrix") -> bool:
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        eq = self.ring.eq
        return all(eq(a, b) for r1, r2 in zip(self.data, other.data)
                   for a, b in zip(r1, r2))

    def is_zero(self) -> bool:
        eq, z = self.ring.eq, self.ring.zero
        return all(eq(a, z) for row in self.data for a in row)

    def direct_block_write(self, row_indices: Sequence[int],
                           col_indices: Sequence[int],
                           block: "SemiringMatrix", accumulate: bool = True) -> None:
        """Scatter a block into the listed row and column positions."""
        if block.rows != len(row_indices) or block.cols != len(col_indices):
            raise ValueError("block shape does not match the index lists")
        add = self.ring.add
        for bi, ri in enumerate(row_indices):
            row = self.data[ri]
            brow = block.data[bi]
            for bj, cj in enumerate(col_indices):
                row[cj] = add(row[cj], brow[bj]) if accumulate else brow[bj]

    def gather(self, row_indices: Sequence[int],
               col_indices: Sequence[int]) -> "SemiringMatrix":
        return SemiringMatrix(self.ring, len(row_indices), len(col_indices),
                              [[self.data[r][c] for c in col_indices]
                               for r in row_indices])

    def tolist(self):
        return [list(r) for r in self.data]

    def __repr__(self) -> str:
        body = "; ".join(" ".join(self.ring.fmt(a) for a in row) for row in self.data)
        return f"<{self.rows}x{self.cols} over {self.ring.name}: {body}>"


def kron_all(ring: Semiring, mats: Sequence[SemiringMatrix]) -> SemiringMatrix:
    out = SemiringMatrix.identity(ring, 1)
    for m in mats:
        out = out.kron(m)
    return out
