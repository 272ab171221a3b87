"""
Sparse multivariate polynomials with float coefficients.

A :class:`Polynomial` stores a map from exponent tuples to coefficients,
e.g. ``x1 + 2*x2^2`` in dimension 2 is ``{(1, 0): 1.0, (0, 2): 2.0}``.
Terms with a coefficient of exactly ``0.0`` are never stored.

Text format (used by the parser and the printer)::

    x1 + 2*x2^2 + x2^3 - 1*x2^4

``*`` and ``^`` are mandatory, variables are ``x1`` .. ``xn`` and whitespace
is ignored.
"""
from __future__ import annotations

import re
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

Monomial = tuple  # tuple[int, ...], one exponent per state coordinate


class ParseError(ValueError):
    """Syntax error in the polynomial text format."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _check_monomial(mono: Sequence[int], dimension: int) -> Monomial:
    mono = tuple(int(e) for e in mono)
    if len(mono) != dimension:
        raise ValueError(f"monomial {mono} does not have length {dimension}")
    if any(e < 0 for e in mono):
        raise ValueError(f"monomial {mono} has a negative exponent")
    return mono


class Polynomial:
    """Immutable sparse polynomial in ``dimension`` variables.

    Parameters
    ----------
    dimension : int
        Number of variables ``n``.
    terms : mapping, optional
        Monomial (exponent tuple) to coefficient. Zero coefficients are dropped.
    """

    __slots__ = ("_dimension", "_terms", "_hash")

    def __init__(self, dimension: int, terms: Mapping[Sequence[int], float] | None = None):
        if int(dimension) < 1:
            raise ValueError("dimension must be a positive integer")
        self._dimension = int(dimension)
        clean: dict[Monomial, float] = {}
        for mono, coeff in (terms or {}).items():
            mono = _check_monomial(mono, self._dimension)
            coeff = float(coeff)
            if coeff != 0.0:
                clean[mono] = clean.get(mono, 0.0) + coeff
                if clean[mono] == 0.0:
                    del clean[mono]
        self._terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, dimension: int) -> "Polynomial":
        return cls(dimension)

    @classmethod
    def constant(cls, dimension: int, value: float) -> "Polynomial":
        return cls(dimension, {(0,) * dimension: value})

    @classmethod
    def variable(cls, dimension: int, index: int) -> "Polynomial":
        """The coordinate function ``x_{index+1}`` (``index`` is 0-based)."""
        if not 0 <= index < dimension:
            raise IndexError(f"variable index {index} out of range for dimension {dimension}")
        mono = [0] * dimension
        mono[index] = 1
        return cls(dimension, {tuple(mono): 1.0})

    @classmethod
    def _from_clean(cls, dimension: int, terms: dict) -> "Polynomial":
        obj = cls.__new__(cls)
        obj._dimension = dimension
        obj._terms = terms
        obj._hash = None
        return obj

    # -- basic protocol ---------------------------------------------------
    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def terms(self) -> dict:
        """A copy of the term map."""
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, float]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, mono: Sequence[int]) -> float:
        return self._terms.get(tuple(mono), 0.0)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self._dimension, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._dimension == other._dimension and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._dimension, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({self._dimension}, {format_polynomial(self)!r})"

    def __str__(self) -> str:
        return format_polynomial(self)

    # -- arithmetic sugar ---------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(self._dimension, float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else add(self, other)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._from_clean(self._dimension, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else add(self, -other)

    def __rsub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else add(other, -self)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return scale(self, float(other))
        if isinstance(other, Polynomial):
            return mul(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if int(k) != k or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Polynomial.constant(self._dimension, 1.0)
        for _ in range(int(k)):
            result = mul(result, self)
        return result

    def __call__(self, point) -> float:
        return evaluate(self, point)

    def degree(self) -> int:
        return degree(self)


def _check_same_dim(p: Polynomial, q: Polynomial) -> None:
    if p.dimension != q.dimension:
        raise ValueError(f"dimension mismatch: {p.dimension} != {q.dimension}")


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    _check_same_dim(p, q)
    terms = dict(p._terms)
    for mono, coeff in q._terms.items():
        s = terms.get(mono, 0.0) + coeff
        if s == 0.0:
            terms.pop(mono, None)
        else:
            terms[mono] = s
    return Polynomial._from_clean(p.dimension, terms)


def scale(p: Polynomial, factor: float) -> Polynomial:
    if factor == 0.0:
        return Polynomial.zero(p.dimension)
    terms = {}
    for mono, coeff in p._terms.items():
        v = coeff * factor
        if v != 0.0:
            terms[mono] = v
    return Polynomial._from_clean(p.dimension, terms)


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    _check_same_dim(p, q)
    terms: dict[Monomial, float] = {}
    for m1, c1 in p._terms.items():
        for m2, c2 in q._terms.items():
            mono = tuple(a + b for a, b in zip(m1, m2))
            terms[mono] = terms.get(mono, 0.0) + c1 * c2
    return Polynomial._from_clean(p.dimension, {m: c for m, c in terms.items() if c != 0.0})


def partial(p: Polynomial, axis: int) -> Polynomial:
    """Exact partial derivative with respect to coordinate ``axis`` (0-based)."""
    if not 0 <= axis < p.dimension:
        raise IndexError(f"axis {axis} out of range for dimension {p.dimension}")
    terms = {}
    for mono, coeff in p._terms.items():
        e = mono[axis]
        if e == 0:
            continue
        new = mono[:axis] + (e - 1,) + mono[axis + 1:]
        terms[new] = terms.get(new, 0.0) + coeff * e
    return Polynomial._from_clean(p.dimension, {m: c for m, c in terms.items() if c != 0.0})


def _as_point(point, dimension: int) -> np.ndarray:
    x = np.asarray(point, dtype=float).reshape(-1)
    if x.shape[0] != dimension:
        raise ValueError(f"point has length {x.shape[0]}, expected {dimension}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite coordinates")
    return x


def evaluate(p: Polynomial, point) -> float:
    """Value of ``p`` at ``point`` by direct summation over the terms."""
    x = _as_point(point, p.dimension)
    total = 0.0
    for mono, coeff in p._terms.items():
        term = coeff
        for xi, e in zip(x, mono):
            if e:
                term *= xi ** e
        total += term
    return float(total)


def evaluate_many(p: Polynomial, points) -> np.ndarray:
    """Evaluate ``p`` at every row of ``points`` (shape ``(m, n)``)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != p.dimension:
        raise ValueError(f"points must have shape (m, {p.dimension})")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points have non-finite coordinates")
    out = np.zeros(pts.shape[0])
    for mono, coeff in p._terms.items():
        term = np.full(pts.shape[0], coeff)
        for axis, e in enumerate(mono):
            if e:
                term *= pts[:, axis] ** e
        out += term
    return out


def degree(p: Polynomial) -> int:
    """Total degree; ``-1`` for the zero polynomial."""
    if not p._terms:
        return -1
    return max(sum(m) for m in p._terms)


def _grlex_key(mono: Monomial):
    return (sum(mono), tuple(-e for e in mono))


def _format_coeff(c: float) -> str:
    s = repr(float(c))
    return s[:-2] if s.endswith(".0") else s


def format_polynomial(p: Polynomial) -> str:
    """Print ``p`` in the text format, terms in graded lexicographic order."""
    if p.is_zero():
        return "0"
    pieces = []
    for mono in sorted(p._terms, key=_grlex_key):
        coeff = p._terms[mono]
        factors = [f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(mono) if e]
        mag = abs(coeff)
        if not factors:
            body = _format_coeff(mag)
        elif mag == 1.0:
            body = "*".join(factors)
        else:
            body = "*".join([_format_coeff(mag)] + factors)
        if not pieces:
            pieces.append(("-" if coeff < 0 else "") + body)
        else:
            pieces.append(("- " if coeff < 0 else "+ ") + body)
    return " ".join(pieces)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|x(?P<var>\d+)|(?P<op>[-+*^])|(?P<bad>\S))"
)


def _tokenize(text: str, line: int):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        raw = m.group(0)
        col = m.start() + len(raw) - len(raw.lstrip()) + 1
        if m.group("bad") is not None:
            raise ParseError(f"unexpected character {m.group('bad')!r}", line, col)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), col))
        pos = m.end()
    return tokens


def parse_polynomial(text: str, dimension: int | None = None, line: int = 1) -> Polynomial:
    """Parse a polynomial in the text format.

    If ``dimension`` is None it is inferred from the largest variable index
    (at least 1).
    """
    tokens = _tokenize(text, line)
    if not tokens:
        raise ParseError("empty polynomial", line, 1)
    terms: list[tuple[float, dict[int, int]]] = []
    i = 0
    end_col = len(text.rstrip()) + 1

    def peek():
        return tokens[i] if i < len(tokens) else ("end", None, end_col)

    expect_term = True
    while True:
        sign = 1.0
        kind, val, col = peek()
        if kind == "op" and val in "+-":
            if val == "-":
                sign = -1.0
            i += 1
        elif not expect_term:
            raise ParseError(f"expected '+' or '-', got {val!r}", line, col)
        coeff = sign
        powers: dict[int, int] = {}
        while True:
            kind, val, col = peek()
            if kind == "num":
                coeff *= float(val)
                i += 1
            elif kind == "var":
                idx = int(val)
                if idx < 1:
                    raise ParseError("variables are numbered from x1", line, col)
                i += 1
                exp = 1
                if peek()[0] == "op" and peek()[1] == "^":
                    i += 1
                    kind, val, col = peek()
                    if kind != "num" or not re.fullmatch(r"\d+", val):
                        raise ParseError("exponent must be a non-negative integer", line, col)
                    exp = int(val)
                    i += 1
                powers[idx] = powers.get(idx, 0) + exp
            else:
                raise ParseError(f"expected a number or variable, got {val or 'end of input'!r}", line, col)
            kind, val, col = peek()
            if kind == "op" and val == "*":
                i += 1
                continue
            break
        terms.append((coeff, powers))
        kind, val, col = peek()
        if kind == "end":
            break
        if not (kind == "op" and val in "+-"):
            raise ParseError(f"unexpected token {val!r}", line, col)
        expect_term = False

    max_var = max((max(pw) for _, pw in terms if pw), default=1)
    if dimension is None:
        dimension = max_var
    elif max_var > dimension:
        raise ParseError(f"variable x{max_var} exceeds dimension {dimension}", line, 1)
    acc: dict[Monomial, float] = {}
    for coeff, powers in terms:
        mono = tuple(powers.get(k + 1, 0) for k in range(dimension))
        acc[mono] = acc.get(mono, 0.0) + coeff
    return Polynomial(dimension, acc)


class PolyVector:
    """An ordered tuple of ``n`` polynomials in ``n`` variables (a vector field)."""

    __slots__ = ("_components",)

    def __init__(self, components: Iterable[Polynomial]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a PolyVector needs at least one component")
        n = len(comps)
        for c in comps:
            if not isinstance(c, Polynomial):
                raise TypeError("components must be Polynomial instances")
            if c.dimension != n:
                raise ValueError(
                    f"component of dimension {c.dimension} in a {n}-dimensional vector field"
                )
        self._components = comps

    @classmethod
    def identity(cls, dimension: int) -> "PolyVector":
        return cls(Polynomial.variable(dimension, k) for k in range(dimension))

    @property
    def components(self) -> tuple:
        return self._components

    @property
    def dimension(self) -> int:
        return len(self._components)

    def __len__(self) -> int:
        return len(self._components)

    def __getitem__(self, k: int) -> Polynomial:
        return self._components[k]

    def __iter__(self):
        return iter(self._components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyVector):
            return NotImplemented
        return self._components == other._components

    def __hash__(self) -> int:
        return hash(self._components)

    def __add__(self, other: "PolyVector") -> "PolyVector":
        if not isinstance(other, PolyVector):
            return NotImplemented
        if other.dimension != self.dimension:
            raise ValueError("dimension mismatch")
        return PolyVector(add(a, b) for a, b in zip(self, other))

    def __repr__(self) -> str:
        return f"PolyVector({format_field(self)!r})"

    def degree(self) -> int:
        return max(degree(c) for c in self._components)

    def evaluate(self, point) -> np.ndarray:
        return np.array([evaluate(c, point) for c in self._components])

    def evaluate_many(self, points) -> np.ndarray:
        """Shape ``(m, n)``: row ``r`` is the field at ``points[r]``."""
        return np.column_stack([evaluate_many(c, points) for c in self._components])

    def __call__(self, point) -> np.ndarray:
        return self.evaluate(point)

    def jacobian(self, point) -> np.ndarray:
        x = _as_point(point, self.dimension)
        n = self.dimension
        return np.array([[evaluate(partial(self[k], j), x) for j in range(n)] for k in range(n)])


def parse_field(text: str) -> PolyVector:
    """Parse a vector field, one component per line (``;`` also separates).

    The dimension is the number of components.
    """
    chunks: list[tuple[str, int]] = []
    for lineno, raw in enumerate(text.splitlines() or [text], start=1):
        for part in raw.split(";"):
            if part.strip():
                chunks.append((part, lineno))
    if not chunks:
        raise ParseError("empty vector field", 1, 1)
    n = len(chunks)
    return PolyVector(parse_polynomial(part, n, line=lineno) for part, lineno in chunks)


def format_field(field: PolyVector) -> str:
    return "\n".join(format_polynomial(c) for c in field)


def field_evaluator(field: PolyVector):
    """Fast ``x -> field(x)`` closure for repeated numeric evaluation (no input checks)."""
    monos = sorted({m for comp in field for m, _ in comp.items()})
    if not monos:
        zero = np.zeros(field.dimension)
        return lambda x: zero.copy()
    index = {m: i for i, m in enumerate(monos)}
    E = np.array(monos, dtype=float)
    C = np.zeros((field.dimension, len(monos)))
    for k, comp in enumerate(field):
        for m, c in comp.items():
            C[k, index[m]] = c

    def f(x):
        return C @ np.prod(np.power(np.asarray(x, dtype=float), E), axis=1)

    return f
