"""Exact amplitudes in Q(w), w = exp(i*pi/4), and linear leaf terms over them.

Every element is stored in the basis {1, w, w^2, w^3} with rational
coordinates.  Since sqrt2 = w - w^3 is a unit of the field, the scale
exponent of the ``(a + b w + c w^2 + d w^3) / sqrt2^k`` presentation can always
be folded into the coordinates, so the stored form is unique.
"""

from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import ParseError, UnboundVariable, UndefinedConstant

Rational = Union[int, Fraction]

_W = cmath.exp(1j * math.pi / 4)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"expected a rational, got {type(x).__name__}")


class AlgebraicComplex:
    """An element ``a + b*w + c*w^2 + d*w^3`` of the cyclotomic field Q(w)."""

    __slots__ = ("_c", "_hash")

    def __init__(self, a: Rational = 0, b: Rational = 0, c: Rational = 0, d: Rational = 0):
        self._c = (_frac(a), _frac(b), _frac(c), _frac(d))
        self._hash = None

    @classmethod
    def _raw(cls, coeffs: tuple) -> AlgebraicComplex:
        obj = cls.__new__(cls)
        obj._c = coeffs
        obj._hash = None
        return obj

    @classmethod
    def from_scaled(cls, a: Rational, b: Rational, c: Rational, d: Rational, k: int) -> AlgebraicComplex:
        """Build ``(a + b w + c w^2 + d w^3) / sqrt2^k``."""
        if k < 0:
            raise ValueError("scale exponent must be non-negative")
        x = cls(a, b, c, d)
        half, odd = divmod(k, 2)
        x = x * Fraction(1, 2 ** half)
        if odd:
            x = x * INV_SQRT2
        return x

    @classmethod
    def coerce(cls, x) -> AlgebraicComplex:
        if isinstance(x, AlgebraicComplex):
            return x
        if isinstance(x, (int, Fraction)):
            return cls._raw((Fraction(x), _ZF, _ZF, _ZF))
        raise TypeError(f"cannot interpret {x!r} as an exact amplitude")

    @classmethod
    def from_real_q2(cls, p: Rational, q: Rational) -> AlgebraicComplex:
        """The real number ``p + q*sqrt2``."""
        q = _frac(q)
        return cls._raw((_frac(p), q, _ZF, -q))

    # -- accessors ---------------------------------------------------------

    @property
    def coefficients(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return self._c

    @property
    def k(self) -> int:
        return 0

    def is_zero(self) -> bool:
        return not any(self._c)

    def is_real(self) -> bool:
        a, b, c, d = self._c
        return c == 0 and b + d == 0

    def real_q2(self) -> tuple[Fraction, Fraction]:
        """Real part as ``(p, q)`` with value ``p + q*sqrt2``."""
        a, b, _, d = self._c
        return a, (b - d) / 2

    def imag_q2(self) -> tuple[Fraction, Fraction]:
        """Imaginary part as ``(p, q)`` with value ``p + q*sqrt2``."""
        _, b, c, d = self._c
        return c, (b + d) / 2

    def real_part(self) -> AlgebraicComplex:
        return AlgebraicComplex.from_real_q2(*self.real_q2())

    def imag_part(self) -> AlgebraicComplex:
        return AlgebraicComplex.from_real_q2(*self.imag_q2())

    def real_sign(self) -> int:
        """Sign of a real element (raises for non-real values)."""
        if not self.is_real():
            raise ValueError(f"{self} is not real")
        p, q = self.real_q2()
        sp = (p > 0) - (p < 0)
        sq = (q > 0) - (q < 0)
        if sp == sq or sq == 0:
            return sp
        if sp == 0:
            return sq
        # p and q have opposite signs: compare p^2 with 2 q^2
        return sp if p * p > 2 * q * q else sq

    def norm_squared(self) -> AlgebraicComplex:
        return self * self.conj()

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        try:
            o = AlgebraicComplex.coerce(other)._c
        except TypeError:
            return NotImplemented
        s = self._c
        return AlgebraicComplex._raw((s[0] + o[0], s[1] + o[1], s[2] + o[2], s[3] + o[3]))

    __radd__ = __add__

    def __neg__(self):
        a, b, c, d = self._c
        return AlgebraicComplex._raw((-a, -b, -c, -d))

    def __sub__(self, other):
        try:
            other = AlgebraicComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return AlgebraicComplex.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            a, b, c, d = self._c
            return AlgebraicComplex._raw((a * f, b * f, c * f, d * f))
        if not isinstance(other, AlgebraicComplex):
            return NotImplemented
        a0, a1, a2, a3 = self._c
        b0, b1, b2, b3 = other._c
        # reduction modulo w^4 = -1
        return AlgebraicComplex._raw((
            a0 * b0 - a1 * b3 - a2 * b2 - a3 * b1,
            a0 * b1 + a1 * b0 - a2 * b3 - a3 * b2,
            a0 * b2 + a1 * b1 + a2 * b0 - a3 * b3,
            a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0,
        ))

    __rmul__ = __mul__

    def conj(self) -> AlgebraicComplex:
        a, b, c, d = self._c
        return AlgebraicComplex._raw((a, -d, -c, -b))

    def _galois(self, k: int) -> AlgebraicComplex:
        a, b, c, d = self._c
        if k == 1:
            return self
        if k == 3:
            return AlgebraicComplex._raw((a, d, -c, b))
        if k == 5:
            return AlgebraicComplex._raw((a, -b, c, -d))
        if k == 7:
            return self.conj()
        raise ValueError(k)

    def inverse(self) -> AlgebraicComplex:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero amplitude")
        others = self._galois(3) * self._galois(5) * self._galois(7)
        norm = (self * others)._c[0]
        return others * (1 / norm)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / Fraction(other))
        if not isinstance(other, AlgebraicComplex):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return AlgebraicComplex.coerce(other) / self

    # -- comparison, hashing, display -------------------------------------

    def __eq__(self, other):
        if isinstance(other, AlgebraicComplex):
            return self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self._c == (Fraction(other), _ZF, _ZF, _ZF)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            a, b, c, d = self._c
            self._hash = hash(a) if not (b or c or d) else hash(self._c)
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def __complex__(self):
        a, b, c, d = self._c
        return complex(float(a) + float(b) * _W + float(c) * 1j + float(d) * _W ** 3)

    def sort_key(self) -> tuple:
        return self._c

    def __repr__(self):
        return f"AlgebraicComplex({', '.join(str(x) for x in self._c)})"

    def __str__(self):
        return format_amplitude(self)


_ZF = Fraction(0)
ZERO = AlgebraicComplex()
ONE = AlgebraicComplex(1)
OMEGA = AlgebraicComplex(0, 1)
I = AlgebraicComplex(0, 0, 1)
SQRT2 = AlgebraicComplex(0, 1, 0, -1)
INV_SQRT2 = AlgebraicComplex(0, Fraction(1, 2), 0, Fraction(-1, 2))


def _fmt_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _q2_parts(p: Fraction, q: Fraction, unit: str) -> list[tuple[int, str]]:
    parts = []
    suffix = f"*{unit}" if unit else ""
    if p:
        mag = _fmt_rational(abs(p))
        if unit:
            mag = unit if abs(p) == 1 else f"{mag}*{unit}"
        parts.append((1 if p > 0 else -1, mag))
    if q:
        mag = "sqrt2" if abs(q) == 1 else f"{_fmt_rational(abs(q))}*sqrt2"
        parts.append((1 if q > 0 else -1, mag + suffix))
    return parts


def format_amplitude(x: AlgebraicComplex) -> str:
    """Render in the leaf-expression grammar (parseable by :func:`parse_term`)."""
    parts = _q2_parts(*x.real_q2(), "") + _q2_parts(*x.imag_q2(), "i")
    if not parts:
        return "0"
    out = []
    for idx, (sign, text) in enumerate(parts):
        if idx == 0:
            out.append(text if sign > 0 else f"-{text}")
        else:
            out.append(f" + {text}" if sign > 0 else f" - {text}")
    return "".join(out)


AmplitudeLike = Union[AlgebraicComplex, int, Fraction]


class LinearTerm:
    """``constant + sum(coeff_v * v)`` over complex variables ``v``."""

    __slots__ = ("constant", "coeffs", "_hash")

    def __init__(self, constant: AmplitudeLike = ZERO,
                 coeffs: Mapping[str, AmplitudeLike] | Iterable[tuple[str, AmplitudeLike]] = ()):
        if isinstance(coeffs, Mapping):
            coeffs = coeffs.items()
        merged: dict[str, AlgebraicComplex] = {}
        for name, c in coeffs:
            merged[name] = merged.get(name, ZERO) + AlgebraicComplex.coerce(c)
        self.constant = AlgebraicComplex.coerce(constant)
        self.coeffs = tuple(sorted((n, c) for n, c in merged.items() if not c.is_zero()))
        self._hash = None

    @classmethod
    def _raw(cls, constant: AlgebraicComplex, coeffs: tuple) -> LinearTerm:
        obj = cls.__new__(cls)
        obj.constant = constant
        obj.coeffs = coeffs
        obj._hash = None
        return obj

    @classmethod
    def const(cls, value: AmplitudeLike) -> LinearTerm:
        return cls._raw(AlgebraicComplex.coerce(value), ())

    @classmethod
    def var(cls, name: str, coeff: AmplitudeLike = ONE) -> LinearTerm:
        return cls(ZERO, ((name, coeff),))

    @classmethod
    def coerce(cls, x) -> LinearTerm:
        if isinstance(x, LinearTerm):
            return x
        return cls.const(x)

    # -- structure ---------------------------------------------------------

    def vars(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs

    def is_zero(self) -> bool:
        return not self.coeffs and self.constant.is_zero()

    def coefficient(self, name: str) -> AlgebraicComplex:
        for n, c in self.coeffs:
            if n == name:
                return c
        return ZERO

    def as_constant(self) -> AlgebraicComplex:
        if self.coeffs:
            raise ValueError(f"term {self} is not constant")
        return self.constant

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, LinearTerm):
            try:
                other = LinearTerm.const(other)
            except TypeError:
                return NotImplemented
        if not other.coeffs:
            return LinearTerm._raw(self.constant + other.constant, self.coeffs)
        if not self.coeffs:
            return LinearTerm._raw(self.constant + other.constant, other.coeffs)
        return LinearTerm(self.constant + other.constant, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-LinearTerm.coerce(other))

    def __rsub__(self, other):
        return LinearTerm.coerce(other) - self

    def scale(self, factor: AmplitudeLike) -> LinearTerm:
        f = AlgebraicComplex.coerce(factor)
        if f.is_zero():
            return LinearTerm._raw(ZERO, ())
        return LinearTerm._raw(self.constant * f, tuple((n, c * f) for n, c in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, LinearTerm):
            if other.coeffs and self.coeffs:
                raise ValueError("product of two non-constant terms is not linear")
            if self.coeffs:
                return self.scale(other.constant)
            return other.scale(self.constant)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def substitute(self, sigma: Mapping[str, AmplitudeLike]) -> AlgebraicComplex:
        total = self.constant
        for name, c in self.coeffs:
            if name not in sigma:
                raise UnboundVariable(name)
            total = total + c * AlgebraicComplex.coerce(sigma[name])
        return total

    def partial_substitute(self, sigma: Mapping[str, AmplitudeLike]) -> LinearTerm:
        const = self.constant
        rest = []
        for name, c in self.coeffs:
            if name in sigma:
                const = const + c * AlgebraicComplex.coerce(sigma[name])
            else:
                rest.append((name, c))
        return LinearTerm._raw(const, tuple(rest))

    def rename(self, mapping: Mapping[str, str]) -> LinearTerm:
        return LinearTerm(self.constant, [(mapping.get(n, n), c) for n, c in self.coeffs])

    # -- comparison, hashing, display -------------------------------------

    def __eq__(self, other):
        if isinstance(other, LinearTerm):
            return self.constant == other.constant and self.coeffs == other.coeffs
        if isinstance(other, (AlgebraicComplex, int, Fraction)):
            return not self.coeffs and self.constant == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.constant) if not self.coeffs else hash((self.constant, self.coeffs))
        return self._hash

    def sort_key(self) -> tuple:
        return (len(self.coeffs), self.constant.sort_key(),
                tuple((n, c.sort_key()) for n, c in self.coeffs))

    def __lt__(self, other: LinearTerm) -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"LinearTerm({format_term(self)!r})"

    def __str__(self):
        return format_term(self)


def _is_rational(x: AlgebraicComplex) -> bool:
    a, b, c, d = x.coefficients
    return not (b or c or d)


def format_term(t: LinearTerm) -> str:
    pieces: list[str] = []
    if not t.constant.is_zero() or not t.coeffs:
        pieces.append(format_amplitude(t.constant))
    for name, c in t.coeffs:
        if c == 1:
            text, neg = name, False
        elif c == -1:
            text, neg = name, True
        elif _is_rational(c):
            r = c.coefficients[0]
            text, neg = f"{_fmt_rational(abs(r))}*{name}", r < 0
        else:
            text, neg = f"({format_amplitude(c)})*{name}", False
        if not pieces:
            pieces.append(f"-{text}" if neg else text)
        else:
            pieces.append(f" - {text}" if neg else f" + {text}")
    return "".join(pieces)


# -- leaf expression parser -----------------------------------------------

_NUMBER = re.compile(r"\d+(?:\.\d+)?|\.\d+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


def _tokenize(text: str, known: Iterable[str]) -> list[str]:
    known = set(known)
    tokens = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _NUMBER.match(text, pos)
        if m:
            tokens.append(m.group())
            pos = m.end()
            continue
        m = _IDENT.match(text, pos)
        if m:
            end = m.end()
            # names like "c+" or "q+-" are allowed when they are known
            best = end
            probe = end
            while probe < len(text) and text[probe] in "+-":
                probe += 1
                if text[m.start():probe] in known:
                    best = probe
            tokens.append(text[m.start():best])
            pos = best
            continue
        if ch in "+-*/()":
            tokens.append(ch)
            pos += 1
            continue
        raise ParseError(f"unexpected character {ch!r} in expression {text!r}")
    return tokens


class _ExprParser:
    def __init__(self, text: str, constants: Mapping[str, LinearTerm], variables: Iterable[str]):
        self.variables = set(variables)
        self.constants = dict(constants)
        self.tokens = _tokenize(text, list(self.constants) + list(self.variables))
        self.pos = 0
        self.text = text

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of expression {self.text!r}")
        self.pos += 1
        return tok

    def parse(self) -> LinearTerm:
        if not self.tokens:
            raise ParseError("empty expression")
        result = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input {self.peek()!r} in expression {self.text!r}")
        return result

    def expr(self) -> LinearTerm:
        acc = self.product()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.product()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def product(self) -> LinearTerm:
        acc = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op == "*":
                if acc.coeffs and rhs.coeffs:
                    raise ParseError(f"non-linear product in {self.text!r}")
                acc = acc * rhs
            else:
                if rhs.coeffs:
                    raise ParseError(f"division by a non-constant in {self.text!r}")
                if rhs.constant.is_zero():
                    raise ParseError(f"division by zero in {self.text!r}")
                acc = acc.scale(rhs.constant.inverse())
        return acc

    def unary(self) -> LinearTerm:
        tok = self.peek()
        if tok == "-":
            self.take()
            return -self.unary()
        if tok == "+":
            self.take()
            return self.unary()
        return self.atom()

    def atom(self) -> LinearTerm:
        tok = self.take()
        if tok == "(":
            inner = self.expr()
            if self.take() != ")":
                raise ParseError(f"expected ')' in {self.text!r}")
            return inner
        if _NUMBER.fullmatch(tok):
            return LinearTerm.const(Fraction(tok))
        if tok in self.constants:
            return self.constants[tok]
        if tok in self.variables:
            return LinearTerm.var(tok)
        if tok == "i":
            return LinearTerm.const(I)
        if tok == "sqrt2":
            return LinearTerm.const(SQRT2)
        if _IDENT.fullmatch(tok.rstrip("+-")):
            raise UndefinedConstant(f"undefined name {tok!r} in expression {self.text!r}")
        raise ParseError(f"unexpected token {tok!r} in expression {self.text!r}")


def parse_term(text: str, constants: Mapping[str, LinearTerm] | None = None,
               variables: Iterable[str] = ()) -> LinearTerm:
    """Parse a leaf expression: rationals, ``i``, ``sqrt2``, names, ``+ - * /``."""
    return _ExprParser(text, constants or {}, variables).parse()
