"""Exact-ish twist amplitudes.

The amplitudes of interest such as ``1/ln(2)`` are irrational, but the
quantity the analysis actually uses is the multiplier ``mu = exp(1/alpha)``,
which is then an exact integer.  :func:`parse_alpha` evaluates a small
expression grammar at 50 decimal digits, stores alpha as a double-double and
recovers ``mu`` as an exact rational whenever it is one.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := NUMBER | ("ln" | "log") "(" expr ")" | "(" expr ")" | "-" factor
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(ln|log)|(.))")


@dataclass(frozen=True)
class Alpha:
    hi: float
    lo: float = 0.0
    text: str = ""
    mu_exact: Fraction | None = None

    @property
    def value(self) -> float:
        return self.hi

    @property
    def mu(self) -> float:
        if self.mu_exact is not None:
            return float(self.mu_exact)
        return float(mpmath.exp(1 / (mpmath.mpf(self.hi) + mpmath.mpf(self.lo))))

    def __float__(self) -> float:
        return self.hi

    def __str__(self) -> str:
        return self.text or repr(self.hi)


def _tokenize(text):
    out = []
    for number, func, other in _TOKEN.findall(text):
        if number:
            out.append(("num", number))
        elif func:
            out.append(("fn", func))
        elif other.strip():
            out.append(("op", other))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.pos = 0
        self.text = text

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ValueError(f"cannot parse alpha expression {self.text!r}")
        self.pos += 1
        return tok

    def expr(self):
        v = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self):
        v = self.factor()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.factor()
            if op == "/" and rhs == 0:
                raise ValueError(f"division by zero in {self.text!r}")
            v = v * rhs if op == "*" else v / rhs
        return v

    def factor(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return mpmath.mpf(Fraction(val).numerator) / Fraction(val).denominator
        if kind == "fn":
            self.take()
            self.take("op", "(")
            arg = self.expr()
            self.take("op", ")")
            if arg <= 0:
                raise ValueError(f"logarithm of non-positive value in {self.text!r}")
            return mpmath.log(arg)
        if (kind, val) == ("op", "("):
            self.take()
            v = self.expr()
            self.take("op", ")")
            return v
        if (kind, val) == ("op", "-"):
            self.take()
            return -self.factor()
        raise ValueError(f"cannot parse alpha expression {self.text!r}")


def parse_alpha(text: str | float | Alpha) -> Alpha:
    """Parse ``"1/ln(2)"``, ``"0.5"``, ``"1/3"`` ... into an :class:`Alpha`."""
    if isinstance(text, Alpha):
        return text
    if isinstance(text, (int, float)):
        return from_float(float(text))
    with mpmath.workdps(50):
        p = _Parser(str(text))
        v = p.expr()
        if p.pos != len(p.toks):
            raise ValueError(f"trailing input in alpha expression {text!r}")
        if v <= 0:
            raise ValueError(f"alpha must be positive, got {text!r}")
        hi = float(v)
        lo = float(v - mpmath.mpf(hi))
        mu = mpmath.exp(1 / v)
        mu_exact = _as_small_rational(mu)
    return Alpha(hi, lo, str(text).strip(), mu_exact)


def from_float(x: float) -> Alpha:
    if not x > 0:
        raise ValueError(f"alpha must be positive, got {x!r}")
    return Alpha(float(x), 0.0, repr(float(x)), None)


def from_mu(mu: Fraction | int | str) -> Alpha:
    """The amplitude ``1/ln(mu)`` for an exact rational multiplier."""
    q = Fraction(mu)
    if q <= 1:
        raise ValueError("mu must exceed 1")
    return parse_alpha(f"1/ln({q.numerator}/{q.denominator})" if q.denominator != 1 else f"1/ln({q.numerator})")


def _as_small_rational(x, max_den=1000):
    if not mpmath.isfinite(x) or x > 1e12:
        return None
    q = Fraction(str(mpmath.nstr(x, 45))).limit_denominator(max_den)
    if abs(mpmath.mpf(q.numerator) / q.denominator - x) < mpmath.mpf(10) ** -35:
        return q
    return None
