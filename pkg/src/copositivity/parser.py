"""Reading signomials from text, JSON and files.

Text grammar: a signed sum of terms, each an optional coefficient followed
(optionally after '*') by a product of powers of x1, x2, ...::

    1 + x1^2 + x2^2 + x1^2*x2^2 - x1*x2
    3/4*x1^-2*x2 - 0.5 x1^(-1)

JSON form: {"n": 2, "terms": [{"e": [2, 0], "c": 1}, ...]}. Coefficients
given as integers, decimals or "p/q" strings are kept exactly as well.
"""

import json
import logging
import re
import tokenize
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .errors import InputError
from .signomial import Signomial, coefficient_to_float

logger = logging.getLogger(__name__)

Coefficient = Union[Fraction, float]

_TOKEN = re.compile(
    r"""
    (?P<space>[ \t\r\n]+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?)
  | (?P<var>x(?P<index>\d+))
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)

_VARIABLE = re.compile(r"x(\d+)$")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise InputError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup if match.lastgroup != "index" else "var"
        if kind != "space":
            tokens.append(_Token(kind, match.group(), line, pos - line_start + 1))
        else:
            for offset, char in enumerate(match.group()):
                if char == "\n":
                    line += 1
                    line_start = pos + offset + 1
        pos = match.end()
    tokens.append(_Token("end", "", line, pos - line_start + 1))
    return tokens


def _in_range(
    value: Coefficient, text: Optional[str] = None, token: Optional[_Token] = None
) -> Coefficient:
    """Reject coefficients that float arithmetic cannot represent."""
    try:
        coefficient_to_float(value)
    except InputError as e:
        line, column = (token.line, token.column) if token else (None, None)
        label = f"coefficient {text!r}" if text else "coefficient"
        raise InputError(f"{label} is out of floating-point range", line, column) from e
    return value


def _literal(text: str, token: _Token) -> Fraction:
    try:
        if "/" in text:
            numerator, denominator = text.split("/")
            value = Fraction(numerator) / Fraction(denominator)
        else:
            value = Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"invalid coefficient {text!r}", token.line, token.column) from e
    return _in_range(value, text, token)


class _TextParser:
    """Recursive descent over the token list."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _expect(self, kind: str, text: Optional[str] = None) -> _Token:
        token = self.current
        if token.kind != kind or (text is not None and token.text != text):
            wanted = text or kind
            found = token.text or "end of input"
            raise InputError(f"expected {wanted}, found {found!r}", token.line, token.column)
        return self._advance()

    def _is_op(self, text: str) -> bool:
        return self.current.kind == "op" and self.current.text == text

    def parse(self) -> List[Tuple[Dict[int, int], Fraction, _Token]]:
        terms = []
        sign = 1
        if self._is_op("+") or self._is_op("-"):
            sign = -1 if self._advance().text == "-" else 1
        while True:
            start = self.current
            coefficient, powers = self._term()
            terms.append((powers, sign * coefficient, start))
            if self.current.kind == "end":
                return terms
            if not (self._is_op("+") or self._is_op("-")):
                token = self.current
                raise InputError(
                    f"expected '+' or '-', found {token.text!r}", token.line, token.column
                )
            sign = -1 if self._advance().text == "-" else 1

    def _term(self) -> Tuple[Fraction, Dict[int, int]]:
        coefficient = Fraction(1)
        powers: Dict[int, int] = {}
        if self.current.kind == "number":
            token = self._advance()
            coefficient = _literal(token.text, token)
            if self._is_op("*"):
                self._advance()
                self._factor(powers)
            elif self.current.kind == "var":
                self._factor(powers)
            else:
                return coefficient, powers
        else:
            self._factor(powers)
        while self._is_op("*"):
            self._advance()
            self._factor(powers)
        return coefficient, powers

    def _factor(self, powers: Dict[int, int]) -> None:
        token = self._expect("var")
        index = int(token.text[1:])
        if index < 1:
            raise InputError("variables are numbered from x1", token.line, token.column)
        exponent = 1
        if self._is_op("^"):
            self._advance()
            exponent = self._exponent()
        powers[index] = powers.get(index, 0) + exponent

    def _exponent(self) -> int:
        parenthesized = self._is_op("(")
        if parenthesized:
            self._advance()
        sign = 1
        if self._is_op("-") or self._is_op("+"):
            sign = -1 if self._advance().text == "-" else 1
        token = self._expect("number")
        if not token.text.isdigit():
            raise InputError(f"exponent {token.text!r} is not an integer", token.line, token.column)
        if parenthesized:
            self._expect("op", ")")
        return sign * int(token.text)


def _build(
    terms: List[Tuple[Dict[int, int], Coefficient, Optional[_Token]]], n: Optional[int] = None
) -> Signomial:
    width = max([max(p, default=0) for p, _, _ in terms] + [n or 0, 1])
    if n is not None and width > n:
        raise InputError(f"variable x{width} exceeds n = {n}")
    collected: Dict[Tuple[int, ...], Coefficient] = {}
    for powers, coefficient, token in terms:
        exponent = tuple(powers.get(i + 1, 0) for i in range(width))
        if exponent in collected:
            line, column = (token.line, token.column) if token else (None, None)
            raise InputError(f"duplicate exponent {list(exponent)}", line, column)
        collected[exponent] = coefficient
    return Signomial.from_terms(collected, width)


def parse_text(text: str) -> Signomial:
    """Parse the text grammar; errors carry line and column."""
    if not text.strip():
        raise InputError("empty polynomial", 1, 1)
    return _build(_TextParser(text).parse())


def _json_coefficient(value: Any) -> Coefficient:
    if isinstance(value, bool):
        raise InputError("coefficient must be a number")
    if isinstance(value, int):
        return _in_range(Fraction(value))
    if isinstance(value, float):
        return _in_range(value, repr(value))
    if isinstance(value, str):
        try:
            exact = Fraction(value)
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"invalid coefficient {value!r}") from e
        return _in_range(exact, value)
    raise InputError(f"invalid coefficient {value!r}")


def from_json(data: Mapping[str, Any]) -> Signomial:
    """Build a signomial from the JSON form."""
    if not isinstance(data, Mapping) or "terms" not in data:
        raise InputError('JSON polynomial needs a "terms" list')
    n = data.get("n")
    if n is not None and (not isinstance(n, int) or n < 1):
        raise InputError('"n" must be a positive integer')
    terms = []
    for k, term in enumerate(data["terms"]):
        try:
            exponent = [int(v) for v in term["e"]]
            coefficient = _json_coefficient(term["c"])
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"term {k}: expected {{\"e\": [ints], \"c\": number}}") from e
        if n is not None and len(exponent) != n:
            raise InputError(f"term {k}: exponent has {len(exponent)} entries, expected {n}")
        terms.append(({i + 1: v for i, v in enumerate(exponent) if v}, coefficient, None))
    if not terms:
        raise InputError("polynomial has no terms")
    return _build(terms, n)


def to_json(f: Signomial) -> Dict[str, Any]:
    """The JSON form; exact coefficients are written as "p/q" strings."""
    coeffs = f.exact or f.coeffs
    return {
        "n": f.n,
        "terms": [
            {"e": list(e), "c": str(c) if isinstance(c, Fraction) else c}
            for e, c in zip(f.support.points, coeffs)
        ],
    }


def parse_expanded(text: str) -> Signomial:
    """Parse any sympy expression in x1, x2, ... (products, powers) and expand it."""
    try:
        expr = parse_expr(text, transformations=standard_transformations + (convert_xor,))
    except (SyntaxError, TypeError, ValueError, tokenize.TokenError, sp.SympifyError) as e:
        raise InputError(f"cannot parse expression: {e}") from e
    expr = sp.expand(expr)
    names = sorted(expr.free_symbols, key=lambda s: s.name)
    indices = {}
    for symbol in names:
        match = _VARIABLE.match(symbol.name)
        if match is None or int(match.group(1)) < 1:
            raise InputError(f"unknown variable {symbol.name}; use x1, x2, ...")
        indices[symbol] = int(match.group(1))

    terms = []
    for term in sp.Add.make_args(expr):
        coefficient, monomial = term.as_coeff_Mul()
        powers: Dict[int, int] = {}
        for base, exponent in monomial.as_powers_dict().items():
            if base == 1:
                continue
            if base not in indices or not exponent.is_integer:
                raise InputError(f"term {term} is not a monomial with integer exponents")
            powers[indices[base]] = int(exponent)
        if coefficient.is_Rational:
            value: Coefficient = Fraction(int(coefficient.p), int(coefficient.q))
        elif coefficient.is_Float:
            try:
                value = float(coefficient)
            except OverflowError as e:
                raise InputError("coefficient is out of floating-point range") from e
        else:
            raise InputError(f"coefficient {coefficient} is not a number")
        terms.append((powers, _in_range(value), None))
    return _build(terms)


def parse_input(source: str, expand: bool = False) -> Signomial:
    """Parse a polynomial argument.

    ``@path`` reads the file, a leading '{' selects the JSON form, a leading
    '"' a JSON string holding the text grammar; anything else is text.
    """
    source = source.strip()
    if source.startswith("@"):
        path = Path(source[1:]).expanduser()
        try:
            source = path.read_text().strip()
        except OSError as e:
            raise InputError(f"cannot read {path}: {e}") from e
        logger.debug("read polynomial from %s", path)
    if source.startswith("{") or source.startswith('"'):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as e:
            raise InputError(e.msg, e.lineno, e.colno) from e
        if isinstance(data, str):
            return parse_expanded(data) if expand else parse_text(data)
        return from_json(data)
    return parse_expanded(source) if expand else parse_text(source)
