"""Small analytic expression language: parse, evaluate, differentiate, print.

Expressions describe curves r(s), marching-scale functions u, v, w(s, t) and
their building blocks. The grammar is closed::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)*
    exponent := '-'? atom                  (must fold to a constant)
    atom     := number | name | func '(' expr ')' | '(' expr ')'

Functions: sin cos sinh cosh tanh exp sqrt. Reserved constants: pi, e.
Trees are immutable and hashable; build them through the module-level
constructors (``add``, ``mul``, ...) so literal arithmetic is folded.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Optional

__all__ = [
    "Expression", "Const", "Var", "Unary", "Binary", "Pow",
    "ExprError", "ExprSyntaxError", "ExprDomainError",
    "parse", "evaluate", "derivative", "to_string", "substitute",
    "variables", "const", "var", "neg", "add", "sub", "mul", "div", "power",
    "apply", "compile_expr", "compile_many", "compile_mp", "FUNCTIONS",
]


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    """Raised by :func:`parse`; ``offset`` is a byte offset into the UTF-8 text."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ExprDomainError(ExprError):
    def __init__(self, message: str, node: "Expression"):
        super().__init__(f"{message} in '{to_string(node)}'")
        self.node = node


def _checked(fn, name):
    def wrapped(x):
        try:
            return fn(x)
        except OverflowError:
            raise ArithmeticError(f"{name} overflow")
    return wrapped


FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "sinh": _checked(math.sinh, "sinh"),
    "cosh": _checked(math.cosh, "cosh"),
    "tanh": math.tanh,
    "exp": _checked(math.exp, "exp"),
    "sqrt": math.sqrt,
}

CONSTANTS = {"pi": math.pi, "e": math.e}


class Expression:
    """Base node. Subclasses are frozen dataclasses."""

    __slots__ = ()

    def __call__(self, **bindings: float) -> float:
        return evaluate(self, bindings)

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True)
class Const(Expression):
    value: float
    name: Optional[str] = None  # 'pi' / 'e' keep their spelling when printed

    def _ev(self, env):
        return self.value


@dataclass(frozen=True)
class Var(Expression):
    name: str

    def _ev(self, env):
        return env[self.name]


@dataclass(frozen=True)
class Unary(Expression):
    op: str  # 'neg' or a key of FUNCTIONS
    arg: Expression

    def _ev(self, env):
        x = self.arg._ev(env)
        if self.op == "neg":
            return -x
        if self.op == "sqrt" and x < 0.0:
            raise ExprDomainError("sqrt of negative value", self)
        try:
            return FUNCTIONS[self.op](x)
        except (ArithmeticError, ValueError) as exc:
            raise ExprDomainError(str(exc), self) from None


@dataclass(frozen=True)
class Binary(Expression):
    op: str  # one of + - * /
    left: Expression
    right: Expression

    def _ev(self, env):
        a = self.left._ev(env)
        b = self.right._ev(env)
        op = self.op
        if op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        elif op == "*":
            r = a * b
        else:
            if b == 0.0:
                raise ExprDomainError("division by zero", self)
            r = a / b
        if not math.isfinite(r):
            raise ExprDomainError("non-finite result", self)
        return r


@dataclass(frozen=True)
class Pow(Expression):
    base: Expression
    exponent: float

    def _ev(self, env):
        x = self.base._ev(env)
        p = self.exponent
        if x < 0.0 and not float(p).is_integer():
            raise ExprDomainError("negative base with non-integer exponent", self)
        if x == 0.0 and p < 0.0:
            raise ExprDomainError("division by zero", self)
        try:
            r = x ** p
        except OverflowError:
            raise ExprDomainError("overflow", self) from None
        if not math.isfinite(r):
            raise ExprDomainError("non-finite result", self)
        return r


# ---------------------------------------------------------------------------
# constructors with literal folding


def const(value: float) -> Const:
    return Const(float(value))


def var(name: str) -> Var:
    return Var(name)


ZERO = Const(0.0)
ONE = Const(1.0)


def _is(e: Expression, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def neg(a: Expression) -> Expression:
    if isinstance(a, Const):
        return Const(-a.value)
    return Unary("neg", a)


def add(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return Binary("+", a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    return Binary("-", a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if _is(a, -1.0):
        return neg(b)
    if _is(b, -1.0):
        return neg(a)
    return Binary("*", a, b)


def div(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    if _is(a, 0.0) and not _is(b, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    return Binary("/", a, b)


def power(a: Expression, p: float) -> Expression:
    p = float(p)
    if p == 0.0:
        return ONE
    if p == 1.0:
        return a
    if isinstance(a, Const):
        try:
            v = a.value ** p
        except (OverflowError, ZeroDivisionError):
            v = None
        if isinstance(v, float) and math.isfinite(v):
            return Const(v)
    return Pow(a, p)


def apply(fn: str, a: Expression) -> Expression:
    if fn not in FUNCTIONS:
        raise ExprError(f"unknown function {fn!r}")
    return Unary(fn, a)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text: str, allowed: frozenset):
        self.text = text
        self.allowed = allowed
        self.tokens = []  # (kind, value, char offset)
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ExprSyntaxError(f"unexpected character {text[pos]!r}", self._byte(pos))
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def _byte(self, char_offset: int) -> int:
        return len(self.text[:char_offset].encode("utf-8"))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ExprSyntaxError(message, self._byte(tok[2]))

    def expect(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            shown = tok[1] or "end of input"
            raise self.error(f"expected {op!r}, found {shown!r}", tok)

    def parse(self) -> Expression:
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            e = Binary(op, e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            rhs = self.unary()
            e = Binary(op, e, rhs)
        return e

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.take()
            return neg(self.unary())
        return self.power()

    def power(self):
        e = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.peek()
            negative = False
            if tok[0] == "op" and tok[1] == "-":
                self.take()
                negative = True
            x = self.atom()
            if variables(x):
                raise self.error("exponent must be constant", tok)
            p = evaluate(x, {})
            e = Pow(e, -p if negative else p)
        return e

    def atom(self):
        tok = self.take()
        kind, value, _ = tok
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if value not in FUNCTIONS:
                    raise self.error(f"unknown function {value!r}", tok)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Unary(value, arg)
            if value in CONSTANTS:
                return Const(CONSTANTS[value], value)
            if value in FUNCTIONS:
                raise self.error(f"function {value!r} needs an argument", tok)
            if value not in self.allowed:
                raise self.error(f"undeclared variable {value!r}", tok)
            return Var(value)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect(")")
            return e
        shown = value or "end of input"
        raise self.error(f"unexpected {shown!r}", tok)


def parse(text: str, allowed_vars=("s", "t")) -> Expression:
    """Parse ``text`` into an expression over ``allowed_vars``.

    Negated literals are folded (``-2`` is the constant -2) and constant
    exponents are evaluated; nothing else is simplified, so the tree mirrors
    the written structure.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, frozenset(allowed_vars)).parse()


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: Expression, bindings: Mapping[str, float]) -> float:
    try:
        return float(e._ev(bindings))
    except KeyError as exc:
        raise ExprError(f"unbound variable {exc.args[0]!r}") from None


def variables(e: Expression) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Unary):
        return variables(e.arg)
    if isinstance(e, Binary):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Pow):
        return variables(e.base)
    return frozenset()


def substitute(e: Expression, name: str, replacement: Expression) -> Expression:
    """Replace every ``Var(name)`` in ``e`` by ``replacement``."""
    if isinstance(e, Var):
        return replacement if e.name == name else e
    if isinstance(e, Unary):
        a = substitute(e.arg, name, replacement)
        return neg(a) if e.op == "neg" else Unary(e.op, a)
    if isinstance(e, Binary):
        a = substitute(e.left, name, replacement)
        b = substitute(e.right, name, replacement)
        return _BINARY[e.op](a, b)
    if isinstance(e, Pow):
        return power(substitute(e.base, name, replacement), e.exponent)
    return e


_BINARY = {"+": add, "-": sub, "*": mul, "/": div}


# ---------------------------------------------------------------------------
# symbolic differentiation


def derivative(e: Expression, name: str) -> Expression:
    """Exact derivative of ``e`` with respect to variable ``name``."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if isinstance(e, Pow):
        da = derivative(e.base, name)
        if _is(da, 0.0):
            return ZERO
        p = e.exponent
        return mul(da, mul(Const(p), power(e.base, p - 1.0)))
    if isinstance(e, Binary):
        a, b = e.left, e.right
        da, db = derivative(a, name), derivative(b, name)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, b), mul(a, db))
        # quotient; a constant denominator keeps the simple form a'/b
        if _is(db, 0.0):
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    if isinstance(e, Unary):
        a = e.arg
        da = derivative(a, name)
        if e.op == "neg":
            return neg(da)
        if _is(da, 0.0):
            return ZERO
        if e.op == "sin":
            outer = Unary("cos", a)
        elif e.op == "cos":
            outer = neg(Unary("sin", a))
        elif e.op == "sinh":
            outer = Unary("cosh", a)
        elif e.op == "cosh":
            outer = Unary("sinh", a)
        elif e.op == "tanh":
            outer = sub(ONE, power(Unary("tanh", a), 2))
        elif e.op == "exp":
            outer = e
        elif e.op == "sqrt":
            return div(da, mul(Const(2.0), e))
        else:  # pragma: no cover - closed grammar
            raise ExprError(f"no derivative rule for {e.op}")
        return mul(da, outer)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# canonical printer

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _fmt_number(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x)) if x != 0.0 or math.copysign(1.0, x) > 0 else "-0"
    return repr(x)


def _prec(e: Expression) -> int:
    if isinstance(e, Binary):
        return _PREC_ADD if e.op in "+-" else _PREC_MUL
    if isinstance(e, Unary):
        return _PREC_NEG if e.op == "neg" else _PREC_ATOM
    if isinstance(e, Pow):
        return _PREC_POW
    if isinstance(e, Const) and e.name is None and math.copysign(1.0, e.value) < 0:
        return _PREC_NEG
    return _PREC_ATOM


def to_string(e: Expression) -> str:
    """Infix form with the fewest parentheses that re-parses to the same tree."""
    if isinstance(e, Const):
        return e.name if e.name else _fmt_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = to_string(e.arg)
            # a literal operand would fold into a constant on re-parse
            if _prec(e.arg) < _PREC_NEG or isinstance(e.arg, Const):
                inner = f"({inner})"
            return "-" + inner
        return f"{e.op}({to_string(e.arg)})"
    if isinstance(e, Pow):
        base = to_string(e.base)
        if _prec(e.base) < _PREC_POW:
            base = f"({base})"
        return f"{base}^{_fmt_number(e.exponent)}"
    if isinstance(e, Binary):
        level = _prec(e)
        left, right = to_string(e.left), to_string(e.right)
        if _prec(e.left) < level:
            left = f"({left})"
        if _prec(e.right) <= level:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# compilation to Python closures


def _safe_pow(x, p):
    if x < 0.0 and not float(p).is_integer():
        raise ValueError("negative base with non-integer exponent")
    return x ** p


def _source(e: Expression, exact_consts: bool = False) -> str:
    if isinstance(e, Const):
        if exact_consts:
            return f"_{e.name}" if e.name in ("pi", "e") else f"_mpf({e.value!r})"
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"(-{_source(e.arg, exact_consts)})"
        return f"_{e.op}({_source(e.arg, exact_consts)})"
    if isinstance(e, Pow):
        return f"_pow({_source(e.base, exact_consts)}, {e.exponent!r})"
    if isinstance(e, Binary):
        return f"({_source(e.left, exact_consts)} {e.op} {_source(e.right, exact_consts)})"
    raise TypeError(f"not an expression: {e!r}")


def compile_expr(e: Expression, args: tuple = ("s", "t")):
    """Return ``f(*args) -> float`` computing exactly what :func:`evaluate` does.

    The closure runs the same IEEE operations in the same order; on any
    arithmetic failure it re-runs the tree walk so the error names the node.
    """
    unknown = variables(e) - set(args)
    if unknown:
        raise ExprError(f"compiled expression needs {sorted(unknown)}")
    namespace = {f"_{k}": v for k, v in FUNCTIONS.items()}
    namespace["_pow"] = _safe_pow
    arglist = ", ".join(args)
    code = compile(f"def _f({arglist}):\n    return {_source(e)}\n", "<expr>", "exec")
    exec(code, namespace)
    fast = namespace["_f"]

    def f(*values):
        try:
            r = fast(*values)
            if math.isfinite(r):
                return float(r)
        except (ArithmeticError, ValueError):
            pass
        return evaluate(e, dict(zip(args, values)))

    f.expression = e
    return f


def compile_many(exprs, args: tuple = ("s", "t")):
    """One closure returning a tuple of floats, bitwise equal to compiling each
    expression separately; falls back to them on any arithmetic failure."""
    singles = tuple(compile_expr(e, args) for e in exprs)
    namespace = {f"_{k}": v for k, v in FUNCTIONS.items()}
    namespace["_pow"] = _safe_pow
    arglist = ", ".join(args)
    body = ", ".join(_source(e) for e in exprs)
    exec(compile(f"def _f({arglist}):\n    return ({body},)\n", "<expr>", "exec"), namespace)
    fast = namespace["_f"]

    def f(*values):
        try:
            r = fast(*values)
            if all(math.isfinite(x) for x in r):
                return tuple(float(x) for x in r)
        except (ArithmeticError, ValueError):
            pass
        return tuple(g(*values) for g in singles)

    return f


def compile_mp(e: Expression, args: tuple = ("s", "t")):
    """Like :func:`compile_expr` but evaluating with mpmath at the working precision.

    Named constants (pi, e) are taken at full working precision; numeric
    literals are the exact binary values of their float parse.
    """
    import mpmath

    unknown = variables(e) - set(args)
    if unknown:
        raise ExprError(f"compiled expression needs {sorted(unknown)}")
    namespace = {f"_{k}": getattr(mpmath, k) for k in FUNCTIONS}
    namespace.update(_pi=mpmath.pi, _e=mpmath.e, _mpf=mpmath.mpf, _pow=lambda x, p: x ** mpmath.mpf(p))
    arglist = ", ".join(args)
    code = compile(f"def _f({arglist}):\n    return {_source(e, True)}\n", "<expr>", "exec")
    exec(code, namespace)
    return namespace["_f"]
