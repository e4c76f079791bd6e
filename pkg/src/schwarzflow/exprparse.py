"""Arithmetic expression trees with structural differentiation.

The grammar covers numbers, one free variable (any identifier), unary minus,
``+ - * / ^`` with ``^`` right-associative and binding tighter than unary
minus, parentheses, and the function set sin, cos, sinh, cosh, tanh, exp,
log, sqrt, abs, min, max, pospart.  Two extra functions, ``step`` and
``sign``, exist so that derivative trees of the kinked primitives stay inside
the grammar.

Evaluation accepts scalars or numpy arrays.  Differentiation is structural:
it returns a new tree, so second derivatives are just two applications.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EvalDomainError, ParseError

_UNARY_FUNCS = {
    "sin": np.sin, "cos": np.cos, "sinh": np.sinh, "cosh": np.cosh,
    "tanh": np.tanh, "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "abs": np.abs,
    "pospart": lambda x: np.maximum(x, 0.0),
    "step": lambda x: np.where(np.asarray(x) > 0, 1.0, 0.0),
    "sign": np.sign,
}
_BINARY_FUNCS = {"min": np.minimum, "max": np.maximum}
# Functions whose output can be non-finite inside the real domain.
_DOMAIN_FUNCS = {"log", "sqrt"}


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class Bin(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    func: str
    args: tuple[Node, ...]


# ---------------------------------------------------------------------------
# tokenizer / parser
# ---------------------------------------------------------------------------

_TOK_NUM = "number"
_TOK_IDENT = "identifier"
_TOK_OP = "operator"
_TOK_LP = "("
_TOK_RP = ")"
_TOK_COMMA = ","
_TOK_END = "end of input"


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    toks = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            try:
                float(text)
            except ValueError:
                raise ParseError("bad numeric literal", i, {_TOK_NUM}) from None
            toks.append((_TOK_NUM, text, i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append((_TOK_IDENT, src[i:j], i))
            i = j
        elif c in "+-*/^":
            toks.append((_TOK_OP, c, i))
            i += 1
        elif c == "(":
            toks.append((_TOK_LP, c, i))
            i += 1
        elif c == ")":
            toks.append((_TOK_RP, c, i))
            i += 1
        elif c == ",":
            toks.append((_TOK_COMMA, c, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {c!r}", i,
                             {_TOK_NUM, _TOK_IDENT, "operator", "(", ")"})
    toks.append((_TOK_END, "", n))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def advance(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind, text=None):
        k, v, off = self.peek()
        if k != kind or (text is not None and v != text):
            raise ParseError(f"unexpected {k} {v!r}", off, {text or kind})
        return self.advance()

    # expr := term (('+'|'-') term)*
    def expr(self) -> Node:
        node = self.term()
        while True:
            k, v, _ = self.peek()
            if k == _TOK_OP and v in "+-":
                self.advance()
                rhs = self.term()
                node = Bin(v, node, rhs)
            else:
                return node

    # term := unary (('*'|'/') unary)*
    def term(self) -> Node:
        node = self.unary()
        while True:
            k, v, _ = self.peek()
            if k == _TOK_OP and v in "*/":
                self.advance()
                rhs = self.unary()
                node = Bin(v, node, rhs)
            else:
                return node

    # unary := '-' unary | power   (so -r^2 parses as -(r^2))
    def unary(self) -> Node:
        k, v, _ = self.peek()
        if k == _TOK_OP and v == "-":
            self.advance()
            return Neg(self.unary())
        if k == _TOK_OP and v == "+":
            self.advance()
            return self.unary()
        return self.power()

    # power := atom ('^' unary)?   right-associative via unary recursion
    def power(self) -> Node:
        base = self.atom()
        k, v, _ = self.peek()
        if k == _TOK_OP and v == "^":
            self.advance()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Node:
        k, v, off = self.advance()
        if k == _TOK_NUM:
            return Num(float(v))
        if k == _TOK_IDENT:
            nk, _, _ = self.peek()
            if nk == _TOK_LP:
                if v not in _UNARY_FUNCS and v not in _BINARY_FUNCS:
                    raise ParseError(f"unknown function {v!r}", off,
                                     set(_UNARY_FUNCS) | set(_BINARY_FUNCS))
                self.advance()
                args = [self.expr()]
                while self.peek()[0] == _TOK_COMMA:
                    self.advance()
                    args.append(self.expr())
                self.expect(_TOK_RP)
                want = 2 if v in _BINARY_FUNCS else 1
                if len(args) != want:
                    raise ParseError(f"{v} takes {want} argument(s)", off)
                return Call(v, tuple(args))
            return Var(v)
        if k == _TOK_LP:
            node = self.expr()
            self.expect(_TOK_RP)
            return node
        raise ParseError(f"unexpected {k}", off, {_TOK_NUM, _TOK_IDENT, "("})


def parse_expression(src: str) -> Node:
    """Parse ``src`` into an expression tree.

    Raises ParseError (with byte offset and expectation set) on bad input.
    """
    p = _Parser(src)
    node = p.expr()
    k, v, off = p.peek()
    if k != _TOK_END:
        raise ParseError(f"trailing input {v!r}", off, {_TOK_END})
    return node


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def evaluate(node: Node, **env):
    """Evaluate the tree with variables bound by keyword (scalars or arrays)."""
    with np.errstate(all="ignore"):
        out = _eval(node, env)
    if not np.all(np.isfinite(out)):
        raise EvalDomainError(f"expression left its domain: {pretty(node)}")
    return out


def _eval(node: Node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise EvalDomainError(f"unbound variable {node.name!r}") from None
    if isinstance(node, Neg):
        return -_eval(node.arg, env)
    if isinstance(node, Bin):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return np.power(a, b)
    f = _UNARY_FUNCS.get(node.func)
    if f is not None:
        return f(_eval(node.args[0], env))
    return _BINARY_FUNCS[node.func](_eval(node.args[0], env), _eval(node.args[1], env))


# ---------------------------------------------------------------------------
# structural differentiation (with light constant folding)
# ---------------------------------------------------------------------------

_ZERO = Num(0.0)
_ONE = Num(1.0)


def _is_const(node: Node, value=None) -> bool:
    return isinstance(node, Num) and (value is None or node.value == value)


def _add(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return Num(a.value + b.value)
    return Bin("+", a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return Num(a.value - b.value)
    if _is_const(a, 0.0):
        return Neg(b)
    return Bin("-", a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return Num(a.value * b.value)
    return Bin("*", a, b)


def _div(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0):
        return _ZERO
    if _is_const(b, 1.0):
        return a
    return Bin("/", a, b)


def _pow(a: Node, b: Node) -> Node:
    if _is_const(b, 1.0):
        return a
    if _is_const(b, 0.0):
        return _ONE
    return Bin("^", a, b)


def differentiate(node: Node, var: str = "r") -> Node:
    """Return the derivative tree with respect to ``var``.

    Kinked primitives differentiate through ``step``/``sign`` (their own
    derivative is taken as 0, i.e. point masses at kinks are dropped).
    """
    if isinstance(node, Num):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.name == var else _ZERO
    if isinstance(node, Neg):
        d = differentiate(node.arg, var)
        return _ZERO if _is_const(d, 0.0) else Neg(d) if not _is_const(d) else Num(-d.value)
    if isinstance(node, Bin):
        a, b = node.left, node.right
        da, db = differentiate(a, var), differentiate(b, var)
        if node.op == "+":
            return _add(da, db)
        if node.op == "-":
            return _sub(da, db)
        if node.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if node.op == "/":
            return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, Num(2.0)))
        # a^b: general case via a^b * (db*log a + b*da/a); constant exponent
        # gets the power rule so profiles like r^3 stay log-free.
        if _is_const(b):
            return _mul(_mul(b, _pow(a, Num(b.value - 1.0))), da)
        term = _add(_mul(db, Call("log", (a,))), _div(_mul(b, da), a))
        return _mul(_pow(a, b), term)

    (arg,) = node.args if len(node.args) == 1 else (None,)
    if node.func in _BINARY_FUNCS:
        a, b = node.args
        da, db = differentiate(a, var), differentiate(b, var)
        pick_a = Call("step", (_sub(b, a),))  # 1 where a < b
        if node.func == "min":
            return _add(_mul(pick_a, da), _mul(_sub(_ONE, pick_a), db))
        return _add(_mul(pick_a, db), _mul(_sub(_ONE, pick_a), da))
    da = differentiate(arg, var)
    table = {
        "sin": lambda u: Call("cos", (u,)),
        "cos": lambda u: Neg(Call("sin", (u,))),
        "sinh": lambda u: Call("cosh", (u,)),
        "cosh": lambda u: Call("sinh", (u,)),
        "tanh": lambda u: _sub(_ONE, _pow(Call("tanh", (u,)), Num(2.0))),
        "exp": lambda u: Call("exp", (u,)),
        "log": lambda u: _div(_ONE, u),
        "sqrt": lambda u: _div(_ONE, _mul(Num(2.0), Call("sqrt", (u,)))),
        "abs": lambda u: Call("sign", (u,)),
        "pospart": lambda u: Call("step", (u,)),
        "step": lambda u: _ZERO,
        "sign": lambda u: _ZERO,
    }
    outer = table[node.func](arg)
    return _mul(outer, da)


# ---------------------------------------------------------------------------
# pretty-printing (minimal parentheses; fixed point under parse)
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def pretty(node: Node) -> str:
    return _pretty(node)[0]


def _pretty(node: Node) -> tuple[str, int]:
    if isinstance(node, Num):
        v = node.value
        if v == int(v) and abs(v) < 1e16:
            s = str(int(v))
        else:
            s = repr(v)
        if v < 0:
            return s, _PREC["neg"]
        return s, _PREC["atom"]
    if isinstance(node, Var):
        return node.name, _PREC["atom"]
    if isinstance(node, Neg):
        s, p = _pretty(node.arg)
        if p < _PREC["neg"]:
            s = f"({s})"
        return f"-{s}", _PREC["neg"]
    if isinstance(node, Bin):
        op = node.op
        prec = _PREC[op]
        ls, lp = _pretty(node.left)
        rs, rp = _pretty(node.right)
        if op == "^":
            # right-associative; base must outrank ^, exponent may equal it
            if lp <= prec:
                ls = f"({ls})"
            if rp < _PREC["neg"]:
                rs = f"({rs})"
            return f"{ls}^{rs}", prec
        if lp < prec:
            ls = f"({ls})"
        # '-' and '/' are left-associative: a - (b - c) needs parens
        if rp < prec or (rp == prec and op in "-/"):
            rs = f"({rs})"
        return f"{ls} {op} {rs}", prec
    args = ", ".join(_pretty(a)[0] for a in node.args)
    return f"{node.func}({args})", _PREC["atom"]
