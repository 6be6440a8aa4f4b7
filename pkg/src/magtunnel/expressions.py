"""Small arithmetic expression language for scalar fields and curves.

Configuration files describe the magnetic field B(x1, x2) and parametric
curves x(theta), y(theta) as plain strings.  We parse them with a fixed
grammar (no eval, no user code): numbers, named variables, + - * / ^,
unary minus, and the functions exp, sin, cos, tan, tanh, sqrt, log, abs.

Expressions support numpy-vectorised evaluation, exact symbolic
differentiation, and variable substitution (used for rotating fields).
"""

from __future__ import annotations

import math
import re

import numpy as np

_FUNCS = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "tanh": np.tanh,
    "sqrt": np.sqrt,
    "log": np.log,
    "abs": np.abs,
}

_CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)


class ExpressionError(ValueError):
    pass


def _tokenize(src):
    pos, out = 0, []
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            raise ExpressionError(f"bad character in expression at: {src[pos:pos+10]!r}")
        if m.group("num") is not None:
            out.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            out.append(("name", m.group("name")))
        else:
            op = m.group("op")
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, tokens, allowed_vars):
        self.toks = tokens
        self.i = 0
        self.allowed = set(allowed_vars)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}, got {val!r}")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise ExpressionError(f"trailing input near {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            rhs = self.unary()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            # right associative, exponent may itself be signed
            return ("pow", base, self.unary())
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("num", val)
        if kind == "name":
            if self.peek() == ("op", "("):
                if val not in _FUNCS:
                    raise ExpressionError(f"unknown function {val!r}")
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return ("call", val, arg)
            if val in _CONSTANTS:
                return ("num", _CONSTANTS[val])
            if val not in self.allowed:
                raise ExpressionError(f"unknown variable {val!r} (allowed: {sorted(self.allowed)})")
            return ("var", val)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(f"unexpected token {val!r}")


def _evaluate(node, env):
    op = node[0]
    if op == "num":
        return node[1]
    if op == "var":
        return env[node[1]]
    if op == "neg":
        return -_evaluate(node[1], env)
    if op == "add":
        return _evaluate(node[1], env) + _evaluate(node[2], env)
    if op == "sub":
        return _evaluate(node[1], env) - _evaluate(node[2], env)
    if op == "mul":
        return _evaluate(node[1], env) * _evaluate(node[2], env)
    if op == "div":
        return _evaluate(node[1], env) / _evaluate(node[2], env)
    if op == "pow":
        base, expo = _evaluate(node[1], env), _evaluate(node[2], env)
        if np.isscalar(expo) and float(expo).is_integer():
            return base ** int(expo)
        return base ** expo
    if op == "call":
        return _FUNCS[node[1]](_evaluate(node[2], env))
    raise ExpressionError(f"corrupt AST node {op!r}")


def _is_num(node, value=None):
    return node[0] == "num" and (value is None or node[1] == value)


def _mul(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return ("num", 0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return ("num", a[1] * b[1])
    return ("mul", a, b)


def _add(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if _is_num(a) and _is_num(b):
        return ("num", a[1] + b[1])
    return ("add", a, b)


def _sub(a, b):
    if _is_num(b, 0.0):
        return a
    if _is_num(a) and _is_num(b):
        return ("num", a[1] - b[1])
    return ("sub", a, b)


def _diff(node, var):
    op = node[0]
    if op == "num":
        return ("num", 0.0)
    if op == "var":
        return ("num", 1.0 if node[1] == var else 0.0)
    if op == "neg":
        return ("neg", _diff(node[1], var))
    if op == "add":
        return _add(_diff(node[1], var), _diff(node[2], var))
    if op == "sub":
        return _sub(_diff(node[1], var), _diff(node[2], var))
    if op == "mul":
        a, b = node[1], node[2]
        return _add(_mul(_diff(a, var), b), _mul(a, _diff(b, var)))
    if op == "div":
        a, b = node[1], node[2]
        num = _sub(_mul(_diff(a, var), b), _mul(a, _diff(b, var)))
        return ("div", num, _mul(b, b))
    if op == "pow":
        a, b = node[1], node[2]
        da = _diff(a, var)
        if _is_num(b):
            # d(a^c) = c a^(c-1) a'
            c = b[1]
            return _mul(_mul(("num", c), ("pow", a, ("num", c - 1.0))), da)
        db = _diff(b, var)
        # a^b (b' log a + b a'/a)
        t1 = _mul(db, ("call", "log", a))
        t2 = ("div", _mul(b, da), a)
        return _mul(node, _add(t1, t2))
    if op == "call":
        fname, a = node[1], node[2]
        da = _diff(a, var)
        if fname == "exp":
            outer = node
        elif fname == "sin":
            outer = ("call", "cos", a)
        elif fname == "cos":
            outer = ("neg", ("call", "sin", a))
        elif fname == "tan":
            outer = ("div", ("num", 1.0), _mul(("call", "cos", a), ("call", "cos", a)))
        elif fname == "tanh":
            outer = _sub(("num", 1.0), _mul(node, node))
        elif fname == "sqrt":
            outer = ("div", ("num", 0.5), node)
        elif fname == "log":
            outer = ("div", ("num", 1.0), a)
        else:
            raise ExpressionError(f"cannot differentiate through {fname!r}")
        return _mul(outer, da)
    raise ExpressionError(f"corrupt AST node {op!r}")


def _substitute(node, mapping):
    op = node[0]
    if op == "num":
        return node
    if op == "var":
        return mapping.get(node[1], node)
    if op in ("neg",):
        return ("neg", _substitute(node[1], mapping))
    if op == "call":
        return ("call", node[1], _substitute(node[2], mapping))
    return (op, _substitute(node[1], mapping), _substitute(node[2], mapping))


def _format(node):
    op = node[0]
    if op == "num":
        return repr(node[1])
    if op == "var":
        return node[1]
    if op == "neg":
        return f"(-{_format(node[1])})"
    if op == "call":
        return f"{node[1]}({_format(node[2])})"
    sym = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[op]
    return f"({_format(node[1])} {sym} {_format(node[2])})"


class Expression:
    """A parsed scalar expression over a fixed set of variables."""

    def __init__(self, source, variables):
        if isinstance(source, str):
            self.ast = _Parser(_tokenize(source), variables).parse()
        else:
            self.ast = source
        self.variables = tuple(variables)

    @classmethod
    def _from_ast(cls, ast, variables):
        return cls(ast, variables)

    def __call__(self, *args):
        if len(args) != len(self.variables):
            raise ExpressionError(
                f"expected {len(self.variables)} arguments {self.variables}, got {len(args)}"
            )
        env = dict(zip(self.variables, args))
        out = _evaluate(self.ast, env)
        if np.isscalar(args[0]) if args else True:
            return out
        return np.broadcast_to(out, np.shape(args[0])).copy() if np.isscalar(out) else out

    def diff(self, var):
        if var not in self.variables:
            raise ExpressionError(f"unknown variable {var!r}")
        return Expression._from_ast(_diff(self.ast, var), self.variables)

    def substitute(self, mapping):
        """Replace variables by sub-expressions (strings or Expressions)."""
        ast_map = {}
        for name, repl in mapping.items():
            if isinstance(repl, Expression):
                ast_map[name] = repl.ast
            else:
                ast_map[name] = _Parser(_tokenize(repl), self.variables).parse()
        return Expression._from_ast(_substitute(self.ast, ast_map), self.variables)

    def __repr__(self):
        return f"Expression({_format(self.ast)!r}, vars={self.variables})"


def parse_field(source):
    """Parse a scalar field expression B(x1, x2)."""
    return Expression(source, ("x1", "x2"))


def parse_curve_component(source):
    """Parse one component of a parametric curve, theta in [0, 2*pi)."""
    return Expression(source, ("theta",))


def rotate_field(field, angle):
    """Field of the rotated configuration: B_rot(x) = B(R(-angle) x)."""
    c, s = math.cos(angle), math.sin(angle)
    x1 = Expression(f"({c!r})*x1 + ({s!r})*x2", ("x1", "x2"))
    x2 = Expression(f"({-s!r})*x1 + ({c!r})*x2", ("x1", "x2"))
    return field.substitute({"x1": x1, "x2": x2})
