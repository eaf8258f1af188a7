"""
迷你语言解析器
把命令行中的表达式解析为 ε-网、光滑函数、分布以及双变量核
"""

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..services.asymptotics import EPS, Net
from ..services.distributions import (
    PRINCIPAL_VALUE,
    ZERO_DIST,
    Distribution,
    delta,
    heaviside,
    regular,
)
from ..services.plots import (
    KERNEL_FUNCTIONS,
    KApply,
    KConst,
    Kernel,
    KPow,
    KProd,
    KQuot,
    KSum,
    KVar,
    kernel_neg,
)
from ..services.smoothfn import (
    BUMP,
    COS,
    EXP,
    ID,
    SIN,
    SMOOTHSTEP,
    Const,
    IntPow,
    SmoothFn,
    add,
    compose,
    mul,
)
from ..utils.exceptions import GFCalcException, ParseException

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*'*)"
    r"|(?P<op>\*\*|[-+*/^(),=]))"
)

_CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            raise ParseException(f"无法识别的字符 {text[pos:pos + 1]!r}", text, pos)
        kind = match.lastgroup or "op"
        value = match.group(kind)
        start = match.start(kind)
        tokens.append(Token(kind, "^" if value == "**" else value, start))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# ============================================================
# 语法树
# ============================================================


@dataclass(frozen=True)
class Node:
    pos: int


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Name(Node):
    ident: str


@dataclass(frozen=True)
class Neg(Node):
    operand: Node


@dataclass(frozen=True)
class Bin(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    func: str
    args: Tuple[Node, ...]
    kwargs: Dict[str, Node] = field(default_factory=dict, hash=False, compare=False)


class _Parser:
    """递归下降：expr := term (± term)*，term := unary (*|/ unary)*，unary := -unary | power，power := atom (^ unary)?"""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def _expect(self, text: str) -> Token:
        if self.current.text != text:
            found = self.current.text or "输入结束"
            raise ParseException(f"期望 '{text}'，遇到 '{found}'", self.text, self.current.pos)
        return self._advance()

    def parse(self) -> Node:
        if self.current.kind == "end":
            raise ParseException("空表达式", self.text, 0)
        node = self._expr()
        if self.current.kind != "end":
            raise ParseException(f"多余的符号 '{self.current.text}'", self.text, self.current.pos)
        return node

    def _expr(self) -> Node:
        node = self._term()
        while self.current.text in ("+", "-"):
            op = self._advance()
            node = Bin(op.pos, op.text, node, self._term())
        return node

    def _term(self) -> Node:
        node = self._unary()
        while self.current.text in ("*", "/"):
            op = self._advance()
            node = Bin(op.pos, op.text, node, self._unary())
        return node

    def _unary(self) -> Node:
        if self.current.text == "-":
            op = self._advance()
            return Neg(op.pos, self._unary())
        if self.current.text == "+":
            self._advance()
            return self._unary()
        return self._power()

    def _power(self) -> Node:
        base = self._atom()
        if self.current.text == "^":
            op = self._advance()
            return Bin(op.pos, "^", base, self._unary())
        return base

    def _atom(self) -> Node:
        token = self.current
        if token.kind == "num":
            self._advance()
            return Num(token.pos, float(token.text))
        if token.kind == "name":
            self._advance()
            if self.current.text == "(":
                return self._call(token)
            return Name(token.pos, token.text)
        if token.text == "(":
            self._advance()
            node = self._expr()
            self._expect(")")
            return node
        found = token.text or "输入结束"
        raise ParseException(f"意外的符号 '{found}'", self.text, token.pos)

    def _call(self, name: Token) -> Node:
        self._expect("(")
        args: List[Node] = []
        kwargs: Dict[str, Node] = {}
        if self.current.text != ")":
            while True:
                if (
                    self.current.kind == "name"
                    and self.tokens[self.index + 1].text == "="
                ):
                    key = self._advance().text
                    self._advance()
                    kwargs[key] = self._expr()
                else:
                    if kwargs:
                        raise ParseException("位置参数不能出现在关键字参数之后", self.text, self.current.pos)
                    args.append(self._expr())
                if self.current.text != ",":
                    break
                self._advance()
        self._expect(")")
        return Call(name.pos, name.text, tuple(args), kwargs)


def parse_tree(text: str) -> Node:
    return _Parser(text).parse()


# ============================================================
# 常数求值
# ============================================================


def _constant(node: Node, text: str) -> float:
    """只含数字与命名常数的子树求值"""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name) and node.ident in _CONSTANTS:
        return _CONSTANTS[node.ident]
    if isinstance(node, Neg):
        return -_constant(node.operand, text)
    if isinstance(node, Bin):
        a, b = _constant(node.left, text), _constant(node.right, text)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if b == 0.0:
                raise ParseException("除以零", text, node.pos)
            return a / b
        return a**b
    raise ParseException("此处需要常数", text, node.pos)


def _is_constant(node: Node) -> bool:
    if isinstance(node, Num):
        return True
    if isinstance(node, Name):
        return node.ident in _CONSTANTS
    if isinstance(node, Neg):
        return _is_constant(node.operand)
    if isinstance(node, Bin):
        return _is_constant(node.left) and _is_constant(node.right)
    return False


def _arity(node: Call, n: int, text: str) -> None:
    if len(node.args) != n or node.kwargs:
        raise ParseException(f"{node.func} 需要 {n} 个参数", text, node.pos)


def _int_exponent(node: Node, text: str) -> int:
    value = _constant(node, text)
    if value != int(value) or value < 0:
        raise ParseException("指数必须是非负整数", text, node.pos)
    return int(value)


# ============================================================
# ε-网
# ============================================================

_NET_FUNCTIONS: Dict[str, Callable[[Net], Net]] = {
    "abs": abs,
    "exp": lambda n: n.exp(),
    "ln": lambda n: n.log(),
    "log": lambda n: n.log(),
    "sin": lambda n: n.apply(math.sin, "sin"),
    "cos": lambda n: n.apply(math.cos, "cos"),
}


def _net(node: Node, text: str) -> Net:
    if _is_constant(node):
        return Net.constant(_constant(node, text))
    if isinstance(node, Name):
        if node.ident == "eps":
            return EPS
        raise ParseException(f"未知名称 '{node.ident}'", text, node.pos)
    if isinstance(node, Neg):
        return -_net(node.operand, text)
    if isinstance(node, Bin):
        if node.op == "^":
            return _net(node.left, text) ** _constant(node.right, text)
        left, right = _net(node.left, text), _net(node.right, text)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        return left / right
    if isinstance(node, Call):
        if node.func in ("min", "max"):
            _arity(node, 2, text)
            a, b = (_net(arg, text) for arg in node.args)
            return a.minimum(b) if node.func == "min" else a.maximum(b)
        if node.func in _NET_FUNCTIONS:
            _arity(node, 1, text)
            return _NET_FUNCTIONS[node.func](_net(node.args[0], text))
        raise ParseException(f"未知函数 '{node.func}'", text, node.pos)
    raise ParseException("无法解析的网表达式", text, node.pos)


def parse_net(text: str) -> Net:
    """ε 的表达式，例如 'eps^2'、'1/ln(1/eps)'、'min(eps, 2*eps^3)'"""
    net = _net(parse_tree(text), text)
    return Net(net.at, text.strip())


# ============================================================
# 光滑函数
# ============================================================

_SMOOTH_PRIMITIVES: Dict[str, SmoothFn] = {
    "bump": BUMP,
    "smoothstep": SMOOTHSTEP,
    "sin": SIN,
    "cos": COS,
    "exp": EXP,
}


def _smooth(node: Node, text: str) -> SmoothFn:
    if _is_constant(node):
        return Const(_constant(node, text))
    if isinstance(node, Name):
        if node.ident == "x":
            return ID
        if node.ident in _SMOOTH_PRIMITIVES:
            return _SMOOTH_PRIMITIVES[node.ident]
        raise ParseException(f"未知名称 '{node.ident}'", text, node.pos)
    if isinstance(node, Neg):
        return mul(Const(-1.0), _smooth(node.operand, text))
    if isinstance(node, Bin):
        if node.op == "^":
            k = _int_exponent(node.right, text)
            base = _smooth(node.left, text)
            return base if k == 1 else IntPow(base, k)
        if node.op == "/":
            if not _is_constant(node.right):
                raise ParseException("除数必须是常数", text, node.right.pos)
            c = _constant(node.right, text)
            if c == 0.0:
                raise ParseException("除以零", text, node.right.pos)
            return mul(_smooth(node.left, text), Const(1.0 / c))
        left, right = _smooth(node.left, text), _smooth(node.right, text)
        if node.op == "+":
            return add(left, right)
        if node.op == "-":
            return add(left, mul(Const(-1.0), right))
        return mul(left, right)
    if isinstance(node, Call):
        if node.func in _SMOOTH_PRIMITIVES:
            _arity(node, 1, text)
            return compose(_SMOOTH_PRIMITIVES[node.func], _smooth(node.args[0], text))
        raise ParseException(f"未知函数 '{node.func}'", text, node.pos)
    raise ParseException("无法解析的函数表达式", text, node.pos)


def parse_smooth(text: str) -> SmoothFn:
    """x 的光滑表达式，例如 'sin'、'x^2'、'bump(2*x - 1)'"""
    return _smooth(parse_tree(text), text)


# ============================================================
# 分布
# ============================================================


def _kwarg_float(node: Call, key: str, default: float, text: str) -> float:
    return _constant(node.kwargs[key], text) if key in node.kwargs else default


def _atom(node: Node, text: str) -> Distribution:
    if isinstance(node, Name):
        ident = node.ident
        base = ident.rstrip("'")
        primes = len(ident) - len(base)
        if base == "delta":
            return delta(primes)
        if base == "heaviside" and primes == 0:
            return heaviside()
        if base == "pv" and primes == 0:
            return PRINCIPAL_VALUE
        raise ParseException(f"未知分布 '{ident}'", text, node.pos)
    if isinstance(node, Call):
        base = node.func.rstrip("'")
        primes = len(node.func) - len(base)
        if base == "delta":
            unknown = set(node.kwargs) - {"k", "x0"}
            if unknown:
                raise ParseException(f"delta 不支持参数 {sorted(unknown)}", text, node.pos)
            x0 = _constant(node.args[0], text) if node.args else _kwarg_float(node, "x0", 0.0, text)
            k = _kwarg_float(node, "k", float(primes), text)
            if k != int(k) or k < 0:
                raise ParseException("导数阶 k 必须是非负整数", text, node.pos)
            return delta(int(k), x0)
        if base == "heaviside" and primes == 0:
            if len(node.args) > 1:
                raise ParseException("heaviside 至多一个参数", text, node.pos)
            x0 = _constant(node.args[0], text) if node.args else _kwarg_float(node, "x0", 0.0, text)
            return heaviside(x0)
        if base == "regular" and primes == 0:
            _arity(node, 1, text)
            return regular(_smooth(node.args[0], text))
        if base == "pv" and primes == 0 and not node.args and not node.kwargs:
            return PRINCIPAL_VALUE
        raise ParseException(f"未知分布 '{node.func}'", text, node.pos)
    raise ParseException("需要分布原子", text, node.pos)


def _distribution(node: Node, text: str) -> Distribution:
    if isinstance(node, Bin) and node.op in ("+", "-"):
        left, right = _distribution(node.left, text), _distribution(node.right, text)
        return left + right if node.op == "+" else left - right
    if isinstance(node, Neg):
        return -_distribution(node.operand, text)
    if isinstance(node, Bin) and node.op == "*":
        if _is_constant(node.left):
            return _constant(node.left, text) * _distribution(node.right, text)
        if _is_constant(node.right):
            return _constant(node.right, text) * _distribution(node.left, text)
        raise ParseException("分布只能乘以常数", text, node.pos)
    if isinstance(node, Num) and node.value == 0.0:
        return ZERO_DIST
    return _atom(node, text)


def parse_distribution(text: str) -> Distribution:
    """目录中的分布：'delta'、"delta'(k=2, x0=0)"、'heaviside(0.5)'、'regular(sin)'、'pv' 及其常系数组合"""
    return _distribution(parse_tree(text), text)


# ============================================================
# 双变量核
# ============================================================


def _kernel(node: Node, text: str) -> Kernel:
    if _is_constant(node):
        return KConst(_constant(node, text))
    if isinstance(node, Name):
        if node.ident in ("u", "x"):
            return KVar(node.ident)
        raise ParseException(f"未知名称 '{node.ident}'", text, node.pos)
    if isinstance(node, Neg):
        return kernel_neg(_kernel(node.operand, text))
    if isinstance(node, Bin):
        if node.op == "^":
            return KPow(_kernel(node.left, text), _int_exponent(node.right, text))
        left, right = _kernel(node.left, text), _kernel(node.right, text)
        if node.op == "+":
            return KSum((left, right))
        if node.op == "-":
            return KSum((left, kernel_neg(right)))
        if node.op == "*":
            return KProd((left, right))
        try:
            return KQuot(left, right)
        except GFCalcException as exc:
            raise ParseException(exc.message, text, node.pos) from exc
    if isinstance(node, Call):
        if node.func in KERNEL_FUNCTIONS:
            _arity(node, 1, text)
            return KApply(node.func, _kernel(node.args[0], text))
        raise ParseException(f"未知函数 '{node.func}'", text, node.pos)
    raise ParseException("无法解析的核表达式", text, node.pos)


def parse_kernel(text: str) -> Kernel:
    """u、x 的表达式，例如 'bump(x - u)'、'bump(u*x)'、'sin(x)*(1+u)'"""
    return _kernel(parse_tree(text), text)


def parse_interval(text: str) -> Tuple[float, float]:
    """'a,b' 形式的区间端点，允许 inf / -inf"""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ParseException("区间需要形如 'a,b'", text, 0)
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError as exc:
        raise ParseException(f"无法解析区间端点: {exc}", text, 0) from exc
    if np.isnan(lo) or np.isnan(hi):
        raise ParseException("区间端点不能是 nan", text, 0)
    return lo, hi


def parse_grid(text: str) -> Tuple[int, int]:
    """'k_min:k_max' 形式的网格参数"""
    parts = text.split(":")
    if len(parts) != 2:
        raise ParseException("网格需要形如 'k_min:k_max'", text, 0)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ParseException(f"无法解析网格: {exc}", text, 0) from exc


def optional_float(text: Optional[str]) -> Optional[float]:
    return None if text is None else _constant(parse_tree(text), text)
