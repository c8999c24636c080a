"""Expression trees for constitutive laws and their fully parenthesized printer."""

from dataclasses import dataclass

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")
VARIABLE_ARITY = {"x": 1, "y": 1, "yA": 2, "yB": 2, "yC": 3}


class Node:
    __slots__ = ()

    def variables(self):
        return set()


@dataclass(frozen=True)
class Num(Node):
    value: float

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Var(Node):
    kind: str
    index: tuple  # 1-based

    def variables(self):
        return {self}

    def __str__(self):
        return self.kind + "".join(f"[{i}]" for i in self.index)


@dataclass(frozen=True)
class Neg(Node):
    operand: Node

    def variables(self):
        return self.operand.variables()

    def __str__(self):
        return f"(-{self.operand})"


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"{self.func}({self.arg})"


def to_text(components):
    """Print a component list so that parsing it back gives an equal tree."""
    return " ; ".join(str(c) for c in components)


def flat_offset(var, n):
    """Position of a variable in the flat jet coordinate vector [x | y | yA | yB | yC]."""
    idx = [i - 1 for i in var.index]
    if var.kind == "x":
        return idx[0]
    if var.kind == "y":
        return n + idx[0]
    if var.kind == "yA":
        return 2 * n + idx[0] * n + idx[1]
    if var.kind == "yB":
        return 2 * n + n * n + idx[0] * n + idx[1]
    return 2 * n + 2 * n * n + (idx[0] * n + idx[1]) * n + idx[2]
