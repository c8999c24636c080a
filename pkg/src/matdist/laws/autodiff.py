"""Batched forward-mode differentiation of law expressions.

Every node evaluates to a pair ``(value, grad)`` with ``value`` of shape (B,)
and ``grad`` of shape (B, N), N being the number of jet coordinates; constant
subtrees carry ``grad = None``.  One pass gives exact first derivatives with
respect to all coordinates of all B jets at once.
"""

from dataclasses import dataclass

import numpy as np

from ..exceptions import DimensionMismatch, DomainError
from ..jets import Jet, coordinate_count, coordinate_slices
from .expr import Call, Neg, Num, Var, flat_offset


def _add(ga, gb, sign=1.0):
    if ga is None:
        return None if gb is None else sign * gb
    if gb is None:
        return ga
    return ga + sign * gb


def _scale(g, factor):
    return None if g is None else factor[:, None] * g


class _Evaluator:
    def __init__(self, X, n, want_grad):
        self.X = X
        self.n = n
        self.B, self.N = X.shape
        self.want_grad = want_grad

    def run(self, node):
        if isinstance(node, Num):
            return np.full(self.B, node.value), None
        if isinstance(node, Var):
            off = flat_offset(node, self.n)
            grad = None
            if self.want_grad:
                grad = np.zeros((self.B, self.N))
                grad[:, off] = 1.0
            return self.X[:, off].copy(), grad
        if isinstance(node, Neg):
            v, g = self.run(node.operand)
            return -v, None if g is None else -g
        if isinstance(node, Call):
            return self.call(node)
        return self.binop(node)

    def call(self, node):
        v, g = self.run(node.arg)
        f = node.func
        if f == "exp":
            out = np.exp(v)
            return out, _scale(g, out)
        if f == "sin":
            return np.sin(v), _scale(g, np.cos(v))
        if f == "cos":
            return np.cos(v), _scale(g, -np.sin(v))
        if f == "log":
            if np.any(v <= 0):
                raise DomainError("log of a non-positive value", str(node))
            return np.log(v), _scale(g, 1.0 / v)
        # sqrt: the derivative blows up at 0, so 0 is only allowed for constants
        if np.any(v < 0) or (g is not None and np.any(v == 0)):
            raise DomainError("sqrt outside its differentiable domain", str(node))
        out = np.sqrt(v)
        return out, None if g is None else _scale(g, 0.5 / np.where(out == 0, 1.0, out))

    def binop(self, node):
        a, ga = self.run(node.left)
        op = node.op
        if op == "^":
            return self.power(node, a, ga)
        b, gb = self.run(node.right)
        if op == "+":
            return a + b, _add(ga, gb)
        if op == "-":
            return a - b, _add(ga, gb, -1.0)
        if op == "*":
            return a * b, _add(_scale(ga, b), _scale(gb, a))
        if np.any(b == 0):
            raise DomainError("division by zero", str(node))
        q = a / b
        return q, _add(_scale(ga, 1.0 / b), _scale(gb, -q / b))

    def power(self, node, a, ga):
        if not node.right.variables():
            e = float(self.run(node.right)[0][0])
            if e == round(e):
                k = int(e)
                if k < 0 and np.any(a == 0):
                    raise DomainError("negative power of zero", str(node))
                if k == 0:
                    return np.ones(self.B), None
                return a ** k, _scale(ga, k * a ** (k - 1))
            if np.any(a < 0) or (e < 1 and np.any(a == 0)):
                raise DomainError("fractional power of a non-positive value", str(node))
            return a ** e, _scale(ga, e * a ** (e - 1))
        b, gb = self.run(node.right)
        if np.any(a <= 0):
            raise DomainError("variable exponent needs a positive base", str(node))
        out = a ** b
        la = np.log(a)
        return out, _add(_scale(ga, out * b / a), _scale(gb, out * la))


def _as_batch(law, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != coordinate_count(law.n):
        raise DimensionMismatch(
            f"law is for n={law.n} ({coordinate_count(law.n)} coordinates), got {X.shape[1]} columns")
    return X


def evaluate_batch(law, X, want_grad=True):
    """Evaluate ``law`` at each row of ``X`` (flat jet coordinates).

    Returns ``values`` of shape (B, d) and, if requested, ``grads`` of shape (B, d, N).
    """
    X = _as_batch(law, X)
    ev = _Evaluator(X, law.n, want_grad)
    B, N = X.shape
    values = np.empty((B, law.d))
    grads = np.zeros((B, law.d, N)) if want_grad else None
    for a, comp in enumerate(law.components):
        v, g = ev.run(comp)
        values[:, a] = v
        if want_grad and g is not None:
            grads[:, a] = g
    return values, grads


def evaluate_values(law, X):
    return evaluate_batch(law, X, want_grad=False)[0]


def jets_to_array(jets):
    return np.stack([g.as_vector() for g in jets])


@dataclass(frozen=True, eq=False)
class LawEvaluation:
    value: np.ndarray
    d_x: np.ndarray
    d_y: np.ndarray
    d_yA: np.ndarray
    d_yB: np.ndarray
    d_yC: np.ndarray

    @property
    def gradient(self):
        """All derivative blocks flattened into one (d, N) matrix."""
        d = self.value.shape[0]
        return np.concatenate([b.reshape(d, -1) for b in (self.d_x, self.d_y, self.d_yA, self.d_yB, self.d_yC)], axis=1)


def split_gradient(grad, n):
    """Split a (..., N) gradient into the x, y, yA, yB, yC blocks."""
    s = coordinate_slices(n)
    lead = grad.shape[:-1]
    return (grad[..., s["x"]], grad[..., s["y"]], grad[..., s["yA"]].reshape(lead + (n, n)),
            grad[..., s["yB"]].reshape(lead + (n, n)), grad[..., s["yC"]].reshape(lead + (n, n, n)))


def evaluate(law, g):
    if not isinstance(g, Jet):
        raise TypeError("evaluate expects a Jet; use evaluate_batch for coordinate arrays")
    if g.n != law.n:
        raise DimensionMismatch(f"law is for n={law.n}, jet has n={g.n}")
    values, grads = evaluate_batch(law, g.as_vector()[None, :])
    return LawEvaluation(values[0], *split_gradient(grads[0], law.n))
