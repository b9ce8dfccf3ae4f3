"""Forward-mode first derivatives with respect to two surface parameters.

Used for exact differentiation of parametric-pullback quantities on curved
graph patches (first fundamental form, densitized tangential components).
Values are numpy arrays of any tensor shape; ``du``/``dv`` carry the exact
partial derivatives, so no finite-difference truncation enters anywhere.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Dual", "dual_eval"]


class Dual:
    __slots__ = ("v", "du", "dv")

    def __init__(self, v, du=None, dv=None):
        self.v = np.asarray(v, dtype=float)
        self.du = np.zeros_like(self.v) if du is None else np.asarray(du, dtype=float)
        self.dv = np.zeros_like(self.v) if dv is None else np.asarray(dv, dtype=float)

    @classmethod
    def seed(cls, value: float, axis: int) -> "Dual":
        g = [0.0, 0.0]
        g[axis] = 1.0
        return cls(value, g[0], g[1])

    @classmethod
    def const(cls, value) -> "Dual":
        return cls(value)

    def __getitem__(self, idx) -> "Dual":
        return Dual(self.v[idx], self.du[idx], self.dv[idx])

    def __add__(self, other):
        other = _lift(other)
        return Dual(self.v + other.v, self.du + other.du, self.dv + other.dv)

    __radd__ = __add__

    def __sub__(self, other):
        other = _lift(other)
        return Dual(self.v - other.v, self.du - other.du, self.dv - other.dv)

    def __rsub__(self, other):
        return _lift(other) - self

    def __neg__(self):
        return Dual(-self.v, -self.du, -self.dv)

    def __mul__(self, other):
        other = _lift(other)
        return Dual(
            self.v * other.v,
            self.du * other.v + self.v * other.du,
            self.dv * other.v + self.v * other.dv,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _lift(other)
        inv = 1.0 / other.v
        val = self.v * inv
        return Dual(
            val,
            (self.du - val * other.du) * inv,
            (self.dv - val * other.dv) * inv,
        )

    def sqrt(self) -> "Dual":
        r = np.sqrt(self.v)
        half = 0.5 / r
        return Dual(r, half * self.du, half * self.dv)

    def power(self, e: int) -> "Dual":
        if e == 0:
            return Dual(np.ones_like(self.v))
        pe = self.v ** (e - 1)
        return Dual(self.v * pe, e * pe * self.du, e * pe * self.dv)

    def einsum(self, subscripts: str, other: "Dual") -> "Dual":
        """Bilinear contraction with the product rule."""
        other = _lift(other)
        return Dual(
            np.einsum(subscripts, self.v, other.v),
            np.einsum(subscripts, self.du, other.v) + np.einsum(subscripts, self.v, other.du),
            np.einsum(subscripts, self.dv, other.v) + np.einsum(subscripts, self.v, other.dv),
        )

    def dot(self, other: "Dual") -> "Dual":
        return self.einsum("i,i->", other)


def _lift(x) -> Dual:
    return x if isinstance(x, Dual) else Dual(x)


def dual_eval(field, coords: list[Dual]) -> Dual:
    """Evaluate a PolyField at Dual coordinates (chain rule is automatic)."""
    out = Dual(np.zeros(field.shape))
    for key, coeff in field.terms.items():
        mono = Dual(np.asarray(1.0))
        for xi, e in zip(coords, key):
            if e:
                mono = mono * xi.power(e)
        out = out + Dual(coeff) * _broadcast(mono, field.shape)
    return out


def _broadcast(scalar: Dual, shape) -> Dual:
    if shape == ():
        return scalar
    return Dual(
        np.broadcast_to(scalar.v, shape).copy(),
        np.broadcast_to(scalar.du, shape).copy(),
        np.broadcast_to(scalar.dv, shape).copy(),
    )
