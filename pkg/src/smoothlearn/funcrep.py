"""Piecewise-linear interpolants on [0, 1], their q-action, and class membership.

A :class:`PointSet` is an immutable, strictly increasing set of knots. The
interpolant through it (:class:`PiecewiseLinear`) is constant to the left of
the first knot and to the right of the last one, and is identically zero when
there are no knots at all.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .exceptions import DomainError, DuplicateInputError

INFINITY = math.inf
# Constructions such as the binary-split witness sit exactly on J_q = 1.
CLASS_TOL = 1e-12


def _segment_action(width: float, rise: float, q: float) -> float:
    # zero-slope segments contribute 0 (avoids 0 * inf when q is large)
    if rise == 0.0:
        return 0.0
    try:
        return width * (abs(rise) / width) ** q
    except OverflowError:
        return INFINITY


@dataclass(frozen=True)
class PointSet:
    """Knots ``(u_i, v_i)`` with ``0 <= u_1 < ... < u_m <= 1``."""

    us: tuple[float, ...] = ()
    vs: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.us) != len(self.vs):
            raise ValueError("us and vs must have the same length")
        for u in self.us:
            if not 0.0 <= u <= 1.0:
                raise DomainError(f"input {u!r} outside [0, 1]")
        for a, b in zip(self.us, self.us[1:]):
            if not a < b:
                raise ValueError("inputs must be strictly increasing")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "PointSet":
        out = cls()
        for u, v in pairs:
            out = out.with_point(u, v)
        return out

    def __len__(self) -> int:
        return len(self.us)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(zip(self.us, self.vs))

    def pairs(self) -> list[tuple[float, float]]:
        return list(self)

    def locate(self, u: float) -> int:
        """Number of knots strictly left of ``u``."""
        return bisect.bisect_left(self.us, u)

    def value_at(self, u: float) -> float | None:
        k = self.locate(u)
        if k < len(self.us) and self.us[k] == u:
            return self.vs[k]
        return None

    def with_point(self, u: float, v: float) -> "PointSet":
        u = float(u)
        v = float(v)
        if not 0.0 <= u <= 1.0:
            raise DomainError(f"input {u!r} outside [0, 1]")
        k = self.locate(u)
        if k < len(self.us) and self.us[k] == u:
            if self.vs[k] == v:
                return self
            raise DuplicateInputError(
                f"input {u!r} already revealed with value {self.vs[k]!r}, got {v!r}"
            )
        return PointSet(self.us[:k] + (u,) + self.us[k:], self.vs[:k] + (v,) + self.vs[k:])

    def to_json(self) -> list[list[float]]:
        return [[u, v] for u, v in self]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[float]]) -> "PointSet":
        return cls.from_pairs((float(u), float(v)) for u, v in data)


@dataclass(frozen=True)
class SmoothnessClass:
    """``F_q`` (``d == 1``) or ``F_{q,d}``; ``q = INFINITY`` means 1-Lipschitz."""

    q: float = INFINITY
    d: int = 1

    def __post_init__(self):
        if not (self.q >= 1.0):
            raise DomainError(f"q must be >= 1 or INFINITY, got {self.q!r}")
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d!r}")

    @property
    def is_lipschitz(self) -> bool:
        return math.isinf(self.q)


@dataclass(frozen=True)
class PiecewiseLinear:
    """The interpolant ``f_S`` through a :class:`PointSet`."""

    base: PointSet = PointSet()

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "PiecewiseLinear":
        return cls(PointSet.from_pairs(pairs))

    def __len__(self) -> int:
        return len(self.base)

    def __call__(self, x):
        if np.ndim(x) == 0:
            return evaluate(self, float(x))
        return evaluate_many(self, x)

    def slopes(self) -> np.ndarray:
        us = np.asarray(self.base.us, dtype=float)
        vs = np.asarray(self.base.vs, dtype=float)
        if len(us) < 2:
            return np.zeros(0)
        return np.diff(vs) / np.diff(us)

    def action(self, q: float) -> float:
        return action(self, q)

    def max_slope(self) -> float:
        return max_slope(self)

    def insert(self, x: float, y: float, q: float) -> tuple["PiecewiseLinear", float, float]:
        return insert(self, x, y, q)

    def in_class(self, cls: SmoothnessClass) -> bool:
        return in_class(self, cls)

    def scaled(self, c: float) -> "PiecewiseLinear":
        return PiecewiseLinear(PointSet(self.base.us, tuple(c * v for v in self.base.vs)))

    def to_json(self) -> list[list[float]]:
        return self.base.to_json()


def evaluate(f: PiecewiseLinear, x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x = {x!r} outside [0, 1]")
    us, vs = f.base.us, f.base.vs
    m = len(us)
    if m == 0:
        return 0.0
    k = bisect.bisect_left(us, x)
    if k == 0:
        return vs[0]
    if k == m:
        return vs[-1]
    if us[k] == x:
        return vs[k]
    u0, v0, u1, v1 = us[k - 1], vs[k - 1], us[k], vs[k]
    return v0 + (x - u0) * (v1 - v0) / (u1 - u0)


def evaluate_many(f: PiecewiseLinear, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("inputs outside [0, 1]")
    us = np.asarray(f.base.us, dtype=float)
    vs = np.asarray(f.base.vs, dtype=float)
    if len(us) == 0:
        return np.zeros_like(x)
    if len(us) == 1:
        return np.full_like(x, vs[0])
    k = np.clip(np.searchsorted(us, x, side="left"), 1, len(us) - 1)
    u0, u1, v0, v1 = us[k - 1], us[k], vs[k - 1], vs[k]
    out = v0 + (x - u0) * (v1 - v0) / (u1 - u0)
    out = np.where(x <= us[0], vs[0], out)
    out = np.where(x >= us[-1], vs[-1], out)
    hit = us[k] == x
    out = np.where(hit, v1, out)
    return out


def action(f: PiecewiseLinear, q: float) -> float:
    """``J_q[f_S]``: sum over segments of ``width * |slope|**q``."""
    if not (q > 1.0) or math.isinf(q):
        raise DomainError(f"action needs finite q > 1, got {q!r}")
    us, vs = f.base.us, f.base.vs
    return math.fsum(
        _segment_action(us[i + 1] - us[i], vs[i + 1] - vs[i], q) for i in range(len(us) - 1)
    )


def max_slope(f: PiecewiseLinear) -> float:
    s = f.slopes()
    return float(np.max(np.abs(s))) if len(s) else 0.0


def action_increment(f: PiecewiseLinear, x: float, y: float, q: float) -> float:
    """Change in ``J_q`` caused by adding the knot ``(x, y)``, computed locally."""
    us, vs = f.base.us, f.base.vs
    m = len(us)
    if m == 0:
        return 0.0
    k = bisect.bisect_left(us, x)
    if k < m and us[k] == x:
        if vs[k] != y:
            raise DuplicateInputError(f"input {x!r} already revealed with value {vs[k]!r}")
        return 0.0
    if k == 0:
        return _segment_action(us[0] - x, vs[0] - y, q)
    if k == m:
        return _segment_action(x - us[-1], y - vs[-1], q)
    u0, v0, u1, v1 = us[k - 1], vs[k - 1], us[k], vs[k]
    return (
        _segment_action(x - u0, y - v0, q)
        + _segment_action(u1 - x, v1 - y, q)
        - _segment_action(u1 - u0, v1 - v0, q)
    )


def insert(f: PiecewiseLinear, x: float, y: float, q: float) -> tuple[PiecewiseLinear, float, float]:
    """Add a knot; returns ``(new_f, J_q[new_f] - J_q[f], q)``."""
    if not (q > 1.0) or math.isinf(q):
        raise DomainError(f"insert needs finite q > 1, got {q!r}")
    new_base = f.base.with_point(x, y)
    if new_base is f.base:
        return f, 0.0, q
    return PiecewiseLinear(new_base), action_increment(f, x, y, q), q


def in_class(f: PiecewiseLinear, cls: SmoothnessClass) -> bool:
    if cls.d != 1:
        raise DomainError("in_class on a single-variable function needs d == 1")
    if cls.is_lipschitz:
        return max_slope(f) <= 1.0 + CLASS_TOL
    return action(f, cls.q) <= 1.0 + CLASS_TOL


@dataclass(frozen=True)
class TensorSum:
    """``gamma(a_1, ..., a_d) = scale * sum_i f_i(a_i)``.

    Every axis-parallel section of ``gamma`` is a translate of ``scale * f_k``,
    so membership in ``F_{q,d}`` reduces to membership of each scaled component.
    """

    components: tuple[PiecewiseLinear, ...]
    scale: float = 1.0

    @classmethod
    def repeated(cls, f: PiecewiseLinear, d: int, scale: float = 1.0) -> "TensorSum":
        return cls((f,) * d, scale)

    @property
    def d(self) -> int:
        return len(self.components)

    def __call__(self, point) -> float:
        point = np.asarray(point, dtype=float)
        if point.shape[-1] != self.d:
            raise DomainError(f"expected {self.d} coordinates, got {point.shape[-1]}")
        if point.ndim == 1:
            return self.scale * math.fsum(evaluate(c, float(a)) for c, a in zip(self.components, point))
        return self.scale * sum(evaluate_many(c, point[:, i]) for i, c in enumerate(self.components))

    def in_class(self, cls: SmoothnessClass) -> bool:
        if cls.d != self.d:
            raise DomainError(f"class has d = {cls.d}, function has d = {self.d}")
        single = SmoothnessClass(cls.q, 1)
        return all(in_class(c.scaled(self.scale), single) for c in self.components)

    def to_json(self) -> dict:
        return {"kind": "tensor_sum", "scale": self.scale, "components": [c.to_json() for c in self.components]}
