"""Closed-form bounds on worst-case total p-error and numerical inequality checks.

Each inequality is exposed as a residual (left side minus right side) that
should be nonnegative. Residuals accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arena import LossParams
from .exceptions import DomainError, OutOfRegionError
from .funcrep import INFINITY, PiecewiseLinear, action_increment, evaluate

LN2 = math.log(2.0)


@dataclass(frozen=True)
class BoundReport:
    name: str
    params: LossParams
    value: float
    kind: str  # "lower" or "upper"

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)


def _need(cond: bool, name: str, hypothesis: str) -> None:
    if not cond:
        raise OutOfRegionError(f"{name}: requires {hypothesis}")


def series_dyadic_lower(epsilon: float) -> float:
    """Lower bound on opt_{1+eps}(F_inf) from the dyadic adversary (closed form)."""
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon!r}")
    p = 1.0 + epsilon
    head = 0.5 * (math.sqrt(epsilon * (1.0 - epsilon)) / 4.0) ** p
    # 1 - 2 (sqrt(1-eps)/2)^p, written to avoid cancellation as eps -> 0
    denom = -math.expm1(LN2 + p * (0.5 * math.log1p(-epsilon) - LN2))
    return head / denom


def dyadic_term(epsilon: float, k: int) -> float:
    # log space: small epsilon needs thousands of terms and 2**k overflows
    log_amp = 0.5 * math.log(epsilon) + 0.5 * k * math.log1p(-epsilon) - (k + 1) * LN2
    return math.exp((k - 2) * LN2 + (1.0 + epsilon) * log_amp)


def dyadic_partial_sum(epsilon: float, terms: int | None = None) -> float:
    """Partial sum of the dyadic series; ``terms=None`` sums until a term drops below 1e-16 of the total."""
    total = 0.0
    parts = []
    k = 1
    while True:
        term = dyadic_term(epsilon, k)
        parts.append(term)
        total += term
        if terms is not None and k >= terms:
            break
        if terms is None and term < 1e-16 * total:
            break
        k += 1
    return math.fsum(parts)


def bound_value(name: str, params: LossParams, n: int | None = None) -> BoundReport:
    """Evaluate a named bound at ``params``.

    Names: ``2qup``, ``2qlow``, ``pqlow``, ``holder``, ``dyadic``, ``nnupper``,
    ``gridlow``, ``boundedm_upper``, ``boundedm_upper_finite``, ``pq_exact``.
    """
    p, q, d, m = params.p, params.q, params.d, params.m
    if name == "2qup":
        _need(1.0 < q < 2.0, name, "q in (1, 2)")
        return BoundReport(name, params, 1.0 / (q - 1.0), "upper")
    if name == "2qlow":
        _need(1.0 < q < 2.0, name, "q in (1, 2)")
        return BoundReport(name, params, q / (8.0 * math.e * LN2 * (q - 1.0)), "lower")
    if name == "pqlow":
        _need(1.0 < q < 2.0, name, "q in (1, 2)")
        _need(p > 1.0, name, "p > 1")
        return BoundReport(name, params, q / (p * 2.0**p * math.e * LN2 * (q - 1.0)), "lower")
    if name == "holder":
        _need(1.0 < p < 2.0, name, "p in (1, 2)")
        r = p / (2.0 - p)
        return BoundReport(name, params, (1.0 + 1.0 / (2.0**r - 2.0)) ** (1.0 - p / 2.0), "upper")
    if name == "dyadic":
        _need(1.0 < p < 1.5, name, "p = 1 + eps with eps in (0, 1/2)")
        return BoundReport(name, params, dyadic_partial_sum(p - 1.0), "lower")
    if name == "nnupper":
        _need(p > d, name, "p > d")
        return BoundReport(name, params, (2.0**d - 1.0) * d**p / (1.0 - 2.0**d / 2.0**p), "upper")
    if name == "gridlow":
        _need(0.0 < p < d or n is not None or m is not None, name, "0 < p < d (or an explicit n / m)")
        if n is None and m is None:
            return BoundReport(name, params, INFINITY, "lower")
        if n is None:
            n = grid_side(m, d)
        return BoundReport(name, params, n ** (d - p) / 2.0**p, "lower")
    if name == "boundedm_upper":
        _need(0.0 < p < d, name, "0 < p < d")
        _need(m is not None, name, "a trial budget m")
        c = d**p * (2.0**d - 1.0) * 2.0 ** (d - p) / (2.0 ** (d - p) - 1.0)
        return BoundReport(name, params, c * m ** ((d - p) / d), "upper")
    if name == "boundedm_upper_finite":
        _need(0.0 < p < d, name, "0 < p < d")
        _need(m is not None, name, "a trial budget m")
        big_k = math.ceil(math.log2(m + 1) / d)
        value = d**p * (2.0**d - 1.0) * (2.0 ** (big_k * (d - p)) - 1.0) / (2.0 ** (d - p) - 1.0)
        return BoundReport(name, params, value, "upper")
    if name == "pq_exact":
        _need(q > 1.0, name, "q > 1")
        need_p = 2.0 if q >= 2.0 else 2.0 + 1.0 / (q - 1.0)
        _need(p >= need_p, name, f"p >= {need_p:g} for q = {q:g}")
        return BoundReport(name, params, 1.0, "upper")
    raise OutOfRegionError(f"unknown bound {name!r}")


BOUND_NAMES = (
    "2qup",
    "2qlow",
    "pqlow",
    "holder",
    "dyadic",
    "nnupper",
    "gridlow",
    "boundedm_upper",
    "boundedm_upper_finite",
    "pq_exact",
)


def grid_side(m: int, d: int) -> int:
    """Largest ``n`` with ``n**d <= m``."""
    n = int(round(m ** (1.0 / d)))
    while n**d > m:
        n -= 1
    while (n + 1) ** d <= m:
        n += 1
    return n


def holder_constant_ratio(p):
    """``(1 + 1/(2^(1+delta) - 2))^(1-p/2) / (1 + 1/delta)^((2-p)/2)`` with ``delta = p/(2-p) - 1``.

    Bounded above by 1 on (1, 2) since ``2^(1+delta) - 2 >= 2 ln(2) delta``.
    """
    p = np.asarray(p, dtype=float)
    delta = p / (2.0 - p) - 1.0
    with np.errstate(over="ignore"):  # 2**(1+delta) -> inf as p -> 2 gives the right limit
        lhs = (1.0 + 1.0 / (2.0 ** (1.0 + delta) - 2.0)) ** (1.0 - p / 2.0)
    return lhs / (1.0 + 1.0 / delta) ** ((2.0 - p) / 2.0)


# -- inequality residuals ---------------------------------------------------


def _pow1p(t, q):
    """``(1 + t)**q - 1`` accurately for small ``t``."""
    return np.expm1(q * np.log1p(t))


def lemma_residual_2qin(a, b, q, x):
    """``a(1+x/a)^q + b(1-x/b)^q - (a+b) - 2q(q-1) x^2/(a+b)`` on ``-a < x < b``."""
    a, b, q, x = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, q, x)))
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("a and b must be positive")
    if np.any((x <= -a) | (x >= b)):
        raise DomainError("x must lie in (-a, b)")
    left = a * _pow1p(x / a, q) + b * _pow1p(-x / b, q)
    out = left - 2.0 * q * (q - 1.0) * x**2 / (a + b)
    return out if out.ndim else float(out)


def lemma_residual_2qout(a, b, q, x, corollary: bool = False):
    """``a|x/a+1|^q + b|x/b-1|^q - (a+b) - (q-1)|x|^q / (a+b)^(q-1)`` for ``x`` outside ``(-a, b)``.

    With ``corollary=True`` the denominator is dropped, which needs ``a + b <= 1``.
    """
    a, b, q, x = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, q, x)))
    if np.any((a <= 0) | (a >= 1) | (b <= 0) | (b >= 1)):
        raise DomainError("a and b must lie in (0, 1)")
    if np.any((x > -a) & (x < b)):
        raise DomainError("x must lie outside (-a, b)")
    if corollary and np.any(a + b > 1.0):
        raise DomainError("the corollary form needs a + b <= 1")
    left = a * np.abs(x / a + 1.0) ** q + b * np.abs(x / b - 1.0) ** q - (a + b)
    right = (q - 1.0) * np.abs(x) ** q
    if not corollary:
        right = right / (a + b) ** (q - 1.0)
    out = left - right
    return out if out.ndim else float(out)


def uv_threshold(q, a):
    return (q - 1.0) ** (q - 1.0) / (a * (1.0 - a))


def lemma_residual_uv(q, a, u, v):
    """``a|u|^q + (1-a)|v|^q - 1``, which is positive once ``|u - v|`` reaches the threshold."""
    q, a, u, v = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (q, a, u, v)))
    if np.any((q <= 1) | (q >= 2)) or np.any((a <= 0) | (a >= 1)):
        raise DomainError("q must lie in (1, 2) and a in (0, 1)")
    if np.any(np.abs(u - v) < uv_threshold(q, a) * (1.0 - 1e-12)):
        raise DomainError("|u - v| is below (q-1)^(q-1) / (a(1-a))")
    out = a * np.abs(u) ** q + (1.0 - a) * np.abs(v) ** q - 1.0
    return out if out.ndim else float(out)


def increment_residual_2qboth(f: PiecewiseLinear, x: float, y: float, q: float) -> float:
    """``J_q`` increment minus ``(q-1)(y - f(x))^2``."""
    return action_increment(f, x, y, q) - (q - 1.0) * (y - evaluate(f, x)) ** 2


def increment_residual_pqboth(f: PiecewiseLinear, x: float, y: float, q: float) -> float:
    """``J_q`` increment minus ``|y - f(x)|^p`` with ``p = 2 + 1/(q-1)``."""
    p = 2.0 + 1.0 / (q - 1.0)
    return action_increment(f, x, y, q) - abs(y - evaluate(f, x)) ** p


def equidistant_increment(f: PiecewiseLinear, x: float, y: float) -> float:
    """Predicted ``J_2`` increment when ``x`` is equidistant from its two nearest knots."""
    gap = min(abs(x - u) for u in f.base.us)
    return 2.0 * (y - evaluate(f, x)) ** 2 / gap


# -- samplers ---------------------------------------------------------------


def log_uniform(rng: np.random.Generator, low: float, high: float, size) -> np.ndarray:
    return np.exp(rng.uniform(math.log(low), math.log(high), size))


def sample_q(rng: np.random.Generator, size, low: float = 1e-4) -> np.ndarray:
    """``q`` in (1, 2) with ``q - 1`` log-uniform, stressing the singular end."""
    return 1.0 + log_uniform(rng, low, 1.0 - 1e-9, size)


def sample_2qin(rng: np.random.Generator, size: int):
    a = log_uniform(rng, 1e-3, 10.0, size)
    b = log_uniform(rng, 1e-3, 10.0, size)
    q = sample_q(rng, size)
    t = rng.uniform(0.0, 1.0, size)
    x = -a + t * (a + b)
    x = np.clip(x, np.nextafter(-a, np.inf), np.nextafter(b, -np.inf))
    return a, b, q, x


def sample_2qout(rng: np.random.Generator, size: int, corollary: bool = False):
    a = rng.uniform(1e-3, 1.0 - 1e-3, size)
    b = rng.uniform(1e-3, 1.0 - 1e-3, size)
    if corollary:
        s = a + b
        over = s > 1.0
        a[over] /= s[over]
        b[over] = 1.0 - a[over]
    q = sample_q(rng, size)
    mag = log_uniform(rng, 1.0, 100.0, size)
    side = rng.random(size) < 0.5
    x = np.where(side, b * mag, -a * mag)
    return a, b, q, x


def sample_uv(rng: np.random.Generator, size: int, margin: float = 1e-2):
    """Points satisfying the ``|u - v|`` threshold, with ``a`` kept ``margin`` away from 0 and 1."""
    q = sample_q(rng, size)
    a = rng.uniform(margin, 1.0 - margin, size)
    thr = uv_threshold(q, a)
    gap = thr * (1.0 + log_uniform(rng, 1e-9, 10.0, size))
    v = rng.normal(0.0, 1.0, size) * thr
    u = v + np.where(rng.random(size) < 0.5, gap, -gap)
    return q, a, u, v
