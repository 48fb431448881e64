"""The learner/adversary protocol, transcripts and loss accounting.

On trial ``t = 0, ..., m`` the learner receives an input, commits to a guess,
and only then sees the true value. Trial 0 is recorded but never scored.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from sklearn.base import clone

from ._validation import check_exponent
from .exceptions import ConsistencyError, DomainError
from .funcrep import INFINITY, PiecewiseLinear, PointSet, SmoothnessClass, TensorSum, action


@dataclass(frozen=True)
class LossParams:
    p: float = 2.0
    q: float = INFINITY
    d: int = 1
    m: int | None = None

    def __post_init__(self):
        check_exponent(self.p)
        if not self.q > 1.0:
            raise DomainError(f"q must be > 1 or INFINITY, got {self.q!r}")
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d!r}")
        if self.m is not None and (int(self.m) != self.m or self.m < 1):
            raise DomainError(f"m must be a positive integer, got {self.m!r}")

    @property
    def smoothness(self) -> SmoothnessClass:
        return SmoothnessClass(self.q, self.d)

    def to_json(self) -> dict:
        return {"p": self.p, "q": None if math.isinf(self.q) else self.q, "d": self.d, "m": self.m}


def _jsonable_input(x):
    if np.ndim(x) == 0:
        return float(x)
    return [float(c) for c in np.asarray(x, dtype=float).ravel()]


@dataclass(frozen=True)
class Trial:
    t: int
    x: object
    yhat: float
    y: float

    @property
    def e(self) -> float:
        return abs(self.yhat - self.y)

    def to_json(self) -> dict:
        return {"t": self.t, "x": _jsonable_input(self.x), "yhat": self.yhat, "y": self.y, "e": self.e}


@dataclass(frozen=True)
class Transcript:
    trials: tuple[Trial, ...] = ()
    params: LossParams = field(default_factory=LossParams)

    def __len__(self) -> int:
        return len(self.trials)

    @property
    def inputs(self) -> list:
        return [tr.x for tr in self.trials]

    @property
    def errors(self) -> np.ndarray:
        return np.array([tr.e for tr in self.trials])

    @property
    def scored_errors(self) -> np.ndarray:
        return self.errors[1:]

    def history(self) -> tuple:
        return tuple((tr.x, tr.y) for tr in self.trials)

    def prefix(self, m: int) -> "Transcript":
        """The first ``m`` scored trials (plus trial 0)."""
        return Transcript(self.trials[: m + 1], self.params)

    def total_loss(self, p: float | None = None) -> float:
        return total_loss(self, self.params.p if p is None else p)

    def to_json(self, exponents: Iterable[float] = ()) -> dict:
        ps = sorted({self.params.p, *exponents})
        return {
            "params": self.params.to_json(),
            "trials": [tr.to_json() for tr in self.trials],
            "totals": {repr(p): total_loss(self, p) for p in ps},
        }


def total_loss(tr: Transcript, p: float) -> float:
    """Sum of ``e_t ** p`` over the scored trials ``t >= 1``."""
    check_exponent(p)
    return math.fsum(t.e**p for t in tr.trials[1:])


class Recorder:
    """Runs the protocol one trial at a time against a guess function."""

    def __init__(self, guess_fn: Callable, params: LossParams):
        self.guess_fn = guess_fn
        self.params = params
        self.trials: list[Trial] = []
        self.history: list[tuple] = []

    @property
    def scored(self) -> int:
        return max(len(self.trials) - 1, 0)

    @property
    def exhausted(self) -> bool:
        m = self.params.m
        return m is not None and self.scored >= m

    def ask(self, x) -> float:
        """Show ``x`` to the learner and return its guess."""
        return float(self.guess_fn(x, tuple(self.history)))

    def reveal(self, x, yhat: float, y: float) -> None:
        self.trials.append(Trial(len(self.trials), x, float(yhat), float(y)))
        self.history.append((x, float(y)))

    def transcript(self) -> Transcript:
        return Transcript(tuple(self.trials), self.params)


def as_guess_fn(learner) -> Callable:
    """Turn an estimator (cloned, so games never share state) or a callable into a guess function."""
    from .learners import EstimatorGuess

    if hasattr(learner, "predict_one") and hasattr(learner, "observe"):
        return EstimatorGuess(clone(learner))
    if callable(learner):
        return learner
    raise TypeError(f"cannot drive {learner!r}: need an online estimator or a guess function")


def _check_target(f, params: LossParams) -> None:
    cls = params.smoothness
    if isinstance(f, PiecewiseLinear):
        ok = f.in_class(cls)
    elif isinstance(f, TensorSum):
        ok = f.in_class(cls)
    elif hasattr(f, "in_class"):
        ok = f.in_class(cls)
    else:
        return
    if not ok:
        raise DomainError(f"target is not in the class q={params.q}, d={params.d}")


def play_fixed_target(learner, f, inputs: Sequence, params: LossParams) -> Transcript:
    """Play ``learner`` against a fixed target; class membership is checked first."""
    _check_target(f, params)
    inputs = list(inputs)
    if params.m is not None and len(inputs) > params.m + 1:
        raise DomainError(f"{len(inputs)} inputs exceed the budget of m + 1 = {params.m + 1}")
    keys = [tuple(np.ravel(x)) for x in inputs]
    if len(set(keys)) != len(keys):
        raise DomainError("inputs must be distinct")
    if hasattr(learner, "predict_one") and hasattr(learner, "observe"):
        est = clone(learner)
        trials = []
        for t, x in enumerate(inputs):
            yhat = est.predict_one(x)
            y = float(f(x))
            trials.append(Trial(t, x, float(yhat), y))
            est.observe(x, y)
        return Transcript(tuple(trials), params)
    rec = Recorder(as_guess_fn(learner), params)
    for x in inputs:
        yhat = rec.ask(x)
        rec.reveal(x, yhat, float(f(x)))
    return rec.transcript()


def play_adversary(learner, adversary, params: LossParams | None = None):
    """Play a learner against an adversary; returns ``(transcript, witness)``.

    Raises :class:`ConsistencyError` when the adversary's witness is not in
    its advertised class.
    """
    outcome = adversary.play(as_guess_fn(learner), params=params)
    if not outcome.witness_ok:
        raise ConsistencyError(f"{type(adversary).__name__} produced a witness outside its class")
    return outcome.transcript, outcome.witness


@dataclass(frozen=True)
class Diagnostics:
    d_list: np.ndarray
    ratio_sum: float
    power_sums: dict


def distances_to_previous(inputs: Sequence[float]) -> np.ndarray:
    """``d_i = min_{j<i} |x_j - x_i|`` for ``i >= 1``."""
    seen: list[float] = []
    out = []
    for i, x in enumerate(inputs):
        x = float(x)
        if i:
            k = bisect.bisect_left(seen, x)
            near = [abs(seen[j] - x) for j in (k - 1, k) if 0 <= j < len(seen)]
            out.append(min(near))
        bisect.insort(seen, x)
    return np.array(out)


def diagnostics(tr: Transcript, exponents: Iterable[float] = ()) -> Diagnostics:
    if tr.params.d != 1 or any(np.ndim(x) for x in tr.inputs):
        raise DomainError("diagnostics are defined for single-variable transcripts only")
    d_list = distances_to_previous(tr.inputs)
    if np.any(d_list <= 0):
        raise DomainError("inputs must be distinct")
    e = tr.scored_errors
    ratio = math.fsum(e**2 / d_list)
    powers = {}
    for x in exponents:
        check_exponent(x, "exponent", lower=1.0)
        powers[x] = math.fsum(d_list**x)
    return Diagnostics(d_list, ratio, powers)


def holder_chain(tr: Transcript, p: float) -> tuple[float, float, float]:
    """``(total p-error, Hoelder middle term, closed-form ceiling)`` for ``p`` in (1, 2)."""
    if not 1.0 < p < 2.0:
        raise DomainError("the Hoelder chain needs p in (1, 2)")
    r = p / (2.0 - p)
    diag = diagnostics(tr, [r])
    middle = diag.ratio_sum ** (p / 2.0) * diag.power_sums[r] ** (1.0 - p / 2.0)
    ceiling = (1.0 + 1.0 / (2.0**r - 2.0)) ** (1.0 - p / 2.0)
    return total_loss(tr, p), middle, ceiling


# -- input sequences and random targets ---------------------------------------


def random_inputs(rng: np.random.Generator, n: int, d: int = 1, endpoints: bool = False):
    """``n`` distinct uniform inputs (floats for d == 1, arrays of shape (d,) otherwise)."""
    if d == 1:
        xs = list(rng.uniform(0.0, 1.0, size=n))
        if endpoints and n >= 2:
            xs[0], xs[1] = 0.0, 1.0
        return xs
    return list(rng.uniform(0.0, 1.0, size=(n, d)))


def dyadic_inputs(n: int, start: Sequence[float] = (0.0, 1.0)) -> list[float]:
    """Endpoints followed by midpoints in breadth-first dyadic order."""
    out = list(start)[:n]
    level = 1
    while len(out) < n:
        den = 2**level
        for k in range(1, den, 2):
            if len(out) == n:
                break
            out.append(k / den)
        level += 1
    return out


def random_target(
    rng: np.random.Generator,
    q: float,
    n_knots: int | None = None,
    budget: float | None = None,
) -> PiecewiseLinear:
    """A random piecewise-linear function with ``J_q`` (or max slope) equal to ``budget``.

    Knot spacings are drawn from a Dirichlet with small concentration so that
    narrow, steep segments are common.
    """
    if n_knots is None:
        n_knots = int(rng.integers(2, 40))
    if budget is None:
        budget = float(rng.uniform(0.05, 1.0))
    gaps = rng.dirichlet(np.full(n_knots + 1, 0.3))
    us = np.cumsum(gaps)[:-1]
    # snap to a 1e-9 grid so near-coincident knots merge instead of forming
    # segments whose width is lost to rounding
    us = np.unique(np.round(np.clip(us, 0.0, 1.0), 9))
    rises = rng.standard_normal(len(us) - 1) * rng.exponential(1.0, len(us) - 1)
    vs = np.concatenate([[0.0], np.cumsum(rises)]) if len(us) > 1 else np.zeros(len(us))
    f = PiecewiseLinear(PointSet(tuple(float(u) for u in us), tuple(float(v) for v in vs)))
    if len(us) < 2 or not np.any(rises):
        return f
    if math.isinf(q):
        size = float(np.max(np.abs(f.slopes())))
        scale = budget / size
    else:
        scale = (budget / action(f, q)) ** (1.0 / q)
    # shrink by a hair so rounding cannot push J_q over the budget
    scale *= 1.0 - 1e-12
    offset = float(rng.uniform(-1.0, 1.0))
    vs = np.asarray(f.base.vs)
    while True:
        g = PiecewiseLinear(PointSet(f.base.us, tuple(float(v) for v in scale * vs + offset)))
        size = float(np.max(np.abs(g.slopes()))) if math.isinf(q) else action(g, q)
        if size <= budget:
            return g
        scale *= 1.0 - 1e-11


def random_tensor_target(rng: np.random.Generator, d: int, n_knots: int | None = None) -> TensorSum:
    """A tensor sum of ``d`` random 1-Lipschitz functions scaled by ``1/d``."""
    comps = tuple(random_target(rng, INFINITY, n_knots, budget=1.0) for _ in range(d))
    return TensorSum(comps, 1.0 / d)
