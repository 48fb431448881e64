"""Online learners: LININT (single variable) and the least-index L1 nearest neighbour.

Two surfaces are provided. ``LearnerState`` with ``linint_predict``,
``nn_predict`` and ``learner_update`` is the immutable, functional one. The
estimators ``LinIntRegressor`` and ``NearestNeighborRegressor`` follow the
scikit-learn conventions (``fit`` / ``partial_fit`` / ``predict`` /
``get_params``) and are what the arena drives, cloning a fresh copy per game.

A *guess function* is any callable ``guess(x, history) -> float`` where
``history`` is the tuple of ``(input, value)`` pairs revealed so far. It is
the protocol adversaries talk to.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import check_inputs, check_targets
from .exceptions import DomainError, DuplicateInputError
from .funcrep import PiecewiseLinear, PointSet, evaluate

GuessFn = Callable[[object, tuple], float]


@dataclass(frozen=True)
class MultiPoint:
    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not coords:
            raise DomainError("a MultiPoint needs at least one coordinate")
        if any(not 0.0 <= c <= 1.0 for c in coords):
            raise DomainError(f"coordinates {coords} outside [0, 1]")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def diagonal(cls, x: float, d: int) -> "MultiPoint":
        return cls((x,) * d)

    @property
    def d(self) -> int:
        return len(self.coords)

    def l1(self, other: "MultiPoint") -> float:
        return sum(abs(a - b) for a, b in zip(self.coords, other.coords))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def _key(x):
    return x.coords if isinstance(x, MultiPoint) else float(x)


@dataclass(frozen=True)
class LearnerState:
    """Revealed ``(input, value)`` pairs in arrival order."""

    history: tuple = ()
    # sorted knots for the d == 1 interpolant, kept in step with history
    points: PointSet = field(default_factory=PointSet, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.history)

    def value_at(self, x):
        key = _key(x)
        for hx, hy in self.history:
            if _key(hx) == key:
                return hy
        return None


def learner_update(state: LearnerState, x, y: float) -> LearnerState:
    y = float(y)
    seen = state.value_at(x)
    if seen is not None:
        if seen == y:
            return state
        raise DuplicateInputError(f"input {x!r} already revealed with value {seen!r}")
    points = state.points
    if not isinstance(x, MultiPoint):
        points = points.with_point(float(x), y)
    return LearnerState(state.history + ((x, y),), points)


def linint_predict(state: LearnerState, x: float) -> float:
    if isinstance(x, MultiPoint):
        raise DomainError("LININT is defined for single-variable inputs only")
    return evaluate(PiecewiseLinear(state.points), float(x))


def nn_predict(state: LearnerState, x) -> float:
    """Value at the least-index L1-nearest previous input; 0 with no history."""
    if not state.history:
        return 0.0
    if not isinstance(x, MultiPoint):
        x = MultiPoint((float(x),))
    best, best_dist = 0.0, np.inf
    for hx, hy in state.history:
        hx = hx if isinstance(hx, MultiPoint) else MultiPoint((float(hx),))
        dist = x.l1(hx)
        if dist < best_dist:  # strict: the earliest index keeps ties
            best, best_dist = hy, dist
    return best


class LinIntRegressor(RegressorMixin, BaseEstimator):
    """LININT as an online regressor on ``[0, 1]``.

    Predicts 0 before any data has been seen, otherwise the piecewise-linear
    interpolant through every pair seen so far (constant beyond the extreme
    inputs).
    """

    def fit(self, X, y):
        self.points_ = PointSet()
        return self.partial_fit(X, y)

    def partial_fit(self, X, y):
        X = check_inputs(X, d=1).ravel()
        y = check_targets(y, len(X))
        for u, v in zip(X, y):
            self.observe(u, v)
        return self

    def observe(self, x, y) -> None:
        """Add a single revealed pair without input validation."""
        self.points_ = getattr(self, "points_", PointSet()).with_point(float(x), float(y))
        self.n_features_in_ = 1

    @property
    def interpolant_(self) -> PiecewiseLinear:
        return PiecewiseLinear(getattr(self, "points_", PointSet()))

    def predict(self, X):
        X = check_inputs(X, d=1).ravel()
        return self.interpolant_(X)

    def predict_one(self, x: float) -> float:
        return evaluate(self.interpolant_, float(x))


class NearestNeighborRegressor(RegressorMixin, BaseEstimator):
    """Predicts the value at the least-index L1-nearest previously seen input.

    Ties in L1 distance go to the earliest input; 0 is predicted before any
    data has been seen.
    """

    def __init__(self, initial_capacity: int = 64):
        self.initial_capacity = initial_capacity

    def fit(self, X, y):
        for attr in ("X_seen_", "y_seen_", "n_seen_"):
            self.__dict__.pop(attr, None)
        return self.partial_fit(X, y)

    def partial_fit(self, X, y):
        X = check_inputs(X)
        y = check_targets(y, len(X))
        self._append(X, y)
        return self

    def _append(self, X: np.ndarray, y: np.ndarray) -> None:
        if not hasattr(self, "X_seen_"):
            cap = max(self.initial_capacity, len(X))
            self.X_seen_ = np.empty((cap, X.shape[1]))
            self.y_seen_ = np.empty(cap)
            self.n_seen_ = 0
            self.n_features_in_ = X.shape[1]
        elif X.shape[1] != self.n_features_in_:
            raise DomainError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        need = self.n_seen_ + len(X)
        if need > len(self.y_seen_):
            cap = max(need, 2 * len(self.y_seen_))
            self.X_seen_ = np.resize(self.X_seen_, (cap, X.shape[1]))
            self.y_seen_ = np.resize(self.y_seen_, cap)
        self.X_seen_[self.n_seen_ : need] = X
        self.y_seen_[self.n_seen_ : need] = y
        self.n_seen_ = need

    def predict(self, X):
        X = check_inputs(X)
        n = getattr(self, "n_seen_", 0)
        if n == 0:
            return np.zeros(len(X))
        seen = self.X_seen_[:n]
        dist = np.abs(X[:, None, :] - seen[None, :, :]).sum(axis=2)
        # argmin returns the first minimiser, i.e. the least index
        return self.y_seen_[:n][np.argmin(dist, axis=1)]

    def observe(self, x, y) -> None:
        """Add a single revealed pair without input validation."""
        self._append(np.asarray(x, dtype=float).reshape(1, -1), np.array([float(y)]))

    def predict_one(self, x) -> float:
        n = getattr(self, "n_seen_", 0)
        if n == 0:
            return 0.0
        x = np.asarray(x, dtype=float).ravel()
        dist = np.abs(self.X_seen_[:n] - x).sum(axis=1)
        return float(self.y_seen_[int(np.argmin(dist))])


def zero_guess(x, history) -> float:
    return 0.0


def linint_guess(x, history) -> float:
    """Stateless LININT guess; rebuilds the interpolant from ``history``."""
    return evaluate(PiecewiseLinear.from_pairs(history), float(x))


def diagonal_linint_guess(x, history) -> float:
    """LININT on the first coordinate of diagonal inputs ``x * (1, ..., 1)``."""
    first = lambda p: float(np.asarray(p, dtype=float).ravel()[0])
    return linint_guess(first(x), tuple((first(hx), hy) for hx, hy in history))


def random_guess(rng: np.random.Generator, low: float = -1.0, high: float = 1.0) -> GuessFn:
    def guess(x, history) -> float:
        return float(rng.uniform(low, high))

    return guess


class EstimatorGuess:
    """Adapts an online estimator to the guess-function protocol.

    Pairs revealed since the previous call are fed through ``partial_fit``
    before predicting, so the estimator never sees a value before guessing it.
    """

    def __init__(self, estimator):
        self.estimator = estimator
        self._fed = 0

    def __call__(self, x, history: Sequence) -> float:
        for hx, hy in history[self._fed :]:
            self.estimator.observe(np.asarray(hx, dtype=float), hy)
        self._fed = len(history)
        return float(self.estimator.predict_one(np.asarray(x, dtype=float)))


def make_learner(name: str, **params):
    if name == "linint":
        return LinIntRegressor()
    if name == "nn":
        return NearestNeighborRegressor(**params)
    raise DomainError(f"unknown learner {name!r}; expected 'linint' or 'nn'")
