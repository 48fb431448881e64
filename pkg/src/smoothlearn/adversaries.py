"""Adversary constructions for the online prediction game.

Every adversary talks to the learner through a guess function
``guess(x, history) -> float`` and, after the game, hands back a witness: a
function from the advertised class that agrees with every revealed value.
When two candidate values are equally far from the learner's guess the
upper one is revealed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .arena import LossParams, Recorder, Transcript
from .exceptions import ConfigError, DomainError
from .funcrep import (
    CLASS_TOL,
    INFINITY,
    PiecewiseLinear,
    PointSet,
    SmoothnessClass,
    TensorSum,
    action,
    action_increment,
    evaluate,
)

SLOPE_TOL = 1e-9


@dataclass(frozen=True)
class Outcome:
    transcript: Transcript
    witness: object
    floor: float
    witness_ok: bool
    info: dict = field(default_factory=dict)


def _farther(yhat: float, upper: float, lower: float) -> float:
    return upper if abs(yhat - upper) >= abs(yhat - lower) else lower


def _params(params: LossParams | None, p: float, q: float, d: int = 1) -> LossParams:
    if params is None:
        return LossParams(p=p, q=q, d=d)
    return LossParams(p=params.p, q=q, d=d, m=params.m)


# -- two-point --------------------------------------------------------------


class TwoPointAdversary:
    """Reveal ``f(0) = 0``, then ``f(1) = +-1`` away from the guess (witness ``+-x``)."""

    name = "twopoint"
    d = 1

    def floor(self, p: float, m: int | None = None) -> float:
        return 1.0

    def play(self, guess_fn, params: LossParams | None = None) -> Outcome:
        params = _params(params, 2.0, INFINITY)
        rec = Recorder(guess_fn, params)
        rec.reveal(0.0, rec.ask(0.0), 0.0)
        yhat = rec.ask(1.0)
        y = _farther(yhat, 1.0, -1.0)
        rec.reveal(1.0, yhat, y)
        witness = PiecewiseLinear.from_pairs([(0.0, 0.0), (1.0, y)])
        ok = witness.in_class(SmoothnessClass(INFINITY))
        return Outcome(rec.transcript(), witness, self.floor(params.p), ok)


def twopoint_play(guess_fn, params: LossParams | None = None) -> Transcript:
    return TwoPointAdversary().play(guess_fn, params).transcript


# -- binary split -----------------------------------------------------------


@dataclass(frozen=True)
class BinarySplitConfig:
    p: float = 2.0
    q: float = 1.5
    b: float | None = None

    def __post_init__(self):
        if not self.p > 1.0:
            raise DomainError(f"p must be > 1, got {self.p!r}")
        if not 1.0 < self.q < 2.0:
            raise DomainError(f"q must lie in (1, 2), got {self.q!r}")
        if self.b is None:
            object.__setattr__(self, "b", math.exp(-1.0 / self.p))
        if not 0.0 < self.b < 1.0:
            raise DomainError(f"b must lie in (0, 1), got {self.b!r}")

    @property
    def k(self) -> int:
        """Number of bisection trials; chosen so the witness keeps ``J_q <= 1``."""
        return math.floor(-self.q * math.log2(self.b) / (self.q - 1.0))

    @property
    def witness_action(self) -> float:
        return 2.0 ** (self.k * (self.q - 1.0)) * self.b**self.q

    def floor(self, p: float | None = None, splits: int | None = None) -> float:
        p = self.p if p is None else p
        splits = self.k if splits is None else splits
        return self.b**p + splits * (self.b / 2.0) ** p


class BinarySplitAdversary:
    """Reveal 0 at 0 and ``+-b`` at 1, then bisect the single sloped segment.

    Each bisection reveals whichever of the two plateau values is farther from
    the guess, so every bisection costs the learner at least ``b / 2``. The
    negative branch is the mirror image of the positive one.
    """

    name = "binsplit"
    d = 1

    def __init__(self, cfg: BinarySplitConfig | None = None):
        self.cfg = cfg or BinarySplitConfig()

    def floor(self, p: float, m: int | None = None) -> float:
        splits = self.cfg.k if m is None else max(min(self.cfg.k, m - 1), 0)
        return self.cfg.floor(p, splits)

    def play(self, guess_fn, params: LossParams | None = None) -> Outcome:
        cfg = self.cfg
        params = _params(params, cfg.p, cfg.q)
        rec = Recorder(guess_fn, params)
        rec.reveal(0.0, rec.ask(0.0), 0.0)
        yhat = rec.ask(1.0)
        top = _farther(yhat, cfg.b, -cfg.b)
        rec.reveal(1.0, yhat, top)
        lo, hi = 0.0, 1.0  # last input showing 0, first input showing top
        splits = 0
        for _ in range(cfg.k):
            if rec.exhausted:
                break
            x = (lo + hi) / 2.0
            yhat = rec.ask(x)
            y = _farther(yhat, max(0.0, top), min(0.0, top))
            rec.reveal(x, yhat, y)
            if y == 0.0:
                lo = x
            else:
                hi = x
            splits += 1
        witness = PiecewiseLinear.from_pairs(rec.history)
        ok = action(witness, cfg.q) <= 1.0 + CLASS_TOL
        info = {"k": cfg.k, "b": cfg.b, "splits": splits, "witness_action": action(witness, cfg.q)}
        return Outcome(rec.transcript(), witness, cfg.floor(params.p, splits), ok, info)


def binsplit_play(cfg: BinarySplitConfig, guess_fn, params: LossParams | None = None):
    out = BinarySplitAdversary(cfg).play(guess_fn, params)
    return out.transcript, out.witness


# -- dyadic multi-stage -----------------------------------------------------


@dataclass(frozen=True)
class DyadicConfig:
    epsilon: float = 0.25
    stages: int = 10

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise DomainError(f"epsilon must lie in (0, 1/2), got {self.epsilon!r}")
        if int(self.stages) != self.stages or self.stages < 1:
            raise DomainError(f"stages must be a positive integer, got {self.stages!r}")

    @property
    def p(self) -> float:
        return 1.0 + self.epsilon

    def amplitude(self, i: int) -> float:
        """Perturbation size used throughout stage ``i``."""
        eps = self.epsilon
        return math.sqrt(eps) * (1.0 - eps) ** (i / 2.0) / 2.0 ** (i + 1)

    def threshold(self, i: int) -> float:
        return 2.0**-i

    def stage_inputs(self, i: int) -> list[float]:
        return [(2 * j + 1) / 2.0**i for j in range(2 ** (i - 1))]

    def budget(self, i: int, j: int) -> float:
        """Upper bound on ``J_2`` of the auxiliary interpolant after ``j`` trials of stage ``i``."""
        eps = self.epsilon
        base = eps / 4.0 * math.fsum((1.0 - eps) ** k for k in range(i))
        return base + j * eps * (1.0 - eps) ** i / 2.0 ** (i + 1)

    def floor(self, stages: int | None = None, p: float | None = None) -> float:
        stages = self.stages if stages is None else stages
        p = self.p if p is None else p
        return math.fsum(2.0 ** (k - 2) * self.amplitude(k) ** p for k in range(1, stages + 1))


class DyadicAdversary:
    """Multi-stage adversary on the dyadic grid against ``F_inf``.

    Stage ``i`` visits the odd multiples of ``2**-i``. Each trial proposes the
    current interpolant's value pushed by the stage amplitude away from the
    guess, and keeps it only if the slopes to both neighbours stay at most 1;
    otherwise it reveals the interpolant's own value.
    """

    name = "dyadic"
    d = 1

    def __init__(self, cfg: DyadicConfig | None = None):
        self.cfg = cfg or DyadicConfig()

    def floor(self, p: float, m: int | None = None) -> float:
        stages = self.cfg.stages
        if m is not None:
            stages = min(stages, int(math.floor(math.log2(m + 1))))
        return self.cfg.floor(stages, p)

    def play(self, guess_fn, params: LossParams | None = None) -> Outcome:
        cfg = self.cfg
        params = _params(params, cfg.p, INFINITY)
        rec = Recorder(guess_fn, params)
        f = PiecewiseLinear.from_pairs([(0.0, 0.0), (1.0, 0.0)])
        rec.reveal(1.0, rec.ask(1.0), 0.0)

        commits: list[int] = []
        fallbacks: list[int] = []
        budget_log: list[tuple[int, int, float, float]] = []
        complete = 0
        for i in range(1, cfg.stages + 1):
            a, thr = cfg.amplitude(i), cfg.threshold(i)
            g = f
            g_j2 = action(f, 2.0)
            n_commit = n_fallback = 0
            for j, x in enumerate(cfg.stage_inputs(i)):
                if rec.exhausted:
                    break
                yhat = rec.ask(x)
                base = evaluate(f, x)
                v = _farther(yhat, base + a, base - a)
                k = f.base.locate(x)
                left, right = f.base.vs[k - 1], f.base.vs[k]
                g_j2 += action_increment(g, x, v, 2.0)
                g = PiecewiseLinear(g.base.with_point(x, v))
                budget_log.append((i, j + 1, g_j2, cfg.budget(i, j + 1)))
                if abs(v - left) <= thr and abs(v - right) <= thr:
                    y = v
                    n_commit += 1
                else:
                    y = base
                    n_fallback += 1
                f = PiecewiseLinear(f.base.with_point(x, y))
                rec.reveal(x, yhat, y)
            commits.append(n_commit)
            fallbacks.append(n_fallback)
            if n_commit + n_fallback == 2 ** (i - 1):
                complete = i
            if rec.exhausted:
                break

        ok = f.max_slope() <= 1.0 + CLASS_TOL
        info = {
            "commits": commits,
            "fallbacks": fallbacks,
            "budget_log": budget_log,
            "stages_complete": complete,
        }
        return Outcome(rec.transcript(), f, cfg.floor(complete, params.p), ok, info)


def dyadic_play(cfg: DyadicConfig, guess_fn, params: LossParams | None = None):
    out = DyadicAdversary(cfg).play(guess_fn, params)
    return out.transcript, out.witness, out.info["commits"]


# -- d-dimensional grid -----------------------------------------------------


@dataclass(frozen=True)
class GridConfig:
    n: int = 4
    d: int = 2
    p: float = 1.0

    def __post_init__(self):
        for name in ("n", "d"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")
        if not self.p > 0.0:
            raise DomainError(f"p must be > 0, got {self.p!r}")

    @property
    def inputs(self) -> list[float]:
        """Odd multiples of ``1/(2n)`` in (0, 1)."""
        return [(2 * k + 1) / (2.0 * self.n) for k in range(self.n)]

    @property
    def trials(self) -> int:
        return self.n**self.d + 1

    def floor(self, p: float | None = None, scored: int | None = None) -> float:
        p = self.p if p is None else p
        scored = self.n**self.d if scored is None else scored
        return scored / (2.0 * self.n) ** p


def _tent(t: np.ndarray) -> np.ndarray:
    """``min({t}, {-t})``: distance from ``t`` to the nearest integer."""
    frac = t - np.floor(t)
    return np.minimum(frac, 1.0 - frac)


@dataclass(frozen=True)
class GridWitness:
    """``+-(1/n) min_i dist(n x_i, Z)`` with one sign per grid cell (default +)."""

    n: int
    d: int
    signs: dict

    @cached_property
    def sign_array(self) -> np.ndarray:
        arr = np.ones((self.n,) * self.d)
        for cell, s in self.signs.items():
            arr[cell] = s
        return arr

    def __call__(self, points) -> np.ndarray | float:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        cells = np.minimum(np.floor(self.n * pts).astype(int), self.n - 1)
        signs = self.sign_array[tuple(cells.T)]
        vals = signs * _tent(self.n * pts).min(axis=1) / self.n
        return float(vals[0]) if single else vals

    def to_json(self) -> dict:
        return {
            "kind": "grid",
            "n": self.n,
            "d": self.d,
            "signs": [[list(cell), s] for cell, s in sorted(self.signs.items())],
        }


def section_slopes(fn, d: int, rng: np.random.Generator, sections: int = 20, per_axis: int = 1000):
    """Largest difference quotient along sampled axis-parallel sections of ``fn``."""
    grid = np.linspace(0.0, 1.0, per_axis + 1)
    worst = 0.0
    for axis in range(d):
        for _ in range(sections):
            pts = np.tile(rng.uniform(0.0, 1.0, d), (len(grid), 1))
            pts[:, axis] = grid
            vals = np.asarray(fn(pts), dtype=float)
            worst = max(worst, float(np.max(np.abs(np.diff(vals)) / np.diff(grid))))
    return worst


class GridAdversary:
    """Visits the ``n**d`` cell centres of ``[0,1]^d`` and reveals ``+-1/(2n)`` away from the guess."""

    name = "grid"

    def __init__(self, cfg: GridConfig | None = None, check_seed: int = 0):
        self.cfg = cfg or GridConfig()
        self.check_seed = check_seed

    @property
    def d(self) -> int:
        return self.cfg.d

    def floor(self, p: float, m: int | None = None) -> float:
        scored = None if m is None else min(m, self.cfg.n**self.cfg.d)
        return self.cfg.floor(p, scored)

    def play(self, guess_fn, params: LossParams | None = None) -> Outcome:
        cfg = self.cfg
        params = _params(params, cfg.p, INFINITY, cfg.d)
        rec = Recorder(guess_fn, params)
        h = 1.0 / (2.0 * cfg.n)
        origin = np.zeros(cfg.d)
        rec.reveal(origin, rec.ask(origin), 0.0)
        signs = {}
        for cell in itertools.product(range(cfg.n), repeat=cfg.d):
            if rec.exhausted:
                break
            x = np.array([(2 * c + 1) * h for c in cell])
            yhat = rec.ask(x)
            y = _farther(yhat, h, -h)
            rec.reveal(x, yhat, y)
            signs[cell] = 1.0 if y > 0 else -1.0
        witness = GridWitness(cfg.n, cfg.d, signs)
        tr = rec.transcript()
        xs = np.array([np.asarray(t.x, dtype=float) for t in tr.trials])
        ys = np.array([t.y for t in tr.trials])
        agrees = bool(np.all(np.abs(witness(xs) - ys) <= 1e-12))
        slope = section_slopes(witness, cfg.d, np.random.default_rng(self.check_seed))
        ok = agrees and slope <= 1.0 + SLOPE_TOL
        info = {"max_section_slope": slope, "agrees": agrees}
        return Outcome(tr, witness, cfg.floor(params.p, rec.scored), ok, info)


def grid_play(cfg: GridConfig, guess_fn, params: LossParams | None = None):
    out = GridAdversary(cfg).play(guess_fn, params)
    return out.transcript, out.witness


# -- tensor-sum lift --------------------------------------------------------


class LiftedAdversary:
    """Runs a single-variable adversary on the diagonal of ``[0,1]^d``.

    Inputs become ``x * (1, ..., 1)`` and values are multiplied by ``d``; the
    witness is ``gamma(a) = sum_i f(a_i)``. The inner adversary faces the
    learner's guesses divided by ``d``, so every error is exactly ``d`` times
    an inner error.
    """

    def __init__(self, inner, d: int):
        if int(d) != d or d < 1:
            raise DomainError(f"d must be a positive integer, got {d!r}")
        if getattr(inner, "d", 1) != 1:
            raise DomainError("only single-variable adversaries can be lifted")
        self.inner = inner
        self.d = d

    @property
    def name(self) -> str:
        return f"lift:{self.inner.name}"

    def floor(self, p: float, m: int | None = None) -> float:
        return self.d**p * self.inner.floor(p, m)

    def play(self, guess_fn, params: LossParams | None = None) -> Outcome:
        d = self.d
        outer_guesses: list[float] = []

        def inner_guess(x, history):
            lifted = tuple((np.full(d, hx), d * hy) for hx, hy in history)
            g = float(guess_fn(np.full(d, x), lifted))
            outer_guesses.append(g)
            return g / d

        inner_params = None if params is None else LossParams(p=params.p, q=params.q, d=1, m=params.m)
        inner = self.inner.play(inner_guess, inner_params)
        itr = inner.transcript
        outer_params = LossParams(p=itr.params.p, q=itr.params.q, d=d, m=itr.params.m)
        rec = Recorder(guess_fn, outer_params)
        for t, g in zip(itr.trials, outer_guesses):
            rec.reveal(np.full(d, t.x), g, d * t.y)
        witness = TensorSum.repeated(inner.witness, d)
        ok = inner.witness_ok and witness.in_class(SmoothnessClass(itr.params.q, d))
        return Outcome(rec.transcript(), witness, d**outer_params.p * inner.floor, ok, {"inner": inner.info})


def lift_adversary(inner, d: int) -> LiftedAdversary:
    return LiftedAdversary(inner, d)


# -- exponential family -----------------------------------------------------


@dataclass(frozen=True)
class ExpAdversaryConfig:
    epsilon: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")

    @property
    def rho(self) -> float:
        return 1.0 - (1.0 - self.epsilon) ** (1.0 / (1.0 - self.epsilon))

    @property
    def start(self) -> float:
        """Value revealed at 0, shared by both candidate exponentials."""
        return -(1.0 - self.epsilon) / math.log1p(-self.epsilon)

    @property
    def upper(self) -> "ExpWitness":
        a = -math.log1p(-self.epsilon)
        return ExpWitness(a, math.log1p(-self.epsilon) - math.log(a))

    @property
    def lower(self) -> "ExpWitness":
        # ln(1 - rho) in closed form; 1 - rho itself underflows for eps near 1
        a = math.log1p(-self.epsilon) / (1.0 - self.epsilon)
        return ExpWitness(a, -math.log(-a))

    @property
    def gap(self) -> float:
        return self.upper(1.0) - self.lower(1.0)


@dataclass(frozen=True)
class ExpWitness:
    """``f(x) = exp(a x + b)``."""

    a: float
    b: float

    def __call__(self, x):
        return np.exp(self.a * np.asarray(x, dtype=float) + self.b) if np.ndim(x) else math.exp(self.a * x + self.b)

    def derivative(self, x):
        return self.a * self(x)

    def derivative_range(self, samples: int = 1000) -> tuple[float, float]:
        d = self.derivative(np.linspace(0.0, 1.0, samples))
        return float(d.min()), float(d.max())

    def to_json(self) -> dict:
        return {"kind": "exp", "a": self.a, "b": self.b}


class ExpAdversary:
    """Two-trial adversary against exponentials ``exp(a x + b)`` with ``|f'| <= 1``.

    Both candidates agree at 0; at 1 the adversary reveals whichever
    candidate is farther from the guess.
    """

    name = "exp"
    d = 1

    def __init__(self, cfg: ExpAdversaryConfig | None = None):
        self.cfg = cfg or ExpAdversaryConfig()

    def floor(self, p: float, m: int | None = None) -> float:
        return (self.cfg.gap / 2.0) ** p

    def play(self, guess_fn, params: LossParams | None = None) -> Outcome:
        cfg = self.cfg
        params = _params(params, 2.0, INFINITY)
        rec = Recorder(guess_fn, params)
        rec.reveal(0.0, rec.ask(0.0), cfg.start)
        yhat = rec.ask(1.0)
        up, low = cfg.upper, cfg.lower
        witness = up if abs(yhat - up(1.0)) >= abs(yhat - low(1.0)) else low
        rec.reveal(1.0, yhat, witness(1.0))
        lo, hi = witness.derivative_range()
        ok = -1.0 - SLOPE_TOL <= lo and hi <= 1.0 + SLOPE_TOL
        info = {
            "rho": cfg.rho,
            "gap": cfg.gap,
            "candidates": {"upper": up.to_json(), "lower": low.to_json()},
        }
        return Outcome(rec.transcript(), witness, self.floor(params.p), ok, info)


def exp_play(cfg: ExpAdversaryConfig, guess_fn, params: LossParams | None = None) -> Transcript:
    return ExpAdversary(cfg).play(guess_fn, params).transcript


# -- registry ---------------------------------------------------------------


def make_adversary(name: str, **params):
    """Build an adversary by name: twopoint, binsplit, dyadic, grid, exp, lift:<inner>."""
    if name.startswith("lift:"):
        d = int(params.pop("d", 2))
        return LiftedAdversary(make_adversary(name[len("lift:") :], **params), d)
    if name == "twopoint":
        return TwoPointAdversary()
    if name == "binsplit":
        keys = ("p", "q", "b")
        return BinarySplitAdversary(BinarySplitConfig(**{k: params[k] for k in keys if params.get(k) is not None}))
    if name == "dyadic":
        keys = ("epsilon", "stages")
        return DyadicAdversary(DyadicConfig(**{k: params[k] for k in keys if params.get(k) is not None}))
    if name == "grid":
        keys = ("n", "d", "p")
        return GridAdversary(GridConfig(**{k: params[k] for k in keys if params.get(k) is not None}))
    if name == "exp":
        return ExpAdversary(ExpAdversaryConfig(**({"epsilon": params["epsilon"]} if params.get("epsilon") else {})))
    raise ConfigError(f"unknown adversary {name!r}")


def witness_to_json(witness) -> object:
    return witness.to_json()
