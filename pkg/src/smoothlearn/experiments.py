"""Named experiments that measure learner loss against closed-form floors and ceilings.

Each experiment maps one parameter point and one replicate to a summary row
carrying the measured total p-error together with the closed-form floor and
ceiling it is checked against, so rows can be re-audited without
recomputation.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from .adversaries import (
    BinarySplitAdversary,
    BinarySplitConfig,
    DyadicAdversary,
    DyadicConfig,
    ExpAdversary,
    ExpAdversaryConfig,
    GridAdversary,
    GridConfig,
    make_adversary,
)
from .arena import (
    LossParams,
    as_guess_fn,
    diagnostics,
    play_fixed_target,
    random_inputs,
    random_target,
    random_tensor_target,
    total_loss,
)
from .bounds import bound_value, grid_side
from .exceptions import ConfigError, OutOfRegionError
from .funcrep import INFINITY
from .learners import (
    LinIntRegressor,
    NearestNeighborRegressor,
    diagonal_linint_guess,
    random_guess,
    zero_guess,
)

TOL = 1e-9
FLOOR_TOL = 1e-12
COLUMNS = (
    "experiment", "p", "q", "d", "m", "epsilon", "n", "seed", "replicate",
    "measured_loss", "floor", "ceiling", "passed",
)
OUT_ENV = "SMOOTHLEARN_OUT"


@dataclass
class ExperimentConfig:
    experiment: str
    p: list = field(default_factory=list)
    q: list = field(default_factory=list)
    d: list = field(default_factory=list)
    m: list = field(default_factory=list)
    epsilon: list = field(default_factory=list)
    n: list = field(default_factory=list)
    stages: int = 10
    trials: int = 200
    learner: str | None = None
    adversary: str | None = None
    seed: int = 0
    replicates: int = 1
    out: str | None = None
    transcripts: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: unknown name {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ConfigError(f"replicates: must be a positive integer, got {self.replicates!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed: must fit in 64 bits, got {self.seed!r}")
        if self.trials < 2:
            raise ConfigError(f"trials: need at least 2, got {self.trials!r}")
        for name in ("p", "q", "d", "m", "epsilon", "n"):
            value = getattr(self, name)
            if value is None:
                setattr(self, name, [])
            elif not isinstance(value, (list, tuple)):
                setattr(self, name, [value])

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**data)

    def grid(self) -> list[dict]:
        spec = EXPERIMENTS[self.experiment]
        axes = {}
        for name in spec.axes:
            values = getattr(self, name) or spec.defaults.get(name, [])
            if not values:
                raise ConfigError(f"{name}: empty parameter grid for experiment {self.experiment!r}")
            axes[name] = sorted(values)
        return [dict(zip(axes, combo)) for combo in itertools.product(*axes.values())]


@dataclass
class Row:
    experiment: str
    p: float
    q: float
    d: int
    m: int | None
    seed: int
    replicate: int
    measured_loss: float
    floor: float = math.nan
    ceiling: float = math.nan
    passed: bool = True
    epsilon: float | None = None
    n: int | None = None


@dataclass
class Game:
    """One experiment game: its row plus what to dump to a transcript file."""

    row: Row
    dump: dict | None = None


def _guess_learner(name: str, d: int, rng: np.random.Generator):
    if name == "linint":
        return LinIntRegressor() if d == 1 else diagonal_linint_guess
    if name == "nn":
        return NearestNeighborRegressor()
    if name == "zero":
        return zero_guess
    if name == "random":
        return random_guess(rng)
    raise ConfigError(f"learner: unknown name {name!r}; choose from linint, nn, zero, random")


def _maybe(name: str, params: LossParams, **kw) -> float:
    try:
        return bound_value(name, params, **kw).value
    except OutOfRegionError:
        return math.nan


def _check(measured: float, floor: float, ceiling: float) -> bool:
    ok = True
    if not math.isnan(floor):
        ok &= measured >= floor - FLOOR_TOL
    if not math.isnan(ceiling):
        ok &= measured <= ceiling + TOL
    return bool(ok)


def _adversarial_game(exp, cfg, point, seed, rep, rng, adversary, params, learner_name, ceiling=math.nan):
    learner = _guess_learner(learner_name, params.d, rng)
    outcome = adversary.play(as_guess_fn(learner), params)
    tr = outcome.transcript
    measured = total_loss(tr, params.p)
    floor = outcome.floor
    passed = outcome.witness_ok and _check(measured, floor, ceiling)
    row = Row(exp, params.p, params.q, params.d, params.m, seed, rep, measured, floor, ceiling, passed)
    dump = {**tr.to_json(), "witness": outcome.witness.to_json(), "witness_ok": outcome.witness_ok}
    return Game(row, dump), outcome


def _fixed_games(exp, cfg, point, seed, rep, rng, params, target, learner, floor, ceiling):
    inputs = random_inputs(rng, cfg.trials, params.d)
    tr = play_fixed_target(learner, target, inputs, params)
    measured = total_loss(tr, params.p)
    row = Row(exp, params.p, params.q, params.d, params.m, seed, rep, measured, floor, ceiling, _check(measured, math.nan, ceiling))
    return Game(row, tr.to_json()), tr


# -- experiment bodies ------------------------------------------------------


def _sandwich2q(cfg, point, seed, rep, rng):
    q = point["q"]
    params = LossParams(p=2.0, q=q)
    target = random_target(rng, q)
    learner = _guess_learner(cfg.learner or "linint", 1, rng)
    game, _ = _fixed_games("sandwich2q", cfg, point, seed, rep, rng, params, target, learner,
                           bound_value("2qlow", params).value, bound_value("2qup", params).value)
    return [game]


def _pq_exact(cfg, point, seed, rep, rng):
    q = point["q"]
    p = point["p"]
    if p is None:
        p = 2.0 if q >= 2.0 else 2.0 + 1.0 / (q - 1.0)
    params = LossParams(p=p, q=q)
    target = random_target(rng, q)
    learner = _guess_learner(cfg.learner or "linint", 1, rng)
    game, _ = _fixed_games("pq_exact", cfg, point, seed, rep, rng, params, target, learner,
                           1.0, bound_value("pq_exact", params).value)
    return [game]


def _holder(cfg, point, seed, rep, rng):
    p = point["p"]
    params = LossParams(p=p, q=2.0)
    target = random_target(rng, 2.0)
    learner = _guess_learner(cfg.learner or "linint", 1, rng)
    floor = _maybe("dyadic", params)
    game, tr = _fixed_games("holder", cfg, point, seed, rep, rng, params, target, learner,
                            floor, bound_value("holder", params).value)
    r = p / (2.0 - p)
    diag = diagnostics(tr, [r])
    game.row.passed &= bool(
        diag.ratio_sum <= 1.0 + TOL and diag.power_sums[r] <= 1.0 + 1.0 / (2.0**r - 2.0) + TOL
    )
    return [game]


def _nnupper(cfg, point, seed, rep, rng):
    d, p = int(point["d"]), point["p"]
    params = LossParams(p=p, q=INFINITY, d=d)
    target = random_tensor_target(rng, d)
    learner = _guess_learner(cfg.learner or "nn", d, rng)
    game, _ = _fixed_games("nnupper", cfg, point, seed, rep, rng, params, target, learner,
                           math.nan, bound_value("nnupper", params).value)
    return [game]


def _pqlow(cfg, point, seed, rep, rng):
    p, q = point["p"], point["q"]
    name = cfg.learner or "linint"
    params = LossParams(p=p, q=q)
    ceiling = 1.0 / (q - 1.0) if name == "linint" and p >= 2.0 else math.nan
    adv = BinarySplitAdversary(BinarySplitConfig(p=p, q=q))
    game, _ = _adversarial_game("pqlow", cfg, point, seed, rep, rng, adv, params, name, ceiling)
    return [game]


def _dyadic(cfg, point, seed, rep, rng):
    eps = point["epsilon"]
    name = cfg.learner or "linint"
    dcfg = DyadicConfig(epsilon=eps, stages=cfg.stages)
    params = LossParams(p=dcfg.p)
    ceiling = bound_value("holder", params).value if name == "linint" else math.nan
    game, outcome = _adversarial_game("dyadic", cfg, point, seed, rep, rng, DyadicAdversary(dcfg), params, name, ceiling)
    info = outcome.info
    commits_ok = all(c >= 2 ** (i - 2) for i, c in enumerate(info["commits"], start=1) if i >= 2)
    budget_ok = all(j2 <= bound + FLOOR_TOL and j2 <= 0.25 for _, _, j2, bound in info["budget_log"])
    game.row.passed &= commits_ok and budget_ok
    return [game]


def _grid(cfg, point, seed, rep, rng):
    n, d, p = int(point["n"]), int(point["d"]), point["p"]
    name = cfg.learner or "nn"
    params = LossParams(p=p, d=d)
    ceiling = math.nan
    if name == "nn":
        if p > d:
            ceiling = bound_value("nnupper", params).value
        elif p < d:
            ceiling = bound_value("boundedm_upper_finite", LossParams(p=p, d=d, m=n**d)).value
    adv = GridAdversary(GridConfig(n=n, d=d, p=p), check_seed=seed)
    game, _ = _adversarial_game("grid", cfg, point, seed, rep, rng, adv, params, name, ceiling)
    return [game]


def _boundedm(cfg, point, seed, rep, rng):
    d, p, m = int(point["d"]), point["p"], int(point["m"])
    name = cfg.learner or "nn"
    params = LossParams(p=p, d=d, m=m)
    n = grid_side(m, d)
    ceiling = bound_value("boundedm_upper_finite", params).value if name == "nn" else math.nan
    adv = GridAdversary(GridConfig(n=n, d=d, p=p), check_seed=seed)
    game, _ = _adversarial_game("boundedm", cfg, point, seed, rep, rng, adv, params, name, ceiling)
    return [game]


def _exp(cfg, point, seed, rep, rng):
    eps = point["epsilon"]
    p = point["p"]
    name = cfg.learner or "linint"
    params = LossParams(p=p)
    adv = ExpAdversary(ExpAdversaryConfig(epsilon=eps))
    game, _ = _adversarial_game("exp", cfg, point, seed, rep, rng, adv, params, name)
    return [game]


def _lift(cfg, point, seed, rep, rng):
    d, p = int(point["d"]), point["p"]
    inner = cfg.adversary or "lift:twopoint"
    if not inner.startswith("lift:"):
        inner = "lift:" + inner
    adv = make_adversary(inner, d=d, p=p)
    params = LossParams(p=p, d=d)
    name = cfg.learner or "linint"
    game, _ = _adversarial_game("lift", cfg, point, seed, rep, rng, adv, params, name)
    return [game]


@dataclass(frozen=True)
class ExperimentSpec:
    run: Callable
    axes: tuple
    defaults: dict
    description: str


EXPERIMENTS = {
    "sandwich2q": ExperimentSpec(_sandwich2q, ("q",), {"q": [1.5]},
                                 "LININT total 2-error on random F_q targets; ceiling 1/(q-1), floor q/(8e ln2 (q-1))"),
    "pq_exact": ExperimentSpec(_pq_exact, ("q", "p"), {"q": [1.5], "p": [None]},
                               "LININT total p-error on random F_q targets with p >= 2 + 1/(q-1); ceiling 1"),
    "holder": ExperimentSpec(_holder, ("p",), {"p": [1.1, 1.5]},
                             "LININT total p-error on random F_2 targets; Hoelder ceiling"),
    "nnupper": ExperimentSpec(_nnupper, ("d", "p"), {"d": [2], "p": [3.0]},
                              "nearest-neighbour total p-error on random tensor-sum targets; ceiling for p > d"),
    "pqlow": ExperimentSpec(_pqlow, ("p", "q"), {"p": [2.0], "q": [1.5]},
                            "binary-split adversary floor b^p + k (b/2)^p"),
    "dyadic": ExperimentSpec(_dyadic, ("epsilon",), {"epsilon": [0.25]},
                             "dyadic multi-stage adversary floor on F_inf with p = 1 + epsilon"),
    "grid": ExperimentSpec(_grid, ("n", "d", "p"), {"n": [8], "d": [2], "p": [1.0]},
                           "grid adversary floor n^(d-p) / 2^p on F_inf,d"),
    "boundedm": ExperimentSpec(_boundedm, ("d", "p", "m"), {"d": [2], "p": [1.0], "m": [16, 64, 256, 1024, 4096]},
                               "grid adversary with a trial budget m; loss grows like m^(1-p/d)"),
    "exp": ExperimentSpec(_exp, ("epsilon", "p"), {"epsilon": [0.5, 0.1, 0.01], "p": [2.0]},
                          "two-trial exponential-family adversary; floor (gap/2)^p"),
    "lift": ExperimentSpec(_lift, ("d", "p"), {"d": [2, 3], "p": [2.0]},
                           "single-variable adversary lifted to the diagonal; floor d^p times the inner floor"),
}


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope)


def run_experiment(cfg: ExperimentConfig) -> list[Row]:
    spec = EXPERIMENTS[cfg.experiment]
    points = cfg.grid()
    games: list[tuple[tuple, int, Game]] = []
    for idx, point in enumerate(points):
        for rep in range(cfg.replicates):
            seed = cfg.seed + rep
            rng = np.random.default_rng([cfg.seed, idx, rep])
            for game in spec.run(cfg, point, seed, rep, rng):
                game.row.epsilon = point.get("epsilon")
                game.row.n = point.get("n")
                games.append((tuple(point.values()), rep, game))
    games.sort(key=lambda item: (item[0], item[1]))
    rows = [g.row for _, _, g in games]
    if cfg.experiment == "boundedm":
        rows.extend(_slope_rows(cfg, rows))
    if cfg.out:
        emit_report(rows, cfg.out, cfg.experiment, spec.description)
        if cfg.transcripts:
            tdir = Path(cfg.out) / "transcripts"
            tdir.mkdir(parents=True, exist_ok=True)
            for k, (_, rep, game) in enumerate(games):
                if game.dump is not None:
                    path = tdir / f"{cfg.experiment}_{k:04d}_r{rep}.json"
                    path.write_text(json.dumps(game.dump, indent=1, sort_keys=True))
    return rows


def _slope_rows(cfg, rows: list[Row]) -> list[Row]:
    out = []
    by_key: dict = {}
    for r in rows:
        by_key.setdefault((r.d, r.p, r.replicate), []).append(r)
    for (d, p, rep), group in sorted(by_key.items()):
        if len({r.m for r in group}) < 2:
            continue
        slope = loglog_slope([r.m for r in group], [r.measured_loss for r in group])
        target = 1.0 - p / d
        out.append(Row("boundedm_slope", p, INFINITY, d, None, group[0].seed, rep, slope,
                       target - 0.1, target + 0.1, abs(slope - target) <= 0.1))
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        if math.isinf(value):
            return "inf"
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[Row]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        data = asdict(row)
        writer.writerow([_fmt(data[c]) for c in COLUMNS])
    return buf.getvalue()


def emit_report(rows: list[Row], out_dir, experiment: str, description: str = "") -> Path:
    if not rows:
        raise ConfigError("no rows to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{experiment}.csv"
    path.write_text(rows_to_csv(rows))
    meta = {"experiment": experiment, "description": description, "columns": list(COLUMNS)}
    (out / f"{experiment}.meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True))
    return path


def default_out_dir() -> str | None:
    return os.environ.get(OUT_ENV)
