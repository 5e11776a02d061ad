"""Probability of missing the production target as processing times grow.

Failure means the realised capacity falls strictly below demand.  Under the
normal predictive ``y ~ N(mu, s^2)`` that is ``Phi((demand - mu) / s)``.
Two estimators are provided:

* ``plug-in``: one normal with posterior-mean coefficients and mean sigma2.
* ``monte-carlo``: the average of ``Phi((demand - x.b_s) / sigma_s)`` over
  retained chain states, which keeps coefficient uncertainty.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy.special import ndtr, ndtri

from .gibbs import PosteriorChain, PosteriorSummary, summarize

ESTIMATORS = ("plug-in", "monte-carlo")
DEFAULT_GRID = np.arange(0, 101)
DEFAULT_GROWTH_RATE = 0.01  # fractional growth per unit of t (percent)

Model = Union[PosteriorSummary, PosteriorChain]


@dataclass(frozen=True)
class GrowthScenario:
    baseline: np.ndarray
    t: float
    growth_rate: float = DEFAULT_GROWTH_RATE

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("growth t must be nonnegative")

    @property
    def factor(self) -> float:
        return 1.0 + self.growth_rate * self.t

    @property
    def scaled(self) -> np.ndarray:
        return np.asarray(self.baseline, dtype=float) * self.factor


@dataclass(frozen=True, eq=False)
class FailureCurve:
    t: np.ndarray
    p_fail: np.ndarray
    demand: float
    estimator: str = "plug-in"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        p = np.asarray(self.p_fail, dtype=float)
        if t.ndim != 1 or t.shape != p.shape or t.size == 0:
            raise ValueError("t and p_fail must be equal-length nonempty vectors")
        if np.any(np.diff(t) <= 0):
            raise ValueError("t must be strictly increasing")
        if not np.all((p >= 0) & (p <= 1)):
            raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p_fail", p)

    def __len__(self):
        return self.t.size

    def covers(self, t: float) -> bool:
        return bool(self.t[0] <= t <= self.t[-1])

    def at(self, t: float) -> float:
        """Linear interpolation between adjacent grid points."""
        if not self.covers(t):
            raise ValueError(
                f"growth {t}% is outside the curve grid [{self.t[0]}, {self.t[-1]}]"
            )
        return float(np.interp(t, self.t, self.p_fail))

    def is_nondecreasing(self) -> bool:
        return bool(np.all(np.diff(self.p_fail) >= 0))

    def to_csv(self, path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            fh.write("t_percent,p_failure\n")
            for t, p in zip(self.t, self.p_fail):
                fh.write(f"{float(t)!r},{float(p)!r}\n")

    @classmethod
    def from_csv(cls, path, demand: float = float("nan"), estimator: str = "plug-in"):
        path = Path(path)
        with path.open(encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "t_percent,p_failure":
                raise ValueError(f"{path}: expected header 't_percent,p_failure', got {header!r}")
            rows = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(rows[:, 0], rows[:, 1], demand, estimator)

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "demand": self.demand,
            **self.meta,
            "points": [
                {"t_percent": float(t), "p_failure": float(p)}
                for t, p in zip(self.t, self.p_fail)
            ],
        }

    def to_json(self, path, extra: dict | None = None) -> None:
        doc = self.to_dict()
        if extra:
            doc.update(extra)
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _check_x(model_m: int, x: np.ndarray) -> None:
    if x.shape != (model_m,):
        raise ValueError(f"predictor vector has {x.size} entries, model expects {model_m}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("predictor values must be finite and nonnegative")


def _as_summary(model: Model) -> PosteriorSummary:
    return summarize(model) if isinstance(model, PosteriorChain) else model


def _state_subset(chain: PosteriorChain, mc_draws: int, seed) -> np.ndarray:
    # every state when the chain is short enough, else a seeded subsample
    if mc_draws >= len(chain):
        return chain.samples
    idx = np.random.default_rng(seed).choice(len(chain), size=mc_draws, replace=False)
    return chain.samples[np.sort(idx)]


def _plugin_probs(summary: PosteriorSummary, factors: np.ndarray, baseline: np.ndarray, demand: float):
    sd = math.sqrt(summary.predictive_variance) if summary.predictive_variance > 0 else 0.0
    if not sd > 0:
        raise ValueError("predictive variance must be positive")
    b = summary.coefficient_means
    # y_hat is affine in the growth factor, so monotone whenever x.b has one sign
    y_hat = b[0] + factors * float(baseline @ b[1:])
    return ndtr((demand - y_hat) / sd)


def _mc_probs(states: np.ndarray, factors: np.ndarray, baseline: np.ndarray, demand: float):
    sig = np.sqrt(states[:, -1])
    if np.any(sig <= 0):
        raise ValueError("chain contains non-positive sigma2")
    slope_part = states[:, 1:-1] @ baseline
    y_hat = states[:, 0][None, :] + factors[:, None] * slope_part[None, :]
    return ndtr((demand - y_hat) / sig[None, :]).mean(axis=1)


def failure_probability(
    model: Model,
    x,
    demand: float,
    estimator: str = "plug-in",
    mc_draws: int = 100_000,
    seed=None,
) -> float:
    """P(capacity < demand) at predictor vector ``x``.

    ``monte-carlo`` needs a :class:`PosteriorChain`; it averages over all
    retained states, or over ``mc_draws`` states sampled without replacement
    when the chain is longer.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}")
    if not demand > 0:
        raise ValueError("demand must be positive")
    x = np.asarray(x, dtype=float)
    one = np.ones(1)
    if estimator == "plug-in":
        summary = _as_summary(model)
        _check_x(summary.m, x)
        return float(_plugin_probs(summary, one, x, demand)[0])
    if not isinstance(model, PosteriorChain):
        raise TypeError("the monte-carlo estimator needs a PosteriorChain")
    _check_x(model.samples.shape[1] - 2, x)
    return float(_mc_probs(_state_subset(model, mc_draws, seed), one, x, demand)[0])


def failure_curve(
    model: Model,
    baseline,
    demand: float,
    t_grid=None,
    estimator: str = "plug-in",
    seed=None,
    growth_rate: float = DEFAULT_GROWTH_RATE,
    mc_draws: int = 100_000,
) -> FailureCurve:
    """Evaluate P(Failure) at ``baseline * (1 + growth_rate * t)`` for each t.

    The default grid is t = 0, 1, ..., 100 (percent).  The Monte Carlo
    estimator uses the same chain states at every grid point.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}")
    if not demand > 0:
        raise ValueError("demand must be positive")
    t = np.asarray(DEFAULT_GRID if t_grid is None else t_grid, dtype=float)
    if np.any(t < 0):
        raise ValueError("growth grid must be nonnegative")
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0):
        raise ValueError("growth grid must be strictly increasing")
    baseline = np.asarray(baseline, dtype=float)
    if np.any(baseline <= 0):
        raise ValueError("baseline durations must be positive")
    factors = 1.0 + growth_rate * t

    if estimator == "plug-in":
        summary = _as_summary(model)
        _check_x(summary.m, baseline)
        p = _plugin_probs(summary, factors, baseline, demand)
        slopes = summary.coefficient_means[1:]
        if np.all(slopes <= 0) and np.any(np.diff(p) < 0):
            raise ArithmeticError("plug-in curve lost monotonicity")
    else:
        if not isinstance(model, PosteriorChain):
            raise TypeError("the monte-carlo estimator needs a PosteriorChain")
        _check_x(model.samples.shape[1] - 2, baseline)
        p = _mc_probs(_state_subset(model, mc_draws, seed), factors, baseline, demand)

    return FailureCurve(
        t, np.clip(p, 0.0, 1.0), float(demand), estimator,
        meta={"growth_rate": growth_rate, "baseline": baseline.tolist()},
    )


def consistency_baseline(
    summary: PosteriorSummary,
    demand: float,
    growth: float,
    target_p: float,
    growth_rate: float = DEFAULT_GROWTH_RATE,
) -> np.ndarray:
    """Equal-valued baseline whose plug-in P(Failure) at ``growth`` is ``target_p``.

    Useful when only a published model and failure probability are known and
    the baseline times are not.
    """
    b = summary.coefficient_means
    slope_sum = float(b[1:].sum())
    if slope_sum == 0:
        raise ValueError("all slopes are zero; growth cannot change P(Failure)")
    y_target = demand - ndtri(target_p) * math.sqrt(summary.predictive_variance)
    c = (y_target - b[0]) / ((1.0 + growth_rate * growth) * slope_sum)
    if not c > 0:
        raise ValueError("no positive baseline reaches the target probability")
    return np.full(b.size - 1, c)
