"""Critical growth value, fidelity banding and the end-to-end pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np

from . import synth
from .dataset import ObservationDataset
from .failure import FailureCurve, failure_curve
from .gibbs import PosteriorChain, run_chain
from .priors import PriorSpec, estimate_priors


class FidelityLevel(str, Enum):
    OPERATIONAL = "Operational"
    TACTICAL = "Tactical"
    STRATEGIC = "Strategic"

    @property
    def rank(self) -> int:
        return _RANK[self]

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self]


_RANK = {FidelityLevel.OPERATIONAL: 0, FidelityLevel.TACTICAL: 1, FidelityLevel.STRATEGIC: 2}
EXIT_CODES = {FidelityLevel.OPERATIONAL: 0, FidelityLevel.TACTICAL: 2, FidelityLevel.STRATEGIC: 3}


@dataclass(frozen=True)
class DecisionConfig:
    m_max: float  # workers the layout can hold
    demand: float  # trays per day
    shift_minutes: float = 420.0
    tactical_floor: float = 1.0  # percent

    def __post_init__(self):
        for name in ("m_max", "demand", "shift_minutes", "tactical_floor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class FidelityDecision:
    level: FidelityLevel
    observed_growth: float
    k_critical: float
    p_failure_at_k: float

    def to_dict(self) -> dict:
        return {
            "level": self.level.value,
            "observed_growth": self.observed_growth,
            "k_critical": self.k_critical,
            "p_failure_at_k": self.p_failure_at_k,
        }

    def to_json(self, path, extra: dict | None = None) -> None:
        doc = self.to_dict()
        if extra:
            doc.update(extra)
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def critical_value(config: DecisionConfig) -> float:
    """K_critical = ((m_max * shift_minutes / D) - D) / D * 100, in percent."""
    d = config.demand
    if not d > 0:
        raise ValueError("demand must be positive")
    return ((config.m_max * config.shift_minutes / d) - d) / d * 100.0


def classify(growth: float, k_critical: float, tactical_floor: float = 1.0) -> FidelityLevel:
    if growth < 0:
        raise ValueError("observed growth must be nonnegative")
    if growth >= k_critical:
        return FidelityLevel.STRATEGIC
    if growth >= tactical_floor:
        return FidelityLevel.TACTICAL
    return FidelityLevel.OPERATIONAL


def decide(config: DecisionConfig, curve: FailureCurve, observed_growth: float) -> FidelityDecision:
    if observed_growth < 0:
        raise ValueError("observed growth must be nonnegative")
    k = critical_value(config)
    for label, value in (("observed growth", observed_growth), ("K_critical", k)):
        if not curve.covers(value):
            raise ValueError(
                f"{label} {value}% is outside the curve grid [{curve.t[0]}, {curve.t[-1]}]"
            )
    return FidelityDecision(
        level=classify(observed_growth, k, config.tactical_floor),
        observed_growth=float(observed_growth),
        k_critical=k,
        p_failure_at_k=curve.at(k),
    )


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineResult:
    data: ObservationDataset
    priors: PriorSpec
    chain: PosteriorChain
    curve: FailureCurve
    decision: FidelityDecision
    seeds: dict


def default_labor_provider(seed: int) -> ObservationDataset:
    """Stand-in for the labor-allocation simulation: a ``facility_like`` dataset."""
    return synth.generate(synth.facility_like(seed=seed), name="facility_like")


def _child_seeds(seed: int, names) -> dict:
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {nm: int(ss.generate_state(1)[0]) for nm, ss in zip(names, children)}


def run_pipeline(
    data: ObservationDataset | None,
    config: DecisionConfig,
    observed_growth: float,
    seed: int = 0,
    n_boot: int = 1000,
    sample_size: int = 500,
    iterations: int = 5000,
    burn_in: int = 1000,
    scan: str = "block",
    estimator: str = "plug-in",
    t_grid=None,
    labor_provider: Callable[[int], ObservationDataset] = default_labor_provider,
) -> PipelineResult:
    """Priors -> Gibbs chain -> failure curve -> decision, from one master seed.

    When ``data`` is None it is produced by ``labor_provider(seed)``.  The
    failure curve uses the dataset's predictor means as baseline.  A failure
    in any stage is re-raised as :class:`PipelineError` naming the stage.
    """
    seeds = _child_seeds(seed, ("data", "priors", "chain", "curve"))

    def stage(name, fn):
        try:
            return fn()
        except Exception as exc:  # noqa: BLE001 - tag and re-raise
            raise PipelineError(name, exc) from exc

    if data is None:
        data = stage("data", lambda: labor_provider(seeds["data"]))
    priors = stage(
        "priors",
        lambda: estimate_priors(data, n_boot=n_boot, sample_size=sample_size, seed=seeds["priors"]),
    )
    chain = stage(
        "gibbs",
        lambda: run_chain(priors, data, iterations=iterations, burn_in=burn_in,
                          seed=seeds["chain"], scan=scan),
    )
    curve = stage(
        "failure",
        lambda: failure_curve(chain, data.predictor_means(), config.demand, t_grid=t_grid,
                              estimator=estimator, seed=seeds["curve"]),
    )
    decision = stage("decision", lambda: decide(config, curve, observed_growth))
    return PipelineResult(data, priors, chain, curve, decision, seeds)
