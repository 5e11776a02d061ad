"""Bootstrap estimation of coefficient and noise-variance priors.

Each bootstrap iteration resamples the dataset, fits OLS, and records the
coefficient vector and residual variance.  Normal priors are fitted to the
coefficient columns by moments; the noise variance gets a padded uniform
envelope.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy import stats

from .dataset import ObservationDataset, bootstrap_resample
from .linreg import RankDeficientError, ols_fit

SD_FLOOR = 1e-9
VARIANCE_FLOOR = 1e-3
MAX_SKIP_FRACTION = 0.10


@dataclass(frozen=True)
class NormalPrior:
    mean: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError(f"normal sd must be positive, got {self.sd}")

    @property
    def variance(self) -> float:
        return self.sd**2

    def ppf(self, q):
        return stats.norm.ppf(q, loc=self.mean, scale=self.sd)


@dataclass(frozen=True)
class UniformPrior:
    low: float
    high: float

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"uniform needs low < high, got [{self.low}, {self.high}]")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.low + self.high)

    def contains(self, v) -> bool:
        return bool(self.low <= v <= self.high)

    def ppf(self, q):
        return self.low + np.asarray(q) * (self.high - self.low)


@dataclass(frozen=True)
class Provenance:
    n_boot: int
    sample_size: int
    seed: int | None
    skipped: int = 0


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """Independent normal priors for b0..bm plus a uniform prior for sigma^2."""

    coefficient_priors: tuple[NormalPrior, ...]
    variance_prior: UniformPrior
    provenance: Provenance
    names: tuple[str, ...] = ()
    # raw bootstrap draws kept for audit; absent for hand-built specs
    bootstrap_coefficients: np.ndarray | None = field(default=None, repr=False)
    bootstrap_variances: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficient_priors", tuple(self.coefficient_priors))
        if not self.names:
            names = tuple(f"b{j}" for j in range(len(self.coefficient_priors)))
            object.__setattr__(self, "names", names)
        if len(self.names) != len(self.coefficient_priors):
            raise ValueError("one name per coefficient prior is required")

    @property
    def n_coefficients(self) -> int:
        return len(self.coefficient_priors)

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mean for p in self.coefficient_priors])

    @property
    def sds(self) -> np.ndarray:
        return np.array([p.sd for p in self.coefficient_priors])

    def check_compatible(self, data: ObservationDataset) -> None:
        if self.n_coefficients != data.m + 1:
            raise ValueError(
                f"priors cover {self.n_coefficients} coefficients but the data "
                f"has m + 1 = {data.m + 1}"
            )

    def __eq__(self, other):
        if not isinstance(other, PriorSpec):
            return NotImplemented
        return (
            self.coefficient_priors == other.coefficient_priors
            and self.variance_prior == other.variance_prior
            and self.provenance == other.provenance
            and self.names == other.names
        )

    __hash__ = None

    def to_dict(self) -> dict:
        p = self.provenance
        return {
            "coefficients": [
                {"name": nm, "mean": pr.mean, "sd": pr.sd}
                for nm, pr in zip(self.names, self.coefficient_priors)
            ],
            "variance": {"low": self.variance_prior.low, "high": self.variance_prior.high},
            "provenance": {
                "n_boot": p.n_boot,
                "sample_size": p.sample_size,
                "seed": p.seed,
                "skipped": p.skipped,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PriorSpec":
        coefs = doc["coefficients"]
        prov = doc.get("provenance", {})
        return cls(
            coefficient_priors=tuple(NormalPrior(float(c["mean"]), float(c["sd"])) for c in coefs),
            variance_prior=UniformPrior(float(doc["variance"]["low"]), float(doc["variance"]["high"])),
            provenance=Provenance(
                n_boot=int(prov.get("n_boot", 0)),
                sample_size=int(prov.get("sample_size", 0)),
                seed=prov.get("seed"),
                skipped=int(prov.get("skipped", 0)),
            ),
            names=tuple(c.get("name", f"b{j}") for j, c in enumerate(coefs)),
        )

    def to_json(self, path, extra: dict | None = None) -> None:
        doc = self.to_dict()
        if extra:
            doc.update(extra)
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path) -> "PriorSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_normal(samples) -> NormalPrior:
    """Method-of-moments normal fit (n - 1 denominator, sd floored at 1e-9)."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("fit_normal needs at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("fit_normal samples must be finite")
    return NormalPrior(float(x.mean()), max(float(x.std(ddof=1)), SD_FLOOR))


def fit_uniform(samples) -> UniformPrior:
    """Padded min/max envelope for positive samples.

    ``low = max(1e-3, 0.999 * min)``, ``high = 1.001 * max``.  When every sample
    sits below the floor, ``high`` is lifted to ``1.001 * low`` so the support
    stays non-empty.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("fit_uniform needs at least 2 samples")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("fit_uniform samples must be finite and positive")
    low = max(VARIANCE_FLOOR, float(x.min()) * 0.999)
    high = max(float(x.max()) * 1.001, low * 1.001)
    return UniformPrior(low, high)


Fitted = Union[NormalPrior, UniformPrior]


def qq_points(samples, fitted: Fitted) -> np.ndarray:
    """Q-Q pairs as an (n, 2) array of (theoretical, sample) quantiles.

    The i-th order statistic is matched with the fitted quantile at
    probability ``(i - 0.5) / n``.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < 2:
        raise ValueError("qq_points needs at least 2 samples")
    probs = (np.arange(1, n + 1) - 0.5) / n
    return np.column_stack([fitted.ppf(probs), x])


def write_qq_csv(points: np.ndarray, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("theoretical,sample\n")
        for t, s in points:
            fh.write(f"{float(t)!r},{float(s)!r}\n")


def _boot_once(data: ObservationDataset, sample_size: int, seed: np.random.SeedSequence):
    try:
        fit = ols_fit(bootstrap_resample(data, sample_size, seed))
    except RankDeficientError:
        return None
    return fit.coefficients, fit.residual_variance


def estimate_priors(
    data: ObservationDataset,
    n_boot: int = 1000,
    sample_size: int = 500,
    seed: int | None = None,
    workers: int = 1,
) -> PriorSpec:
    """Bootstrap ``n_boot`` OLS fits on resamples of ``sample_size`` rows.

    Iteration ``i`` draws its resample from the ``i``-th child of
    ``SeedSequence(seed)``, so the result does not depend on ``workers``.
    Rank-deficient resamples are skipped; more than 10% of them is an error.
    """
    if n_boot < 2:
        raise ValueError("n_boot must be at least 2")
    if sample_size < data.m + 2:
        raise ValueError(f"sample_size must be at least m + 2 = {data.m + 2}")
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1)[0])
    children = np.random.SeedSequence(seed).spawn(n_boot)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _boot_once(data, sample_size, s), children))
    else:
        results = [_boot_once(data, sample_size, s) for s in children]

    kept = [r for r in results if r is not None]
    skipped = n_boot - len(kept)
    if skipped > MAX_SKIP_FRACTION * n_boot or len(kept) < 2:
        raise RankDeficientError(
            f"{skipped} of {n_boot} bootstrap fits were rank deficient "
            f"(budget is {MAX_SKIP_FRACTION:.0%})"
        )
    coefs = np.array([c for c, _ in kept])
    variances = np.array([v for _, v in kept])
    # exact fits give zero residual variance; keep the uniform fit well-defined
    variances = np.maximum(variances, np.finfo(float).tiny)

    return PriorSpec(
        coefficient_priors=tuple(fit_normal(coefs[:, j]) for j in range(coefs.shape[1])),
        variance_prior=fit_uniform(variances),
        provenance=Provenance(n_boot=n_boot, sample_size=sample_size, seed=seed, skipped=skipped),
        bootstrap_coefficients=coefs,
        bootstrap_variances=variances,
    )


def prior_qq(spec: PriorSpec) -> dict[str, np.ndarray]:
    """Q-Q data for every fitted prior that still carries its bootstrap draws."""
    if spec.bootstrap_coefficients is None or spec.bootstrap_variances is None:
        raise ValueError("prior spec has no retained bootstrap samples")
    out = {
        nm: qq_points(spec.bootstrap_coefficients[:, j], pr)
        for j, (nm, pr) in enumerate(zip(spec.names, spec.coefficient_priors))
    }
    out["sigma2"] = qq_points(spec.bootstrap_variances, spec.variance_prior)
    return out


# Priors reported for the grafting-facility data (raw data unpublished).
_PAPER_COEFFICIENTS: Sequence[tuple[float, float]] = (
    (108.0, 2.12),
    (-0.0004, 0.15),
    (-0.010, 0.17),
    (-0.07, 0.12),
    (-0.0125, 0.11),
    (-0.025, 0.15),
    (-0.127, 0.25),
    (-0.015, 0.48),
    (-0.006, 0.15),
)


def paper_priors() -> PriorSpec:
    """Fixture: the nine coefficient priors and u(0.001, 3.99) from the facility study."""
    return PriorSpec(
        coefficient_priors=tuple(NormalPrior(mu, sd) for mu, sd in _PAPER_COEFFICIENTS),
        variance_prior=UniformPrior(0.001, 3.99),
        provenance=Provenance(n_boot=1000, sample_size=500, seed=None),
    )
