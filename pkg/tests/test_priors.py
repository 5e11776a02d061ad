import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from mcmcfidelity import synth
from mcmcfidelity.dataset import from_arrays
from mcmcfidelity.linreg import RankDeficientError, ols_fit
from mcmcfidelity.priors import (
    NormalPrior,
    PriorSpec,
    UniformPrior,
    estimate_priors,
    fit_normal,
    fit_uniform,
    paper_priors,
    prior_qq,
    qq_points,
    write_qq_csv,
)


# --- fit_normal -----------------------------------------------------------


def test_fit_normal_textbook():
    p = fit_normal([1, 2, 3])
    assert p.mean == 2 and p.sd == pytest.approx(1.0)


def test_fit_normal_degenerate_clamped():
    p = fit_normal([4.2, 4.2, 4.2])
    assert p.mean == pytest.approx(4.2) and p.sd == 1e-9


def test_fit_normal_monte_carlo(rng):
    # standard-error bound: 3 * 2 / sqrt(1e5) ~ 0.019
    p = fit_normal(rng.normal(0, 2, 100_000))
    assert abs(p.mean) < 0.02
    assert abs(p.sd - 2) < 0.02


@pytest.mark.parametrize("bad", [[1.0], [], [1.0, np.nan]])
def test_fit_normal_rejects(bad):
    with pytest.raises(ValueError):
        fit_normal(bad)


# --- fit_uniform ----------------------------------------------------------


def test_fit_uniform_envelope():
    u = fit_uniform([0.5, 1.0, 2.0])
    assert u.low == pytest.approx(0.4995)
    assert u.high == pytest.approx(2.002)


def test_fit_uniform_floor():
    u = fit_uniform([0.0005, 3.99])
    assert u.low == 0.001
    assert u.high == pytest.approx(3.99399)


def test_fit_uniform_all_below_floor_stays_proper():
    u = fit_uniform([1e-6, 2e-6])
    assert u.low == 0.001 and u.high > u.low


@pytest.mark.parametrize("bad", [[0.0, 1.0], [-1.0, 2.0], [1.0]])
def test_fit_uniform_rejects(bad):
    with pytest.raises(ValueError):
        fit_uniform(bad)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(1e-8, 1e8, allow_subnormal=False), min_size=2, max_size=50))
def test_fit_uniform_contains_samples(xs):
    u = fit_uniform(xs)
    assert u.low < u.high
    # the floor may exclude samples below 1e-3, by design
    assert all(u.low <= x <= u.high for x in xs if x >= 1e-3)


def test_reference_fixture_variance_prior():
    pp = paper_priors()
    assert (pp.variance_prior.low, pp.variance_prior.high) == (0.001, 3.99)
    assert pp.n_coefficients == 9
    assert pp.coefficient_priors[0] == NormalPrior(108, 2.12)
    assert pp.coefficient_priors[7] == NormalPrior(-0.015, 0.48)


# --- qq_points ------------------------------------------------------------


def test_qq_self_quantiles_on_diagonal():
    prior = NormalPrior(3.0, 0.7)
    n = 257
    samples = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n, 3.0, 0.7)
    pts = qq_points(samples[::-1], prior)
    assert np.max(np.abs(pts[:, 0] - pts[:, 1])) < 1e-9


def test_qq_uniform_self_quantiles():
    prior = UniformPrior(0.5, 2.5)
    n = 40
    samples = prior.ppf((np.arange(1, n + 1) - 0.5) / n)
    pts = qq_points(samples, prior)
    assert np.max(np.abs(pts[:, 0] - pts[:, 1])) < 1e-12


def test_qq_needs_two_samples():
    with pytest.raises(ValueError):
        qq_points([1.0], NormalPrior(0, 1))


def dkw_quantile_band(probs, n, alpha=1e-3):
    """Quantile band implied by the DKW inequality for a standard normal."""
    eps = np.sqrt(np.log(2 / alpha) / (2 * n))
    return (stats.norm.ppf(np.clip(probs - eps, 1e-300, 1)),
            stats.norm.ppf(np.clip(probs + eps, 0, 1 - 1e-16)))


def test_qq_normal_draws_within_bounds(rng):
    n = 10_000
    pts = qq_points(rng.normal(size=n), NormalPrior(0.0, 1.0))
    probs = (np.arange(1, n + 1) - 0.5) / n
    central = (probs >= 0.01) & (probs <= 0.99)
    dev = np.abs(pts[:, 0] - pts[:, 1])[central]
    assert dev.max() < 0.15
    lo, hi = dkw_quantile_band(probs, n)
    assert np.all((pts[:, 1] >= lo) & (pts[:, 1] <= hi))


def test_write_qq_csv(tmp_path):
    pts = qq_points([3.0, 1.0, 2.0], NormalPrior(2, 1))
    write_qq_csv(pts, tmp_path / "q.csv")
    lines = (tmp_path / "q.csv").read_text().splitlines()
    assert lines[0] == "theoretical,sample"
    assert len(lines) == 4
    assert lines[2] == "2.0,2.0"


# --- estimate_priors ------------------------------------------------------


def test_noiseless_line_gives_point_prior():
    x = np.linspace(1, 60, 600)
    spec = estimate_priors(from_arrays(x, 2 * x), n_boot=50, sample_size=500, seed=3)
    raw = spec.bootstrap_coefficients[:, 1]
    assert abs(spec.coefficient_priors[1].mean - 2) < 1e-6
    assert raw.std(ddof=1) < 1e-6
    assert spec.coefficient_priors[1].sd <= 1e-6


def test_slope_recovery_brackets_full_ols():
    spec = synth.GeneratorSpec(m=1, true_coefficients=(5.0, 1.5), noise_sd=0.5,
                               predictor_ranges=((0.0, 10.0),), n=2000, seed=5)
    data = synth.generate(spec)
    pri = estimate_priors(data, n_boot=300, sample_size=500, seed=8)
    b1 = pri.coefficient_priors[1]
    assert 1.4 <= b1.mean <= 1.6
    full = ols_fit(data).coefficients[1]
    assert abs(b1.mean - full) <= 3 * b1.sd


def test_estimate_priors_deterministic_and_thread_independent():
    data = synth.generate(synth.facility_like(seed=1, n=600))
    a = estimate_priors(data, n_boot=60, sample_size=100, seed=99)
    b = estimate_priors(data, n_boot=60, sample_size=100, seed=99)
    c = estimate_priors(data, n_boot=60, sample_size=100, seed=99, workers=4)
    assert a == b == c
    np.testing.assert_array_equal(a.bootstrap_coefficients, c.bootstrap_coefficients)
    assert a != estimate_priors(data, n_boot=60, sample_size=100, seed=100)


def test_prior_means_match_retained_matrix(facility_priors):
    spec = facility_priors
    assert spec.bootstrap_coefficients.shape == (1000, 9)
    np.testing.assert_allclose(spec.means, spec.bootstrap_coefficients.mean(axis=0), rtol=1e-13)
    np.testing.assert_allclose(spec.sds, spec.bootstrap_coefficients.std(axis=0, ddof=1))
    v = spec.bootstrap_variances
    assert np.all((v >= spec.variance_prior.low) & (v <= spec.variance_prior.high))
    assert spec.provenance.skipped == 0


def test_rank_deficient_resamples_skipped_within_budget():
    # x^2 == x on {0, 1}; only the ten x = 2 rows make the design full rank.
    # A resample of 30 misses all of them with probability 0.9^30 ~ 4%.
    x = np.array([0.0, 1.0] * 45 + [2.0] * 10)
    data = from_arrays(np.column_stack([x, x**2]), 1 + x)
    spec = estimate_priors(data, n_boot=200, sample_size=30, seed=1)
    assert 0 < spec.provenance.skipped <= 20
    assert spec.bootstrap_coefficients.shape[0] == 200 - spec.provenance.skipped


def test_too_many_rank_failures_raise():
    x = np.tile([1.0, 2.0], 50)
    data = from_arrays(np.column_stack([x, x**2]), x)
    with pytest.raises(RankDeficientError):
        estimate_priors(data, n_boot=20, sample_size=10, seed=0)


def test_estimate_priors_argument_checks():
    data = from_arrays(np.arange(10.0), np.arange(10.0))
    with pytest.raises(ValueError):
        estimate_priors(data, n_boot=1, sample_size=5)
    with pytest.raises(ValueError):
        estimate_priors(data, n_boot=10, sample_size=2)


def test_prior_spec_json_round_trip(tmp_path, facility_priors):
    path = tmp_path / "p.json"
    facility_priors.to_json(path)
    doc = json.loads(path.read_text())
    assert set(doc) == {"coefficients", "variance", "provenance"}
    assert set(doc["provenance"]) == {"n_boot", "sample_size", "seed", "skipped"}
    assert doc["coefficients"][0]["name"] == "b0"
    assert PriorSpec.from_json(path) == facility_priors


def test_prior_qq_covers_every_parameter(facility_priors):
    qq = prior_qq(facility_priors)
    assert list(qq) == [f"b{j}" for j in range(9)] + ["sigma2"]
    assert all(v.shape == (1000, 2) for v in qq.values())
    with pytest.raises(ValueError):
        prior_qq(paper_priors())
