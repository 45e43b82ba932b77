import numpy as np
import pytest

from solab.errors import ConfigurationError, FitError
from solab.metrics import (
    BaselineFit,
    Regime,
    above_chance,
    aggregate_scores,
    appropriateness_score,
    classify_regime,
    convergence_score,
    fit_baseline,
    novelty_of_energy,
    novelty_value_curve,
    poisson_pmf,
    value_of_energy,
)
from solab.rng import make_rng


def reference_fit(mu=-127.2, sigma=7.0):
    return BaselineFit(
        mu=mu, sigma=sigma, lam=sigma * sigma, count=1000,
        e_min=mu - 4 * sigma, e_max=mu + 4 * sigma,
    )


def poisson_tail_oracle(m: int, lam: float) -> float:
    """P(X >= m) by direct pmf summation (no incomplete-gamma calls)."""
    if m <= 0:
        return 1.0
    total = 0.0
    term = np.exp(-lam)  # pmf(0)
    for x in range(0, m):
        total += term
        term = term * lam / (x + 1)
    return 1.0 - total


def test_fit_baseline_basic_moments():
    e = np.array([-1.0, 1.0, -1.0, 1.0])
    fit = fit_baseline(e)
    assert fit.mu == 0.0
    assert fit.sigma == 1.0
    assert fit.lam == 1.0
    assert fit.count == 4
    assert (fit.e_min, fit.e_max) == (-1.0, 1.0)


def test_fit_baseline_rejects_degenerate_sample():
    with pytest.raises(FitError):
        fit_baseline(np.full(10, 3.0))
    with pytest.raises(FitError):
        fit_baseline(np.array([1.0]))


def test_fit_baseline_synthetic_round_trip():
    # shifted Poisson with the reference parameters, 1e6 draws
    rng = make_rng(0)
    lam, mu = 49.0, -127.2
    e = mu + (rng.poisson(lam, size=1_000_000) - lam)
    fit = fit_baseline(e)
    assert abs(fit.mu - mu) < 0.05
    assert abs(fit.lam - lam) < 1.0


def test_novelty_zero_at_baseline_mean_exactly():
    fit = reference_fit()
    assert novelty_of_energy(fit.mu, fit) == 0.0


def test_novelty_saturates_on_both_tails():
    fit = reference_fit()
    assert novelty_of_energy(fit.mu - 10 * fit.sigma, fit) >= 0.999
    assert novelty_of_energy(fit.mu + 10 * fit.sigma, fit) >= 0.999


def test_novelty_clamped_and_counted():
    fit = reference_fit()
    clamps = {}
    # a fraction below the mean, where the continuous density exceeds the
    # center value, must clamp to 0 rather than go negative
    v = novelty_of_energy(fit.mu - 0.4, fit, clamps=clamps)
    assert v == 0.0
    assert clamps["novelty"] == 1


def test_value_at_baseline_mean_near_half():
    fit = reference_fit()  # lambda = 49
    v = value_of_energy(fit.mu, fit)
    assert 0.47 <= v <= 0.53


def test_value_tail_extremes():
    fit = reference_fit()
    assert value_of_energy(fit.mu - 10 * fit.sigma, fit) == 1.0
    assert value_of_energy(fit.mu + 20 * fit.sigma, fit) < 1e-6


def test_value_monotone_non_increasing():
    fit = reference_fit()
    grid = np.linspace(fit.mu - 8 * fit.sigma, fit.mu + 8 * fit.sigma, 1000)
    vals = value_of_energy(grid, fit)
    assert np.all(np.diff(vals) <= 1e-12)


def test_value_matches_summation_oracle():
    for lam in (9.0, 49.0, 100.0):
        fit = BaselineFit(mu=0.0, sigma=np.sqrt(lam), lam=lam, count=10,
                          e_min=-10, e_max=10)
        for k in np.linspace(0.0, 200.0, 401):
            e = k - lam  # so the shifted count equals k
            got = value_of_energy(e, fit)
            want = poisson_tail_oracle(int(np.floor(k)), lam)
            assert abs(got - want) < 1e-10, (k, lam)


def test_value_strict_tail_variant():
    fit = reference_fit()
    geq = value_of_energy(fit.mu, fit, tail="geq")
    gt = value_of_energy(fit.mu, fit, tail="gt")
    assert gt < geq  # strict tail excludes the mass at floor(k)


def test_poisson_pmf_below_pole_is_zero():
    assert poisson_pmf(-1.5, 49.0) == 0.0
    assert poisson_pmf(-0.5, 49.0) > 0.0


def test_aggregate_scores_constant_samples():
    fit = reference_fit()
    nov, val = aggregate_scores(np.full(50, fit.mu), fit)
    assert nov == 0.0
    assert val == pytest.approx(value_of_energy(fit.mu, fit))
    deep = fit.mu - 5 * fit.sigma
    nov2, val2 = aggregate_scores(np.full(50, deep), fit)
    assert nov2 == pytest.approx(novelty_of_energy(deep, fit))
    assert val2 == pytest.approx(value_of_energy(deep, fit))


def test_aggregate_scores_mixed_hand_average():
    fit = reference_fit()
    es = np.array([fit.mu, fit.mu - 7.0, fit.mu + 14.0, fit.mu - 21.0])
    nov, val = aggregate_scores(es, fit)
    hand_n = np.mean([novelty_of_energy(e, fit) for e in es])
    hand_v = np.mean([value_of_energy(e, fit) for e in es])
    assert nov == pytest.approx(hand_n, abs=1e-15)
    assert val == pytest.approx(hand_v, abs=1e-15)
    with pytest.raises(ConfigurationError):
        aggregate_scores(np.array([]), fit)


def test_convergence_score_limits():
    fit = reference_fit()
    assert convergence_score([np.full(20, -140.0)], fit) == 1.0
    rng = make_rng(1)
    sample = rng.normal(fit.mu, fit.sigma, 400)
    sample = (sample - sample.mean()) / sample.std() * fit.sigma + fit.mu
    assert convergence_score([sample], fit) == pytest.approx(0.0, abs=1e-12)


def test_convergence_clamps_wide_spread():
    fit = reference_fit()
    clamps = {}
    wide = np.array([-100.0, -160.0, -100.0, -160.0])  # spread >> sigma
    c = convergence_score([wide], fit, clamps=clamps)
    assert c == 0.0
    assert clamps["convergence"] == 1


def test_appropriateness_products():
    assert appropriateness_score(1.0, 1.0) == 1.0
    assert appropriateness_score(0.7, 0.0) == 0.0
    assert appropriateness_score(0.5, 0.8) == pytest.approx(0.4)
    assert appropriateness_score(0.5, 0.8, novelty=0.9, use_novelty_form=True) == pytest.approx(0.72)
    with pytest.raises(ConfigurationError):
        appropriateness_score(0.5, 0.5, use_novelty_form=True)


def test_above_chance_behavior():
    fit = reference_fit()
    above = np.full(10, fit.mu + 1.0)
    assert above_chance(above, fit, fit.sigma) == 0.0
    rng = make_rng(2)
    sample = fit.mu + (rng.poisson(fit.lam, 20000) - fit.lam)
    probs = [above_chance(sample, fit, k * fit.sigma) for k in (1, 2, 3)]
    assert probs[0] > probs[1] > probs[2]  # monotone in epsilon
    # Poisson self-probabilities in the documented ballpark
    assert probs[0] == pytest.approx(0.155, abs=0.05)
    assert probs[1] == pytest.approx(0.018, abs=0.05)
    assert probs[2] == pytest.approx(0.001, abs=0.05)


def test_classify_regime_four_corners():
    fit = reference_fit()
    mu, sd = fit.mu, fit.sigma
    # unconverged: inconclusive regardless of energies
    assert classify_regime(np.full(9, mu), fit, 0.1) == Regime.NOT_NOVEL_NOT_APPROPRIATE
    # converged deep below the band: creative
    assert (
        classify_regime(np.full(9, mu - 4 * sd), fit, 0.99)
        == Regime.NOVEL_AND_APPROPRIATE
    )
    # converged inside the band, below the mean: appropriate only
    assert (
        classify_regime(np.full(9, mu - 1.0 * sd), fit, 0.99)
        == Regime.APPROPRIATE_NOT_NOVEL
    )
    # converged at or above the mean: the imprint overwrote the problem
    assert (
        classify_regime(np.full(9, mu + 4 * sd), fit, 0.99)
        == Regime.NOVEL_NOT_APPROPRIATE
    )
    assert (
        classify_regime(np.full(9, mu + 0.5 * sd), fit, 0.99)
        == Regime.NOVEL_NOT_APPROPRIATE
    )
    # empty AL input degenerates to the inconclusive label
    assert classify_regime(np.array([]), fit, 1.0) == Regime.NOT_NOVEL_NOT_APPROPRIATE


def test_classify_regime_fingerprint_mode():
    fit = BaselineFit(
        mu=-127.2, sigma=7.0, lam=49.0, count=100, e_min=-150.0, e_max=-100.0,
        fingerprints=frozenset({b"seen"}),
    )
    e = np.full(10, -130.0)
    seen = [b"seen"] * 10
    new = [b"new"] * 10
    assert (
        classify_regime(e, fit, 0.99, seen, novelty="fingerprint")
        == Regime.APPROPRIATE_NOT_NOVEL
    )
    assert (
        classify_regime(e, fit, 0.99, new, novelty="fingerprint")
        == Regime.NOVEL_AND_APPROPRIATE
    )
    # no majority -> energy band fallback (inside the observed range here)
    mixed = [bytes([i]) for i in range(10)]
    assert (
        classify_regime(e, fit, 0.99, mixed, novelty="fingerprint")
        == Regime.APPROPRIATE_NOT_NOVEL
    )
    with pytest.raises(ConfigurationError):
        classify_regime(e, fit, 0.99, novelty="bogus")


def test_novelty_value_curve_stays_in_unit_square():
    fit = reference_fit()
    grid = np.linspace(fit.mu - 10 * fit.sigma, fit.mu + 10 * fit.sigma, 500)
    curve = novelty_value_curve(fit, grid)
    assert curve.shape == (500, 2)
    assert np.all(curve >= 0.0) and np.all(curve <= 1.0)
