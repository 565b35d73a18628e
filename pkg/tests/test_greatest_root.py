from __future__ import annotations

import json

import mpmath as mp
import numpy as np
import pytest

from factorcount.cca import canonical_correlations, partitioned_covariance
from factorcount.rmt.greatest_root import (
    count_factors,
    greatest_root_params,
    greatest_root_pvalue,
    wishart_centering,
    wishart_largest_eig_pvalue,
)
from factorcount.synthetic import latent_blocks


def test_wishart_example(tw1):
    assert 0.05 <= wishart_largest_eig_pvalue(10, 10, 4.25, tw1) <= 0.07


def test_wishart_null_calibration(tw1):
    rng = np.random.default_rng(0)
    n, p, reps = 200, 50, 10_000
    hits = 0
    for _ in range(reps):
        X = rng.standard_normal((n, p))
        lam = np.linalg.eigvalsh(X.T @ X / n)[-1]
        hits += wishart_largest_eig_pvalue(n, p, lam, tw1) < 0.05
    assert abs(hits / reps - 0.05) <= 0.01


def test_wishart_centering_values():
    mu, sigma = wishart_centering(10, 10)
    assert mu == pytest.approx(38.0)
    assert sigma > 0


def mp_params(p, m, n):
    mp.mp.dps = 50
    total = mp.mpf(m + n - 1)
    gamma = 2 * mp.asin(mp.sqrt((min(p, n) - mp.mpf(1) / 2) / total))
    phi = 2 * mp.asin(mp.sqrt((max(p, n) - mp.mpf(1) / 2) / total))
    mu = 2 * mp.log(mp.tan((phi + gamma) / 2))
    sigma = mp.cbrt(16 / total**2 / (mp.sin(phi + gamma) ** 2 * mp.sin(phi) * mp.sin(gamma)))
    return float(mu), float(sigma)


@pytest.mark.parametrize("pmn", [(49, 4480, 51), (4, 494, 5), (10, 50, 3), (1, 30, 7)])
def test_params_against_extended_precision(pmn):
    got = greatest_root_params(*pmn)
    mu, sigma = mp_params(*pmn)
    assert got.mu == pytest.approx(mu, abs=1e-12)
    assert got.sigma == pytest.approx(sigma, abs=1e-12)


def test_params_respect_duality_and_errors():
    # theta(p, m, n) and theta(n, m + n - p, p) have the same law
    a, b = greatest_root_params(3, 40, 7), greatest_root_params(7, 44, 3)
    assert a.mu == pytest.approx(b.mu, abs=1e-14)
    assert a.sigma == pytest.approx(b.sigma, abs=1e-14)
    with pytest.raises(ValueError):
        greatest_root_params(0, 5, 3)
    with pytest.raises(ValueError, match="degenerate"):
        greatest_root_params(10, 5, 3)


def null_r2(rng, n, p, q):
    X, Y = rng.standard_normal((n, q)), rng.standard_normal((n, p))
    return canonical_correlations(partitioned_covariance(X, Y)).r2


def test_greatest_root_is_conservative_but_close(tw1):
    """Rejection rate of the first-root test under independence.

    With only four responses the logit approximation is slightly
    conservative; the observed rate sits near 0.04.
    """
    rng = np.random.default_rng(0)
    params = greatest_root_params(4, 500 - 5 - 1, 5)
    reps = 2000
    hits = sum(greatest_root_pvalue(params, null_r2(rng, 500, 4, 5)[0], tw1) < 0.05 for _ in range(reps))
    assert 0.025 <= hits / reps <= 0.065


def test_independent_blocks_give_zero_factors(tw1):
    zero = sum(
        count_factors(null_r2(np.random.default_rng(s), 1000, 10, 10), 10, 10, 1000, 0.01, True, tw1).retained == 0
        for s in range(100)
    )
    assert zero >= 97


def test_rank_three_recovery(tw1):
    hits = 0
    for s in range(100):
        X, Y = latent_blocks(s, 3)
        sol = canonical_correlations(partitioned_covariance(X, Y))
        hits += count_factors(sol, 20, 20, 2000, 0.01, True, tw1).retained == 3
    assert hits >= 95


def test_count_monotone_in_alpha_and_deflation(tw1):
    for s in range(20):
        X, Y = latent_blocks(s, 2, n=300, p=6, q=6)
        X[:, 2] += 0.15 * Y[:, 2]
        sol = canonical_correlations(partitioned_covariance(X, Y))
        strict = count_factors(sol, 6, 6, 300, 0.01, True, tw1)
        loose = count_factors(sol, 6, 6, 300, 0.05, True, tw1)
        flat = count_factors(sol, 6, 6, 300, 0.01, False, tw1)
        assert loose.retained >= strict.retained
        # deflated nulls are smaller, so deflation never retains fewer factors
        assert strict.retained >= flat.retained
        assert np.all(np.diff(strict.pvalues) >= -1e-12) or strict.retained < 6


def test_report_contents_and_errors(tmp_path, tw1):
    rep = count_factors([0.9, 0.5, 0.0], 3, 4, 100, 0.01, True, tw1)
    assert rep.rows[2].pvalue == 1.0 and rep.rows[2].statistic is None
    assert rep.retained == 2
    assert rep.meta["null"].startswith("theta(p-j+1")
    rep.save(tmp_path / "f.json")
    data = json.loads((tmp_path / "f.json").read_text())
    assert data["retained"] == 2 and len(data["factors"]) == 3
    assert count_factors([1.0], 1, 1, 10, table=tw1).rows[0].pvalue == 0.0
    with pytest.raises(ValueError):
        count_factors([0.5, 0.6], 2, 2, 100, table=tw1)
    with pytest.raises(ValueError):
        count_factors([0.5], 2, 2, 5, table=tw1)
    with pytest.raises(ValueError):
        count_factors([0.5, 0.4, 0.3], 2, 2, 100, table=tw1)
