"""Acceptance checks, one per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline, or
as a script: ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import tempfile
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

from factorcount.cca import (
    canonical_correlations,
    partitioned_covariance,
    reduced_rank_coefficients,
    weighted_residual,
)
from factorcount.ingest import save_prices
from factorcount.rmt.greatest_root import count_factors, greatest_root_params, greatest_root_pvalue, wishart_largest_eig_pvalue
from factorcount.rmt.marchenko_pastur import mp_density, mp_law
from factorcount.rmt.tracy_widom import _computed_table, tw_table
from factorcount.symbolic_te import SymbolSequence, permutation_entropy, ste, symbolize
from factorcount.synthetic import latent_blocks, planted_factor_prices


def report(number: int, ok: bool, detail: str) -> str:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, file=sys.__stdout__, flush=True)
    return line


# -- 1 -----------------------------------------------------------------------


def check_tracy_widom_table():
    _computed_table.cache_clear()
    t0 = time.perf_counter()
    table = tw_table(1)
    elapsed = time.perf_counter() - t0
    anchors = [(2.000, "cdf", 0.989598), (2.000, "pdf", 0.017535), (2.040, "cdf", 0.990276)]
    errs = []
    for x, col, want in anchors:
        i = int(np.argmin(np.abs(table.s - x)))
        got = table.cdf[i] if col == "cdf" else table.pdf[i]
        errs.append(abs(got - want))
    ok = max(errs) <= 5e-5 and elapsed < 30
    return ok, f"max anchor error {max(errs):.2e} (tol 5e-5), generated in {elapsed:.2f} s (limit 30 s)"


# -- 2 -----------------------------------------------------------------------


def check_wishart_example():
    p = wishart_largest_eig_pvalue(10, 10, 4.25)
    return 0.05 <= p <= 0.07, f"p-value {p:.4f} (want [0.05, 0.07])"


# -- 3 -----------------------------------------------------------------------


def check_permutation_entropy():
    h = permutation_entropy(symbolize([1, 2, 3, 6, 5, 4], 2))
    return abs(h - 0.971) <= 0.001, f"{h:.5f} bits (want 0.971 +/- 0.001)"


# -- 4 -----------------------------------------------------------------------


def check_marchenko_pastur():
    law = mp_law(1.0)
    support_ok = (law.x_min, law.x_max) == (0.0, 4.0)
    errs = {}
    for c in (0.25, 0.5, 1.0):
        lw = mp_law(c)
        mass = quad(lambda x: mp_density(lw, x), lw.x_min, lw.x_max, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        errs[c] = abs(mass - 1)
    ok = support_ok and max(errs.values()) <= 1e-6
    return ok, f"c=1 support [{law.x_min}, {law.x_max}], max normalization error {max(errs.values()):.1e}"


# -- 5 -----------------------------------------------------------------------


def check_greatest_root_calibration(reps: int = 5000, seed: int = 0):
    n, p, q = 500, 4, 5
    params = greatest_root_params(p, n - q - 1, q)
    table = tw_table(1)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    hits = 0
    for _ in range(reps):
        X, Y = rng.standard_normal((n, q)), rng.standard_normal((n, p))
        r1 = canonical_correlations(partitioned_covariance(X, Y)).r2[0]
        hits += greatest_root_pvalue(params, r1, table) < 0.05
    elapsed = time.perf_counter() - t0
    rate = hits / reps
    ok = abs(rate - 0.05) <= 0.015 and elapsed < 300
    return ok, f"rejection rate {rate:.4f} over {reps} null datasets (want 0.05 +/- 0.015), {elapsed:.1f} s"


# -- 6 -----------------------------------------------------------------------


def check_rank_recovery():
    table = tw_table(1)
    recovered = {}
    for t in (1, 2, 3):
        hits = 0
        for s in range(100):
            X, Y = latent_blocks(s, t)
            sol = canonical_correlations(partitioned_covariance(X, Y))
            hits += count_factors(sol, 20, 20, 2000, 0.01, True, table).retained == t
        recovered[t] = hits
    null = 0
    for s in range(100):
        X, Y = latent_blocks(1000 + s, 0)
        sol = canonical_correlations(partitioned_covariance(X, Y))
        null += count_factors(sol, 20, 20, 2000, 0.01, True, table).retained == 0
    ok = all(v >= 95 for v in recovered.values()) and null >= 97
    return ok, f"recovered t=1,2,3 in {recovered[1]}/{recovered[2]}/{recovered[3]} of 100; null t=0 in {null}/100"


# -- 7 -----------------------------------------------------------------------


def naive_ste(source, target, delta):
    xs, ys = list(target.codes), list(source.codes)
    triples = [(xs[i + delta], xs[i], ys[i]) for i in range(len(xs) - delta)]
    n = len(triples)
    abc = Counter(triples)
    ab = Counter((a, b) for a, b, _ in triples)
    bc = Counter((b, c) for _, b, c in triples)
    b1 = Counter(b for _, b, _ in triples)
    return sum(k / n * math.log2((k / bc[(b, c)]) / (ab[(a, b)] / b1[b])) for (a, b, c), k in abc.items())


def check_ste_oracle():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(10, 201))
        m = int(rng.integers(2, 4))
        a, b = rng.standard_normal(n), rng.standard_normal(n)
        if rng.random() < 0.5:
            b[1:] += a[:-1]
        src, tgt = symbolize(a, m), symbolize(b, m)
        worst = max(worst, abs(ste(src, tgt, 1).value - naive_ste(src, tgt, 1)))
    y = rng.integers(0, 2, 100_000)
    x = np.concatenate([[0], y[:-1]])
    coupled = ste(SymbolSequence(y, 2), SymbolSequence(x, 2), 1).value
    ok = worst <= 1e-12 and abs(coupled - 1) <= 0.02
    return ok, f"max |plug-in - oracle| {worst:.1e} over 500 instances; coupled construction {coupled:.4f} bits"


# -- 8 -----------------------------------------------------------------------


def check_cca_oracle():
    rng = np.random.default_rng(8)
    worst_eig = worst_trace = 0.0
    for _ in range(500):
        p, q = (int(v) for v in rng.integers(1, 9, size=2))
        n = int(rng.integers(max(p, q) + 3, 80))
        X = rng.standard_normal((n, q))
        Y = rng.standard_normal((n, p))
        Y[:, 0] += X[:, 0]
        S = partitioned_covariance(X, Y)
        sol = canonical_correlations(S)
        M = np.linalg.solve(S.syy, S.syx) @ np.linalg.solve(S.sxx, S.sxy)
        eig = np.sort(np.linalg.eigvals(M).real)[::-1][: sol.k]
        worst_eig = max(worst_eig, float(np.max(np.abs(eig - sol.r2))))
        w = [weighted_residual(S, reduced_rank_coefficients(S, sol, t).C) for t in range(sol.k + 1)]
        for t0 in range(sol.k + 1):
            for t1 in range(t0, sol.k + 1):
                worst_trace = max(worst_trace, abs(w[t0] - w[t1] - sol.r2[t0:t1].sum()))
    ok = worst_eig <= 1e-10 and worst_trace <= 1e-8
    return ok, f"max eigenvalue gap {worst_eig:.1e} (tol 1e-10), max trace-identity gap {worst_trace:.1e} (tol 1e-8)"


# -- 9 -----------------------------------------------------------------------


def check_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        save_prices(planted_factor_prices(3, n=600, n_predictors=4, n_responses=4), tmp / "prices.csv")
        args = [
            sys.executable, "-m", "factorcount.cli", "pipeline", "--input", str(tmp / "prices.csv"),
            "--dt", "0", "1", "--m", "2", "3", "--surrogates", "39", "--seed", "11", "--out", str(tmp / "run"),
        ]
        texts = []
        for _ in range(2):
            res = subprocess.run(args, capture_output=True, text=True)
            if res.returncode != 0:
                return False, f"pipeline exited with {res.returncode}: {res.stderr.strip()}"
            texts.append((tmp / "run" / "report.json").read_text())
        stripped = []
        for text in texts:
            data = json.loads(text)
            data["provenance"].pop("generated_at")
            stripped.append(json.dumps(data, indent=2, sort_keys=True))
        ok = stripped[0] == stripped[1]
        return ok, "two runs give identical reports apart from the timestamp" if ok else "reports differ"


CHECKS = {
    1: check_tracy_widom_table,
    2: check_wishart_example,
    3: check_permutation_entropy,
    4: check_marchenko_pastur,
    5: check_greatest_root_calibration,
    6: check_rank_recovery,
    7: check_ste_oracle,
    8: check_cca_oracle,
    9: check_determinism,
}


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number):
    ok, detail = CHECKS[number]()
    report(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for number, check in sorted(CHECKS.items()):
        ok, detail = check()
        report(number, ok, detail)
        failures += not ok
    sys.exit(1 if failures else 0)
