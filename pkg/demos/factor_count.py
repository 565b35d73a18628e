"""
Counting canonical factors
==========================

Two blocks of variables share a few latent factors. Canonical correlation
analysis ranks the shared directions, and the greatest-root test, referred
to the Tracy-Widom law, decides how many of them stand out from noise.
"""

import numpy as np

from factorcount.cca import canonical_correlations, explained_variance, partitioned_covariance
from factorcount.rmt.greatest_root import count_factors, wishart_largest_eig_pvalue
from factorcount.synthetic import latent_blocks

# Three shared factors between 20 predictors and 20 responses.
X, Y = latent_blocks(seed=0, t=3)
sol = canonical_correlations(partitioned_covariance(X, Y))
print("leading squared canonical correlations:", np.round(sol.r2[:5], 4))
print("explained variance (%):", np.round(explained_variance(sol)[:5], 1))

report = count_factors(sol, p=20, q=20, n=2000, alpha=0.01)
for row in report.rows[:5]:
    print(f"factor {row.j}: r2 = {row.r2:.4f}, p = {row.pvalue:.3g}")
print("retained:", report.retained)

# Without deflation every factor is tested against the first-root null.
flat = count_factors(sol, p=20, q=20, n=2000, alpha=0.01, deflate=False)
print("retained without deflation:", flat.retained)

# The single-sample Wishart test: with n = p = 10, a top eigenvalue of 4.25
# is about a 6% event under the identity covariance.
print(f"Wishart example p-value: {wishart_largest_eig_pvalue(10, 10, 4.25):.3f}")
