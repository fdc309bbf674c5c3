"""
Growth rates and limiting moments
=================================

The counts grow like c1 * c2**n * n**(n - 1).  We compute the constants
to high precision and watch the ratio to the exact count approach 1.
"""

import mpmath

from phylolevel import NetworkClass, asymptotic_constants, asymptotic_estimate, count, drmota_moments

for cls in NetworkClass:
    rep = asymptotic_constants(cls, 128)
    print(cls.value, "tau", mpmath.nstr(rep.tau, 12), "rho", mpmath.nstr(rep.rho, 12),
          "c1", mpmath.nstr(rep.c1, 12), "c2", mpmath.nstr(rep.c2, 12))

# relative error of the estimate shrinks roughly like 1/n
with mpmath.workprec(256):
    for n in (10, 50, 100, 200, 400):
        ratio = count("rooted1", n) / asymptotic_estimate("rooted1", n)
        print(n, mpmath.nstr(ratio - 1, 6))

# blob counts and arc counts are asymptotically normal with linear mean
for cls in NetworkClass:
    x = drmota_moments(cls, "blobs")
    y = drmota_moments(cls, "edges")
    print(cls.value, "blobs ~", mpmath.nstr(x.mu, 6), "n, var", mpmath.nstr(x.sigma2, 6), "n;",
          "arcs ~", mpmath.nstr(y.mu, 6), "n, var", mpmath.nstr(y.sigma2, 6), "n")
