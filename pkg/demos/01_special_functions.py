"""Special functions behind the asymptotic equations, checked against simulation."""
import math

import numpy as np

from arbdp.specfun import noncentral_chisq_cdf, ratio_normal_cdf

rng = np.random.default_rng(1)
N = 2_000_000

# df=1 noncentral chi-square: P[(Z + d)^2 <= x]
d2, x = 4.0, 3.0
mc = np.mean((rng.standard_normal(N) + math.sqrt(d2)) ** 2 <= x)
print(f"ncx2(x={x}, delta2={d2}): series {noncentral_chisq_cdf(x, d2):.6f}   simulated {mc:.6f}")

# ratio of correlated normals
a, b, var, rho, c = 1.0, 2.0, 1.5, 0.4, 0.3
z1, z2 = rng.standard_normal((2, N))
n1 = a + math.sqrt(var) * z1
n2 = b + math.sqrt(var) * (rho * z1 + math.sqrt(1 - rho**2) * z2)
print(f"P[N1/N2 <= {c}]: exact {ratio_normal_cdf(c, a, b, var, rho):.6f}   simulated {np.mean(n1 / n2 <= c):.6f}")

# successive AR(1) ratios have median theta
for theta in (-0.6, 0.0, 0.8):
    g = ratio_normal_cdf(theta, 0.0, 0.0, 1 / (1 - theta**2), theta)
    print(f"theta={theta:+.1f}: CDF of Y_t/Y_(t-1) at theta = {g:.12f}")
