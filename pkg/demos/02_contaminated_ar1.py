"""Finite-sample estimates of a contaminated AR(1) next to their large-n limits."""
from arbdp.estimators import finite_sample_estimate, functional
from arbdp.model import Contamination, contaminate, simulate_ar1

THETA, N = 0.5, 20_000
clean = simulate_ar1(THETA, N, seed=3)

print(f"theta = {THETA}, n = {N}")
print(f"{'p':>5} {'zeta':>6} | {'est':>4} {'sample':>8} {'limit':>8}")
for p, zeta in [(0.0, 0.0), (0.05, 3.0), (0.05, 10.0), (0.2, 10.0)]:
    y = contaminate(clean, Contamination(p=p, zeta=zeta), seed=4)
    for est in ("OLS", "LMS", "DR"):
        sample = finite_sample_estimate(est, y)
        limit = float(functional(est, THETA, p, zeta))
        print(f"{p:5.2f} {zeta:6.1f} | {est:>4} {sample:8.4f} {limit:8.4f}")
