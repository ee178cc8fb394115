"""Clamped OLS breaks with one outlier; the frac counterexample keeps a trace of the data."""
from arbdp.breakdown import finite_sample_bdp

for kind, k_max in (("ClampedOLS", 2), ("FracCounterexample", 1)):
    r = finite_sample_bdp(kind, n=20, trials=200, k_max=k_max)
    print(kind)
    for row in r.trace:
        print(f"  k={row.search_var} zeta={row.zeta:<8g} overlap={row.measure:.4g}")
    print(f"  bdp = {r.bdp}" + (f"  ({'; '.join(r.diagnostics)})" if r.diagnostics else ""))
