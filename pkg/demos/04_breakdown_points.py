"""Asymptotic breakdown points by bisection over the outlier fraction.

Pass --with-lms to include LMS (about two minutes at the default grids).
"""
import sys
import time

from arbdp.breakdown import asymptotic_bdp

kinds = ["OLS", "DR"] + (["LMS"] if "--with-lms" in sys.argv else [])
for kind in kinds:
    t0 = time.perf_counter()
    report = asymptotic_bdp(kind)
    print(f"{kind:>4}: bdp = {report.bdp:.4f}  ({time.perf_counter() - t0:.0f}s, "
          f"{len({r.search_var for r in report.trace})} probes)")
