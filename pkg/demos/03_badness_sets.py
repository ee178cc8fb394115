"""How each estimator's image over theta in [-0.9, 0.9] shrinks as outliers grow."""
import math

from arbdp.breakdown import ProcessFamily, badness_set, intersection_measure

family = ProcessFamily(-0.9, 0.9, grid_points=401)

for est in ("OLS", "LMS", "DR"):
    print(f"\n{est}")
    for p in (0.05, 0.25, 0.5):
        for zeta in (10.0, 1e3, math.inf):
            s = badness_set(est, family, p, zeta)
            m = intersection_measure(est, family, p, zeta)
            shown = ", ".join(f"[{lo:+.3f}, {hi:+.3f}]" for lo, hi in list(s)[:3])
            more = " ..." if len(s) > 3 else ""
            print(f"  p={p:<4} zeta={zeta:<6g} overlap={m:6.3f}  {shown or 'empty'}{more}")
