"""An orbit that gains one unit of action on every return.

Starts the alpha = 1/ln 2 pinball map from the self-reproducing seed at
N0 = 1000 and follows 10^4 returns in double-double arithmetic, then shows
how quickly a nearby start drifts away from the seed value 1/8.
"""

from azmap import NumericPolicy, make_seed, run_escape

seed = make_seed(1, 1000)
g = run_escape(seed, 10**4, NumericPolicy.DOUBLE_DOUBLE, decimation=1000)
print(f"seed phi~0 = {seed.phi_tilde_0:.15f}")
print(f"gains {g.plus_count}, neutral {g.zero_count}, losses {g.minus_count}; final action {g.final_action:g}")
for k, I, t in zip(g.track_index, g.track_action, g.phi_tilde_track):
    print(f"  after {k:5d} returns: I = {I:6g}, phi~ = {t:.10f}")

off = run_escape(seed.shifted(0.05), 10**4, NumericPolicy.DOUBLE_DOUBLE)
print(f"shifted by 0.05: monotone for {off.longest_monotone_prefix} returns, "
      f"phi~ range {off.phi_tilde_range[0]:.4f}..{off.phi_tilde_range[1]:.4f}")
