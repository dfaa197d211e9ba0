# Parallel greedy ascent against the fixed-antenna baselines.
#
# Both antennas live in 4λ x 4λ x 4λ cubes.  The rate objective uses the
# exact water-filled rate; the cir_power objective climbs ||h||^2 and only
# water-fills once at the end.

import time

import numpy as np

from maofdm.baselines import AsGrid, as_rate, fpa_rate
from maofdm.pga import PgaConfig, pga
from maofdm.rate import channel_power_bound, rate_upper_bound
from maofdm.scenario import ScenarioConfig, sample_channel

cfg = ScenarioConfig()
lb = cfg.link_budget
ch = sample_channel(cfg, 3)

print("FPA  %.3f bps/Hz" % fpa_rate(ch, lb))
print("AS   %.3f bps/Hz  (3 x 3 antennas, λ/2 apart)" % as_rate(ch, AsGrid(), lb))

for mode in ("rate", "cir_power"):
    start = time.perf_counter()
    tr = pga(ch, cfg.regions, lb, PgaConfig(seed=1), mode)
    print("PGA/%-9s %.3f bps/Hz after %d iterations (%.2f s, %s)"
          % (mode, tr.rate, tr.iterations, time.perf_counter() - start, tr.termination))

print("bound %.3f bps/Hz" % rate_upper_bound(channel_power_bound(ch), lb))

# the incumbent never decreases; most of the gain comes early
tr = pga(ch, cfg.regions, lb, PgaConfig(seed=1), "rate")
b = np.array(tr.best_objective)
for i in (0, 1, 2, 5, 10, 30, tr.iterations):
    print("  iteration %3d: %.4f" % (i, b[i]))
print("  t* =", np.round(tr.t, 3), " r* =", np.round(tr.r, 3))

# steepest ascent (one candidate) versus ten parallel candidates
for k in (1, 5, 10):
    print("K_max=%2d -> %.3f" % (k, pga(ch, cfg.regions, lb, PgaConfig(k_max=k, seed=1)).rate))
