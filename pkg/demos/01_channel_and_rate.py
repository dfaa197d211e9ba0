# One channel realization, seen from a few antenna positions.
#
# Positions are in wavelengths.  The CIR is a sum of phase-rotated path
# coefficients per tap; the CFR is its 64-point DFT, and the rate is the
# water-filled OFDM rate in bps/Hz.

import numpy as np

from maofdm.channel import cfr, cir
from maofdm.rate import channel_power_bound, cir_power, rate_upper_bound, rate_waterfilled, water_fill
from maofdm.scenario import ScenarioConfig, sample_channel

cfg = ScenarioConfig()          # M=64, M_cp=6, T=6 taps, L=5 paths, 25 dB
lb = cfg.link_budget
ch = sample_channel(cfg, 0)     # realization 0 of seed 0, always the same

origin = np.zeros(3)
h = cir(ch, origin, origin)
c = cfr(h, lb.M)
print("taps:", ch.n_taps, " paths:", ch.coeffs.size)
print("CIR power / g0 at origin %.3f" % (cir_power(h) / cfg.g0))
print("Parseval check %.2e" % abs(np.sum(abs(c) ** 2) - lb.M * cir_power(h)))

pa = water_fill(abs(c) ** 2, lb)
print("active subcarriers %d of %d, water level %.4f" % (np.sum(pa.p > 0), lb.M, pa.water_level))

G = channel_power_bound(ch)     # every path of every tap in phase
print("rate at origin   %.3f bps/Hz" % rate_waterfilled(c, lb))
print("rate upper bound %.3f bps/Hz" % rate_upper_bound(G, lb))

# half a wavelength is enough to change the picture
for dx in (0.25, 0.5, 1.0):
    r = np.array([dx, 0.0, 0.0])
    print("Rx moved %.2f λ along x -> %.3f bps/Hz" % (dx, rate_waterfilled(cfr(cir(ch, origin, r), lb.M), lb)))
