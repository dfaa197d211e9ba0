# Aligning every path phase by sliding the Tx antenna along x.
#
# With r fixed at the origin and t = [k, 0, 0] the phase of path n is
# 2π k u_n (u_n its x-axis virtual AoD).  For rationally independent u_n the
# sequence k * u mod 1 visits every box of the torus, so some integer k puts
# each tap at full amplitude with any target phase.

import numpy as np

from maofdm.channel import cir
from maofdm.scenario import ScenarioConfig, sample_channel
from maofdm.theory import PhaseTarget, periodic_channel, rational_dependence_scan, synthesize_phases

ch = sample_channel(ScenarioConfig(T=2, L=1), 0)
total = sum(tap.l1_norm for tap in ch.taps)
nu = np.array([0.1, 0.7])                       # target tap phases in cycles
delta = 2 * np.pi * total * 1e-2                # box width 1e-2 per path
res = synthesize_phases(ch, PhaseTarget(nu, delta), 1_000_000)
print("found k =", res.k, " box volume %.0e" % res.box_volume)
h = cir(ch, [res.k, 0, 0], np.zeros(3))
print("tap magnitudes ", np.round(abs(h), 4), " vs ||b||_1", np.round([t.l1_norm for t in ch.taps], 4))
print("tap phases/2π  ", np.round(np.mod(np.angle(h) / (2 * np.pi), 1), 4), " target", nu)
print("residuals", np.round(res.residuals, 4), "<= δ = %.4f" % delta)

# rational angles: the CIR repeats itself and the search can fail forever
per = periodic_channel([1, 2], 0.25)
print("periodic channel relation:", rational_dependence_scan(per.k_tx[:, 0], 10))
print("random channel relation:  ", rational_dependence_scan(ch.k_tx[:, 0], 20))
