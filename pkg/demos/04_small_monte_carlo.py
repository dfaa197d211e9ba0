# A desk-scale Monte-Carlo run and its outage numbers.
#
# The CLI does the same thing with
#     maofdm run --realizations 40 --set schemes=pga_cir,fpa,as,upper_bound --out r.csv
#     maofdm cdf r.csv --threshold 8

import numpy as np

from maofdm.harness import ExperimentSpec, empirical_cdf, rates_of, records_to_csv, run_experiment
from maofdm.pga import PgaConfig
from maofdm.scenario import ScenarioConfig

spec = ExperimentSpec(
    scenario=ScenarioConfig(L=6),
    pga=PgaConfig(i_max=40),
    schemes=("pga_cir", "fpa", "as", "upper_bound"),
    n_realizations=40,
)
records = run_experiment(spec)

for scheme in spec.schemes:
    r = rates_of(records, scheme)
    print("%-12s mean %.3f  P(R <= 8) = %.3f" % (scheme, r.mean(), empirical_cdf(r, [8.0])[0]))

# records are sorted, so the CSV is byte-stable for a given seed
print(records_to_csv(records[:3]), end="")
