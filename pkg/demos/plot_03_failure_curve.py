"""
Failure probability as task durations grow
==========================================

Scale every task duration by (1 + t/100) and ask how likely daily output
falls short of demand.  The plug-in answer uses posterior means; the Monte
Carlo answer averages over the chain.
"""

import numpy as np

from mcmcfidelity import estimate_priors, failure_curve, generate, run_chain, synth

data = generate(synth.facility_like(seed=7))
priors = estimate_priors(data, n_boot=1000, sample_size=500, seed=11)
chain = run_chain(priors, data, iterations=5000, burn_in=1000, seed=12)

baseline = data.predictor_means()
demand = 100.0
plug = failure_curve(chain, baseline, demand)
mc = failure_curve(chain, baseline, demand, estimator="monte-carlo", seed=1)

for t in (0, 10, 26, 50, 100):
    print(f"t = {t:3d}%   plug-in {plug.at(t):.4f}   monte-carlo {mc.at(t):.4f}")
print("largest gap between estimators:", np.abs(plug.p_fail - mc.p_fail).max())
print("nondecreasing:", plug.is_nondecreasing())
