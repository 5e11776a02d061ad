"""
Choosing a fidelity level
=========================

The critical growth is the point where even a full crew cannot meet demand.
Observed growth below a small floor stays operational, between the floor and
the critical value calls for labor re-allocation, and beyond it for a layout
redesign.
"""

from mcmcfidelity.decision import DecisionConfig, critical_value, run_pipeline

config = DecisionConfig(m_max=30, demand=100, shift_minutes=420)
print("K_critical =", critical_value(config))

for growth in (0.5, 10.0, 30.0):
    result = run_pipeline(None, config, observed_growth=growth, seed=2024,
                          n_boot=300, iterations=2000, burn_in=500)
    d = result.decision
    print(f"growth {growth:5.1f}%  ->  {d.level.value:<11}  P(fail at K) = {d.p_failure_at_k:.3f}")
