"""When correlated noise breaks the posterior analysis, and how averaging
rescues it.

White-noise optimality is fragile: with a noise correlation time of only
three samples, the posterior analysis misreads slow noise excursions as
state transitions and falls behind the plain threshold. Averaging blocks
of 20 samples shortens the correlations below one (filtered) time step;
with transition rates scaled up by the block size and the variance of
filtered noise measured numerically, the posterior analysis comes back
ahead of the threshold.

Run:  python demos/04_correlated_noise_filtering.py  (about a minute)
"""

import numpy as np

from spinread.experiments import ScenarioConfig, run_fidelity_experiment
from spinread.readout import FilterConfig, model_matched_params

scenario = ScenarioConfig(
    name="demo-correlated",
    state_model="psb",
    snr=1.0,
    a12=2.2e-3,
    n_test=6000,          # the full-size run uses 10000
    trace_length=300,
    correlation_time=3.0,
    filter_block=20,
    methods=("threshold", "hmm", "hmm_filtered"),
)

reports = {r.method: r for r in run_fidelity_experiment(scenario, seed=5)}

print("noise correlation time 3 samples, signal-to-noise ratio 1:\n")
for method in ("threshold", "hmm", "hmm_filtered"):
    r = reports[method]
    print(f"  {method:14s} infidelity {r.infidelity_estimate:.4f} "
          f"[{r.ci_lower:.4f}, {r.ci_upper:.4f}]")

matched = model_matched_params(
    scenario.truth_model(), scenario.noise_spec(),
    FilterConfig(scenario.filter_block), rng=0)
snr_eff = 1.0 / np.sqrt(matched.variances[0])
print(f"\nafter averaging blocks of {scenario.filter_block}, the measured "
      f"filtered-noise level gives an effective signal-to-noise ratio of "
      f"{snr_eff:.2f}")
print("scaled decay rate per filtered step:",
      f"{matched.transitions[0, 1]:.4f}")
print("\nunfiltered, the exact-posterior machinery loses to the humble")
print("threshold; the averaging filter restores its advantage")
