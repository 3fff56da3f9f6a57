# coding: utf-8

# # Simulating believe-the-negative rule-out on a cohort
#
# Exams scoring below the threshold are ruled out; the reader decides the rest.
# Sweeping the rule-out fraction traces the trade-off.

# In[1]:

import numpy as np

from ruleout_eu import Cohort, UtilityContext, iui, sweep

rng = np.random.default_rng(7)
n = 20000
truth = (rng.random(n) < 0.01).astype(int)
scores = np.where(truth == 1, rng.normal(2.0, 1.0, n), rng.normal(0.0, 1.0, n))
# the reader recalls 90% of cancers and 6% of non-cancers
reader = np.where(truth == 1, rng.random(n) < 0.90, rng.random(n) < 0.06).astype(int)
cohort = Cohort.from_arrays(truth, reader, scores)
print(f"{n} exams, prevalence {cohort.prevalence:.4f}")


# In[2]:

ctx = UtilityContext(cohort.prevalence, 162.0)
for row in sweep(cohort, [0.0, 0.1, 0.3, 0.5, 0.7]):
    p = row.with_device
    print(f"target {row.requested_fraction:.1f}  achieved {row.achieved_fraction:.3f}  "
          f"Se {p.tpr:.3f}  Sp {1 - p.fpr:.4f}  IUI {iui(p, ctx):.4f}")


# # Paired bootstrap of one scenario

# In[3]:

from ruleout_eu import BootstrapConfig, apply_ruleout, bootstrap_metric, threshold_for_fraction
from ruleout_eu.inference import iui_metric

threshold, achieved = threshold_for_fraction(cohort, 0.3)
table = apply_ruleout(cohort, threshold).table
cand, _ = bootstrap_metric(table, iui_metric(ctx), BootstrapConfig(n_resamples=2000, seed=1))
print(f"ruled out {achieved:.3f}: IUI {cand.point_estimate:.4f} "
      f"CI ({cand.ci_low:.4f}, {cand.ci_high:.4f}) P(>reader alone) {cand.exceedance_probability:.3f}")
