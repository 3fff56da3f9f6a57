# coding: utf-8

# # Relative utility implied by current practice
#
# If a screening program operates where it should, the tangent slope of its
# recall/detection curve at the operating point reveals the relative utility.

# In[1]:

from ruleout_eu import baseline_relative_utility, fit_spline, slope_at
from ruleout_eu.baseline_ru import bundled_curve

curve = bundled_curve()
model = fit_spline(curve)
for x in (0.02, 0.032, 0.045):
    s = slope_at(model, x)
    print(f"recall {x:.3f}: slope {s:.5f}  U_rel {baseline_relative_utility(curve, x):.1f}")


# The bundled curve is synthetic. Its slope, and so the implied relative
# utility, depend on the data behind the curve.

# In[2]:

from ruleout_eu.baseline_ru import knot_bootstrap_relative_utility

out = knot_bootstrap_relative_utility(curve, 0.032, n_resamples=500, seed=0)
print(f"knot bootstrap: median {out['median']:.1f}  "
      f"interval ({out['ci_low']:.1f}, {out['ci_high']:.1f})  used {out['n_used']}")
