# coding: utf-8

# # Predictive values and likelihood ratios
#
# An operating point in ROC space fixes two likelihood ratios. Combined with
# the prevalence odds they give PPV and NPV.

# In[1]:

from ruleout_eu import RocPoint, UtilityContext, likelihood_ratios, npv, ppv

reader = RocPoint.from_se_sp(0.906, 0.935)
ctx = UtilityContext(prevalence=0.007, relative_utility=162.0)
rho_plus, rho_minus = likelihood_ratios(reader)
print(f"rho+ = {rho_plus:.3f}   rho- = {rho_minus:.4f}")


# In[2]:

print(f"PPV = {ppv(reader, ctx):.4f}")
print(f"NPV = {npv(reader, ctx):.5f}")


# At screening prevalence NPV is pinned near one for almost any reader, so it
# says little about how good a rule-out policy is.

# In[3]:

for pi in (0.001, 0.007, 0.05, 0.2):
    c = UtilityContext(pi, 162.0)
    print(f"prevalence {pi:<6} PPV {ppv(reader, c):.4f}  NPV {npv(reader, c):.5f}")


# # Superiority regions
#
# A candidate can beat the reference on sensitivity and specificity, on both
# predictive values, or on expected utility. The third is the one that matters.

# In[4]:

from ruleout_eu import classify

for se, sp in ((0.901, 0.942), (0.95, 0.95), (0.85, 0.999)):
    v = classify(RocPoint.from_se_sp(se, sp), reader, ctx)
    print(f"Se {se} Sp {sp}: sesp={v.sesp_superior} pv={v.ppv_npv_superior} eu={v.eu_superior}")
