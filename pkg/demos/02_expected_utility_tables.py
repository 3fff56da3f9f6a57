# coding: utf-8

# # Expected utility proxies for published rule-out results
#
# IUI is the y-intercept of the iso-utility line through an ROC point. DIUI is
# the same idea in recall/detection space. Both order operating points exactly
# as expected utility does.

# In[1]:

from ruleout_eu import RocPoint, UtilityContext, iui, iso_slope_roc
from ruleout_eu.studies import EURO_2022, US_2019

ctx = US_2019.context
print(f"iso-utility slope in ROC space: {iso_slope_roc(ctx):.5f}")


# In[2]:

print("ruleout%   Se     Sp     IUI    published")
for row in US_2019.rows:
    p = RocPoint.from_se_sp(row.se, row.sp)
    print(f"{row.ruleout_pct:>7}  {row.se:.3f}  {row.sp:.3f}  {iui(p, ctx):.4f}  {row.published_iui}")


# In[3]:

from ruleout_eu import RdPoint, diui

u = EURO_2022.relative_utility
print("ruleout%  recall   detect   DIUI x1e3")
for row in EURO_2022.rows:
    d = diui(RdPoint(row.recall_rate, row.detection_rate), u)
    print(f"{row.ruleout_pct:>7}  {row.recall_rate:.4f}  {row.detection_rate:.5f}  {1e3 * d:.3f}")


# # Bootstrap comparison against baseline
#
# Rows are turned into paired tables and resampled per truth class. The seed
# makes every number below reproducible.

# In[4]:

from ruleout_eu import BootstrapConfig
from ruleout_eu.studies import reproduce

out = reproduce("us-2019", BootstrapConfig(n_resamples=2000, seed=0))
for r in out["rows"]:
    p = r["p_iui_gt_baseline"]
    p_txt = "-" if p is None else f"{p:.3f}"
    print(f"{r['ruleout_pct']:>3}%  IUI {r['iui']:.4f}  CI ({r['ci_low']:.4f}, {r['ci_high']:.4f})  P(>base) {p_txt}")
