import numpy as np
import pytest

from ruleout_eu.cohort import PairedOutcomeTable, PairedRecallTable, table_from_aggregates
from ruleout_eu.inference import (
    BootstrapConfig,
    TooManyUndefinedError,
    bootstrap_metric,
    bootstrap_rd,
    iui_metric,
    ppv_npv_exceedance,
    replicate_rng,
    resample_paired,
)
from ruleout_eu.metrics import RdPoint, RocPoint, UtilityContext, iui

CTX = UtilityContext(0.007, 162.0)
YALA_10 = table_from_aggregates(191, 26349, RocPoint(0.906, 0.065), RocPoint(0.901, 0.061))


class TestConfig:
    @pytest.mark.parametrize("kw", [{"n_resamples": 0}, {"ci_level": 1.0}, {"seed": -1}, {"seed": 2**64}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            BootstrapConfig(**kw)

    def test_defaults(self):
        cfg = BootstrapConfig()
        assert (cfg.n_resamples, cfg.ci_level) == (5000, 0.95)


class TestResamplePaired:
    def test_empty_class_unchanged(self):
        t = PairedOutcomeTable.from_counts((0, 0, 0), (5, 3, 10))
        r = resample_paired(t, replicate_rng(0, 0))
        assert r.cancer.total == 0
        assert r.noncancer.total == 18

    def test_degenerate(self):
        t = PairedOutcomeTable.from_counts((0, 7, 0), (0, 0, 40))
        for i in range(20):
            assert resample_paired(t, replicate_rng(1, i)) == t

    def test_multinomial_mean(self):
        # E[pos_both] = 173 with sd sqrt(191 p (1-p)); 3 standard errors of the mean
        t = PairedOutcomeTable.from_counts((173, 1, 17), (1, 0, 1))
        rng = np.random.default_rng(5)
        draws = rng.multinomial(191, t.cancer.as_array() / 191, size=10**5)[:, 0]
        ours = np.array([resample_paired(t, replicate_rng(9, i)).cancer.pos_both for i in range(20000)])
        p = 173 / 191
        se = np.sqrt(191 * p * (1 - p) / len(ours))
        assert abs(ours.mean() - 173) < 3 * se
        assert abs(draws.mean() - 173) < 3 * np.sqrt(191 * p * (1 - p) / 1e5)

    def test_nesting_preserved(self):
        for i in range(200):
            r = resample_paired(YALA_10, replicate_rng(2, i))
            w, wo = r.with_device_counts(), r.without_device_counts()
            assert w.tp <= wo.tp and w.fp <= wo.fp
            assert r.cancer.total == 191 and r.noncancer.total == 26349

    def test_unconditional_keeps_grand_total(self):
        for i in range(50):
            r = resample_paired(YALA_10, replicate_rng(2, i), conditional=False)
            assert r.total == YALA_10.total


class TestBootstrapMetric:
    def test_constant_metric(self):
        c, r = bootstrap_metric(YALA_10, lambda t: (0.5, 0.5), BootstrapConfig(n_resamples=200))
        assert (c.ci_low, c.ci_high) == (0.5, 0.5)
        assert c.exceedance_probability == 0.0
        assert c.tie_probability == 1.0

    def test_single_resample(self):
        cfg = BootstrapConfig(n_resamples=1, keep_replicates=True)
        c, _ = bootstrap_metric(YALA_10, iui_metric(CTX), cfg)
        assert c.ci_low == c.ci_high == c.replicate_values[0]

    def test_point_estimate(self):
        c, r = bootstrap_metric(YALA_10, iui_metric(CTX), BootstrapConfig(n_resamples=50))
        assert c.point_estimate == iui(YALA_10.with_device_point(), CTX)
        assert r.point_estimate == iui(YALA_10.without_device_point(), CTX)
        assert c.ci_low <= c.ci_high

    def test_yala_exceedance(self):
        c, _ = bootstrap_metric(YALA_10, iui_metric(CTX), BootstrapConfig(n_resamples=2000, seed=11))
        assert c.exceedance_probability == pytest.approx(0.365, abs=0.10)
        assert ppv_npv_exceedance(YALA_10, BootstrapConfig(n_resamples=2000, seed=11)) == pytest.approx(0.364, abs=0.10)

    def test_determinism_and_workers(self):
        cfg = BootstrapConfig(n_resamples=400, seed=42, keep_replicates=True)
        a, _ = bootstrap_metric(YALA_10, iui_metric(CTX), cfg)
        b, _ = bootstrap_metric(YALA_10, iui_metric(CTX), cfg)
        par = BootstrapConfig(n_resamples=400, seed=42, keep_replicates=True, n_workers=4)
        c, _ = bootstrap_metric(YALA_10, iui_metric(CTX), par)
        assert a.replicate_values.tobytes() == b.replicate_values.tobytes() == c.replicate_values.tobytes()
        assert a == b == c

    def test_seed_sensitivity(self):
        res = [
            bootstrap_metric(YALA_10, iui_metric(CTX), BootstrapConfig(seed=s, keep_replicates=True))[1]
            for s in (1, 2)
        ]
        assert not np.array_equal(res[0].replicate_values, res[1].replicate_values)
        sd = res[0].replicate_values.std()
        # se of a 2.5% quantile from 5000 normal draws, for the difference of two seeds
        se_q = np.sqrt(0.025 * 0.975 / 5000) / 0.05845 * sd * np.sqrt(2)
        assert abs(res[0].ci_low - res[1].ci_low) < 3 * se_q
        assert abs(res[0].ci_high - res[1].ci_high) < 3 * se_q

    def test_undefined_replicates(self):
        calls = {"n": 0}

        def flaky(t):
            calls["n"] += 1
            if calls["n"] % 200 == 0:
                raise ZeroDivisionError
            return 1.0, 0.0

        c, _ = bootstrap_metric(YALA_10, flaky, BootstrapConfig(n_resamples=1000))
        assert 0 < c.n_undefined <= 10

        def bad(t):
            calls["n"] += 1
            return (float("nan"), 0.0) if calls["n"] % 10 == 0 else (1.0, 0.0)

        with pytest.raises(TooManyUndefinedError):
            bootstrap_metric(YALA_10, bad, BootstrapConfig(n_resamples=1000))

    def test_coverage(self):
        # 95% percentile CI for a binomial proportion should cover the truth in >= 90% of trials
        rng = np.random.default_rng(2024)
        truth, n, covered, trials = 0.3, 120, 0, 500
        for trial in range(trials):
            k = int(rng.binomial(n, truth))
            t = PairedOutcomeTable.from_counts((k, 0, n - k), (0, 0, 1))
            c, _ = bootstrap_metric(
                t, lambda tt: (tt.cancer.pos_both / n, 0.0), BootstrapConfig(n_resamples=200, seed=trial)
            )
            covered += c.ci_low <= truth <= c.ci_high
        assert covered / trials >= 0.90

    def test_pairing_reduces_variance(self):
        # strongly dependent workflows: only a handful of exams differ
        t = table_from_aggregates(400, 20000, RocPoint(0.9, 0.08), RocPoint(0.895, 0.075))
        n = 2000
        paired = []
        for i in range(n):
            r = resample_paired(t, replicate_rng(3, i))
            paired.append(iui(r.with_device_point(), CTX) - iui(r.without_device_point(), CTX))
        rng = np.random.default_rng(3)
        indep = []
        for _ in range(n):
            tp_w = rng.binomial(400, t.with_device_point().tpr)
            tp_o = rng.binomial(400, t.without_device_point().tpr)
            fp_w = rng.binomial(20000, t.with_device_point().fpr)
            fp_o = rng.binomial(20000, t.without_device_point().fpr)
            s = 0.993 / 0.007 / 162
            indep.append((tp_w - tp_o) / 400 - s * (fp_w - fp_o) / 20000)
        assert np.var(paired) <= np.var(indep)


class TestBootstrapRd:
    def test_baseline_ci(self):
        t = PairedRecallTable.from_rates(122969, RdPoint(0.032, 0.0061), RdPoint(0.032, 0.0061))
        c, r = bootstrap_rd(t, 111, BootstrapConfig(n_resamples=2000))
        assert r.ci_low == pytest.approx(5.40e-3, abs=0.3e-3)
        assert r.ci_high == pytest.approx(6.27e-3, abs=0.3e-3)
        # identical workflows tie in every paired replicate
        assert c.exceedance_probability == 0.0 and c.tie_probability == 1.0
        assert c.exceedance_probability + 0.5 * c.tie_probability == 0.5

    def test_single_resample(self):
        t = PairedRecallTable.from_rates(1000, RdPoint(0.05, 0.01), RdPoint(0.03, 0.008))
        c, _ = bootstrap_rd(t, 10, BootstrapConfig(n_resamples=1))
        assert c.ci_low == c.ci_high

    def test_invalid_utility(self):
        t = PairedRecallTable.from_rates(1000, RdPoint(0.05, 0.01), RdPoint(0.03, 0.008))
        with pytest.raises(ValueError):
            bootstrap_rd(t, 0.0)
