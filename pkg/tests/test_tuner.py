import numpy as np
import pytest

import naive
from conftest import random_curve
from coistop.correlate import DEFAULT_POOL, Coi
from coistop.curves import ErrorCurve
from coistop.indicators import Gl, Hnr, Mne, Og, P, Pq, Up, run_indicator
from coistop.nemesid import run_cost
from coistop.tuner import KINDS, grid_for, tune

SIZES = {"mne": 10, "gl": 9, "p": 9, "pq": 9, "up": 1, "hnr": 41, "og": 10, "coi": 6}


def v_curve(n=200, bottom=60):
    val = [50.0 + 0.5 * abs(e - bottom) for e in range(1, n + 1)]
    train = [40.0 * np.exp(-0.02 * e) + 1.0 for e in range(1, n + 1)]
    return ErrorCurve("v", train, val)


class TestGrids:
    @pytest.mark.parametrize("kind", KINDS)
    def test_sizes(self, kind):
        assert len(grid_for(kind)) == SIZES[kind]

    def test_values(self):
        assert grid_for("mne").candidates == tuple(Mne(m) for m in range(10, 101, 10))
        alphas = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
        assert grid_for("gl").candidates == tuple(Gl(a) for a in alphas)
        assert grid_for("p").candidates == tuple(P(5, a) for a in alphas)
        assert grid_for("pq").candidates == tuple(Pq(5, a) for a in alphas)
        assert grid_for("up").candidates == (Up(5, 5),)
        hnr = [c.alpha for c in grid_for("hnr").candidates]
        assert hnr[0] == 5.0 and hnr[-1] == 25.0 and hnr[1] == 5.5
        assert all(c.k == 5 for c in grid_for("hnr").candidates)
        assert [c.alpha for c in grid_for("og").candidates] == [
            0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]
        coi = grid_for("coi").candidates
        assert [c.alpha_corr for c in coi] == [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
        assert all(c.pool == DEFAULT_POOL and c.k == 5 for c in coi)

    def test_custom_strip(self):
        assert grid_for("up", k=4).candidates == (Up(4, 4),)
        assert grid_for("coi", coefficient="spearman").candidates[0].coefficient == "spearman"

    def test_unknown(self):
        with pytest.raises(ValueError):
            grid_for("nope")


class TestTune:
    def test_exact_match_wins(self):
        # val minimum at 60: mne[60] reproduces the baseline exactly
        res = tune(v_curve(), "mne", 200)
        assert res.best == Mne(60)
        assert res.objective == 0.0
        assert res.baseline.stop_epoch == 60

    def test_brute_force_sweep(self):
        c = v_curve()
        for kind in ("gl", "og", "hnr", "pq", "p"):
            res = tune(c, kind, 200)
            base = run_cost(res.baseline)
            scored = []
            for i, cfg in enumerate(grid_for(kind).candidates):
                cost = run_cost(run_indicator(c, cfg, 200))
                scored.append((abs(cost - base), cost - base, i, cfg))
            assert res.best == min(scored, key=lambda t: t[:3])[3]
            assert len(res.sweep) == len(scored)
            assert [r.cost for r in res.sweep] == [s[1] + base for s in scored]

    def test_all_out_of_range_takes_first(self):
        # monotone decreasing val: gl never fires, every candidate stops at the horizon
        c = ErrorCurve("d", [1.0] * 50, [100.0 - e for e in range(50)])
        res = tune(c, "gl", 50)
        assert res.outcome.out_of_range
        assert res.best == Gl(1.0)
        assert res.objective == 0.0  # the oracle also stops at the horizon

    def test_deterministic(self, rng):
        c = random_curve(rng, n=300)
        a = tune(c, "hnr", 300)
        b = tune(c, "hnr", 300)
        assert a == b

    def test_coi(self, rng):
        c = random_curve(rng, n=300)
        with pytest.raises(ValueError, match="pool"):
            tune(c, "coi", 300)
        res = tune(c, "coi", 300, pool=DEFAULT_POOL)
        assert isinstance(res.best, Coi)
        # the alpha=1.0 candidate never fires
        assert res.sweep[-1].outcome.out_of_range

    def test_coi_matches_separate_evaluation(self, rng):
        c = random_curve(rng, n=250)
        res = tune(c, "coi", 250, pool=DEFAULT_POOL)
        for row in res.sweep:
            assert row.outcome == run_indicator(c, row.config, 250)

    def test_horizon_check(self):
        with pytest.raises(ValueError, match="horizon"):
            tune(v_curve(50), "gl", 60)

    def test_baseline_is_oracle(self, rng):
        c = random_curve(rng, n=150)
        assert tune(c, "og", 120).baseline.stop_epoch == naive.oracle(list(c.val_error), 120)
