import numpy as np
import pytest

from fairshare import DegenerateSample, NoEvents, PreferenceSpec, UnknownPreset, preset
from fairshare.estimation import (
    EventLog,
    fit_all,
    fit_beta_mle,
    fit_homophily,
    generate_event_log,
    like_prob_samples,
)


def facebook_prefs():
    _, prefs = preset("facebook")
    return prefs


class TestBetaMle:
    def test_recovers_known_shapes(self, rng):
        x = rng.beta(2.0, 5.0, size=100_000)
        a, b = fit_beta_mle(x)
        assert abs(a - 2.0) < 0.1
        assert abs(b - 5.0) < 0.1

    def test_recovers_extreme_shapes(self, rng):
        x = rng.beta(0.95, 1.35, size=10_000)
        a, b = fit_beta_mle(x)
        assert abs(a - 0.95) < 0.1
        assert abs(b - 1.35) < 0.1

    def test_gradient_and_likelihood_quality(self, rng):
        from scipy import special

        x = np.clip(rng.beta(1.2, 3.4, size=5000), 1e-6, 1 - 1e-6)
        a, b, diag = fit_beta_mle(x, return_diagnostics=True)
        mlx, ml1x = np.mean(np.log(x)), np.mean(np.log1p(-x))
        g = np.array([
            special.digamma(a) - special.digamma(a + b) - mlx,
            special.digamma(b) - special.digamma(a + b) - ml1x,
        ])
        assert np.linalg.norm(g) <= 1e-8
        assert diag["log_likelihood"] >= diag["log_likelihood_mom"] - 1e-9

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateSample):
            fit_beta_mle([0.5] * 100)

    def test_boundary_clipping_warns(self, rng):
        x = np.concatenate([rng.beta(2, 2, size=500), [0.0, 1.0]])
        with pytest.warns(UserWarning, match="clipped"):
            fit_beta_mle(x)

    def test_permutation_invariance(self, rng):
        x = rng.beta(3, 2, size=2000)
        a1, b1 = fit_beta_mle(x)
        a2, b2 = fit_beta_mle(x[::-1])
        assert abs(a1 - a2) < 1e-9
        assert abs(b1 - b2) < 1e-9

    def test_doubling_invariance(self, rng):
        x = rng.beta(3, 2, size=2000)
        a1, b1 = fit_beta_mle(x)
        a2, b2 = fit_beta_mle(np.concatenate([x, x]))
        assert abs(a1 - a2) < 1e-9
        assert abs(b1 - b2) < 1e-9

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            fit_beta_mle([0.5])


class TestHomophily:
    def _log(self, sharer, receiver):
        n = len(sharer)
        z = np.zeros(n, dtype=bool)
        return EventLog(t=np.ones(n, dtype=int),
                        sharer_group=np.array(sharer),
                        receiver_group=np.array(receiver),
                        article=np.zeros(n, dtype=int),
                        clicked=z, liked=z)

    def test_recovers_known_q(self, rng):
        log = generate_event_log(facebook_prefs(), 0.5, 0.72, 0.68,
                                 n_events=100_000, seed=3)
        q_A, q_B = fit_homophily(log)
        assert abs(q_A - 0.72) < 0.01
        assert abs(q_B - 0.68) < 0.01

    def test_all_intra_warns(self):
        log = self._log([0, 0, 1, 1], [0, 0, 1, 1])
        with pytest.warns(UserWarning, match="outside"):
            q_A, q_B = fit_homophily(log)
        assert q_A == 1.0 and q_B == 1.0

    def test_missing_group_raises(self):
        log = self._log([0, 0, 0], [0, 1, 0])
        with pytest.raises(NoEvents):
            fit_homophily(log)


class TestSampleExtraction:
    def test_prefers_logged_probabilities(self):
        log = generate_event_log(facebook_prefs(), 0.5, 0.72, 0.68,
                                 n_events=10_000, seed=9)
        x = like_prob_samples(log, 0, 0)
        assert x.size > 1000
        assert np.all((x > 0) & (x < 1))

    def test_per_user_fallback(self, rng):
        n = 600
        users = np.repeat(np.arange(100), 6)
        clicked = np.ones(n, dtype=bool)
        liked = rng.random(n) < 0.4
        log = EventLog(t=np.ones(n, dtype=int),
                       sharer_group=np.zeros(n, dtype=int),
                       receiver_group=np.zeros(n, dtype=int),
                       article=np.zeros(n, dtype=int),
                       clicked=clicked, liked=liked,
                       like_prob_sample=None, user=users)
        x = like_prob_samples(log, 0, 0, min_clicks=5)
        assert x.size == 100
        assert abs(x.mean() - 0.4) < 0.1

    def test_no_samples_raises(self):
        z = np.zeros(4, dtype=bool)
        log = EventLog(t=np.ones(4, dtype=int),
                       sharer_group=np.zeros(4, dtype=int),
                       receiver_group=np.zeros(4, dtype=int),
                       article=np.zeros(4, dtype=int),
                       clicked=z, liked=z)
        with pytest.raises(NoEvents):
            like_prob_samples(log, 0, 0)


class TestEventLogCsv:
    def test_round_trip(self, tmp_path):
        log = generate_event_log(facebook_prefs(), 0.5, 0.72, 0.68,
                                 n_events=500, seed=21)
        path = tmp_path / "events.csv"
        log.write_csv(path, header_lines=["seed=21"])
        back = EventLog.read_csv(path)
        assert np.array_equal(back.sharer_group, log.sharer_group)
        assert np.array_equal(back.clicked, log.clicked)
        assert np.allclose(back.like_prob_sample, log.like_prob_sample)
        assert np.array_equal(back.user, log.user)

    def test_liked_requires_clicked(self):
        with pytest.raises(ValueError):
            EventLog(t=np.ones(1, dtype=int),
                     sharer_group=np.zeros(1, dtype=int),
                     receiver_group=np.zeros(1, dtype=int),
                     article=np.zeros(1, dtype=int),
                     clicked=np.array([False]), liked=np.array([True]))

    def test_missing_columns_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,article\n1,a\n")
        with pytest.raises(ValueError, match="missing columns"):
            EventLog.read_csv(path)


class TestFitAll:
    def test_round_trip(self):
        prefs = facebook_prefs()
        log = generate_event_log(prefs, 0.5, 0.72, 0.68,
                                 n_events=80_000, seed=17)
        fitted = fit_all(log)
        assert abs(fitted["q_A"] - 0.72) < 0.02
        assert abs(fitted["pi_A"] - 0.5) < 0.02
        for g in range(2):
            for s in range(2):
                cell = fitted["cells"][f"{'AB'[g]}{'ab'[s]}"]
                spec = prefs[g][s]
                assert abs(cell["alpha"] - spec.alpha) < 0.15
                assert abs(cell["beta"] - spec.beta) < 0.25


class TestPresets:
    def test_facebook_row(self):
        params, prefs = preset("facebook")
        assert params.pi_A == 0.5
        assert params.q_A == 0.72 and params.q_B == 0.68
        assert (prefs[0][0].alpha, prefs[0][0].beta) == (0.95, 1.35)
        assert prefs[0][0].value == 2000.0 and prefs[0][1].value == 200.0
        # Click-and-like rates implied by the fitted shapes.
        assert params.psi[0, 0] == pytest.approx(0.4130, abs=1e-3)
        assert params.psi[1, 1] == pytest.approx(0.3520, abs=1e-3)

    def test_brexit_warns_low_homophily(self):
        params, _ = preset("twitter-brexit")
        assert any("q_B" in w for w in params.warnings)

    def test_unknown_raises(self):
        with pytest.raises(UnknownPreset):
            preset("nosuch")

    def test_all_presets_load(self):
        for name in ("facebook", "twitter-us-elections", "twitter-brexit",
                     "twitter-abortion"):
            params, prefs = preset(name)
            assert params.horizon_T == 10
            assert np.all(params.psi > 0)
            assert isinstance(prefs[1][1], PreferenceSpec)
