import math

import numpy as np
import pytest

from rsvhmc.hmc import SinkError, default_init, hmc_update, load_checkpoint, run_chain
from rsvhmc.integrators import Scheme, TrajectoryConfig
from rsvhmc.synth import STUDY_PARAMS, simulate


def small_dataset(n=200, seed=17):
    return simulate(STUDY_PARAMS, n, seed=seed)


class TestHmcUpdate:
    def test_tiny_step_is_accepted(self):
        ds = small_dataset()
        cfg = TrajectoryConfig(Scheme.LEAPFROG2, 1e-6, 1)
        rng = np.random.default_rng(0)
        for _ in range(20):
            out = hmc_update(ds.h_true, ds.theta_true, ds.data, cfg, rng)
            assert abs(out.delta_h) < 1e-8
            assert out.accepted

    def test_rejection_returns_input_unchanged(self):
        ds = small_dataset()
        # an absurd step size guarantees rejection
        cfg = TrajectoryConfig(Scheme.LEAPFROG2, 50.0, 3)
        rng = np.random.default_rng(1)
        rejected = 0
        for _ in range(20):
            h0 = ds.h_true.copy()
            out = hmc_update(h0, ds.theta_true, ds.data, cfg, rng)
            if not out.accepted:
                rejected += 1
                np.testing.assert_array_equal(out.h_new, ds.h_true)
        assert rejected > 0

    def test_domain_failure_counts_as_rejection(self):
        ds = small_dataset()
        cfg = TrajectoryConfig(Scheme.LEAPFROG2, 1e6, 2)
        rng = np.random.default_rng(2)
        out = hmc_update(ds.h_true, ds.theta_true, ds.data, cfg, rng)
        assert not out.accepted
        assert out.delta_h == math.inf
        np.testing.assert_array_equal(out.h_new, ds.h_true)

    def test_energy_identity_in_equilibrium(self):
        # <exp(-delta H)> = 1 for a reversible volume-preserving proposal
        ds = small_dataset()
        cfg = TrajectoryConfig.from_length(Scheme.MINIMUM_NORM2, 2.0, 0.25)
        rng = np.random.default_rng(3)
        h = ds.h_true.copy()
        for _ in range(300):  # equilibrate
            h = hmc_update(h, ds.theta_true, ds.data, cfg, rng).h_new
        vals = np.empty(4000)
        for i in range(len(vals)):
            out = hmc_update(h, ds.theta_true, ds.data, cfg, rng)
            h = out.h_new
            vals[i] = math.exp(-out.delta_h) if math.isfinite(out.delta_h) else 0.0
        mean = np.mean(vals)
        # jackknife over 20 bins
        bins = vals.reshape(20, -1).mean(axis=1)
        err = math.sqrt(19 / 20 * np.sum((bins - np.mean(bins)) ** 2)) / math.sqrt(20)
        se = np.std(bins, ddof=1) / math.sqrt(20)
        assert abs(mean - 1.0) < 3 * max(se, err)

    def test_acceptance_decreases_with_step_size(self):
        ds = small_dataset()
        rng = np.random.default_rng(4)
        h = ds.h_true.copy()
        rates = []
        for dt in (0.1, 0.3, 0.6, 1.0):
            cfg = TrajectoryConfig.from_length(Scheme.LEAPFROG2, 2.0, dt)
            acc = []
            for _ in range(400):
                out = hmc_update(h, ds.theta_true, ds.data, cfg, rng)
                h = out.h_new
                acc.append(out.accepted)
            rates.append(np.mean(acc))
        # statistical check with generous slack
        for lo, hi in zip(rates[1:], rates[:-1]):
            assert lo <= hi + 0.1


class TestRunChain:
    def test_single_keep_is_reproducible(self):
        ds = small_dataset(n=60)
        cfg = TrajectoryConfig.from_length(Scheme.MINIMUM_NORM2, 1.0, 0.2)
        runs = []
        for _ in range(2):
            rng = np.random.default_rng(99)
            runs.append(
                run_chain(ds.data, default_init(ds.data), cfg, 5, 1, rng, h_indices=(9,))
            )
        assert runs[0].params["phi"][0] == runs[1].params["phi"][0]
        np.testing.assert_array_equal(runs[0].h_samples, runs[1].h_samples)

    def test_chains_bit_identical_for_same_seed(self):
        ds = small_dataset(n=120)
        cfg = TrajectoryConfig.from_length(Scheme.MINIMUM_NORM2, 1.0, 0.2)
        a = run_chain(ds.data, default_init(ds.data), cfg, 10, 50, np.random.default_rng(7))
        b = run_chain(ds.data, default_init(ds.data), cfg, 10, 50, np.random.default_rng(7))
        for name in a.params:
            np.testing.assert_array_equal(a.params[name], b.params[name])
        np.testing.assert_array_equal(a.delta_h, b.delta_h)
        np.testing.assert_array_equal(a.accepted, b.accepted)

    def test_fixed_params_posterior_mean_matches_reference(self):
        # latent-only sampling at the true parameters: a medium run must agree
        # with a longer independent reference run on the h_10 posterior mean
        ds = small_dataset(n=150, seed=23)
        cfg = TrajectoryConfig.from_length(Scheme.MINIMUM_NORM2, 2.0, 0.25)
        init = (ds.theta_true, ds.data.ln_rv - ds.theta_true.xi)
        short = run_chain(
            ds.data, init, cfg, 500, 8000, np.random.default_rng(1), update_params=False
        )
        ref = run_chain(
            ds.data, init, cfg, 500, 24000, np.random.default_rng(2), update_params=False
        )

        def mean_and_se(x):
            from rsvhmc.diagnostics import integrated_act

            est = integrated_act(x)
            # guard against an underestimated window on the shorter chain
            act = est.two_tau_int + est.error
            return np.mean(x), np.std(x, ddof=1) * math.sqrt(act / len(x))

        m1, s1 = mean_and_se(short.h_samples[:, 0])
        m2, s2 = mean_and_se(ref.h_samples[:, 0])
        assert abs(m1 - m2) < 3 * math.hypot(s1, s2)

    def test_recorded_h_indices(self):
        ds = small_dataset(n=40)
        cfg = TrajectoryConfig.from_length(Scheme.LEAPFROG2, 1.0, 0.2)
        res = run_chain(
            ds.data,
            default_init(ds.data),
            cfg,
            0,
            20,
            np.random.default_rng(0),
            h_indices=(0, 9, 39),
        )
        assert res.h_samples.shape == (20, 3)
        cols = res.columns()
        assert {"h_1", "h_10", "h_40"} <= set(cols)

    def test_bad_h_index_rejected(self):
        ds = small_dataset(n=40)
        cfg = TrajectoryConfig.from_length(Scheme.LEAPFROG2, 1.0, 0.2)
        with pytest.raises(ValueError):
            run_chain(
                ds.data,
                default_init(ds.data),
                cfg,
                0,
                1,
                np.random.default_rng(0),
                h_indices=(40,),
            )

    def test_sink_failure_writes_checkpoint_and_resume_matches(self, tmp_path):
        ds = small_dataset(n=60)
        cfg = TrajectoryConfig.from_length(Scheme.MINIMUM_NORM2, 1.0, 0.2)
        ckpt = tmp_path / "chain.ckpt"

        calls = {"n": 0}

        def flaky_sink(row):
            calls["n"] += 1
            if calls["n"] == 30:
                raise OSError("disk full")

        with pytest.raises(SinkError) as exc:
            run_chain(
                ds.data,
                default_init(ds.data),
                cfg,
                10,
                100,
                np.random.default_rng(5),
                sink=flaky_sink,
                checkpoint_path=ckpt,
            )
        assert exc.value.checkpoint == ckpt
        assert ckpt.exists()

        resumed = run_chain(
            ds.data,
            default_init(ds.data),
            cfg,
            10,
            100,
            np.random.default_rng(5),
            resume_from=load_checkpoint(ckpt),
        )
        unbroken = run_chain(
            ds.data, default_init(ds.data), cfg, 10, 100, np.random.default_rng(5)
        )
        for name in unbroken.params:
            np.testing.assert_array_equal(resumed.params[name], unbroken.params[name])
        np.testing.assert_array_equal(resumed.delta_h, unbroken.delta_h)
