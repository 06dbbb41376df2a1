import numpy as np
import numpy.testing as npt
import pytest

from phmm.core import Priors, RngStream
from phmm.definitions import SamplerName, Stream
from phmm.diagnostics import (
    Reporter,
    SamplerReport,
    align,
    autocorrelation,
    best_permutation,
    cross_validated_accuracy,
    em_report,
    ess,
    inverse,
    latent_accuracy,
    mask_observed,
    posterior_summary,
    score_params,
)
from phmm.errors import DomainError
from phmm.samplers import ChainTrace, SamplerConfig, SamplerSpec, run_collapsed_gibbs, run_partially_collapsed_gibbs
from phmm.simulation import simulate


def _ar1(phi, n, generator):
    noise = generator.standard_normal(n)
    x = np.empty(n)
    x[0] = noise[0]
    for t in range(1, n):
        x[t] = phi * x[t - 1] + noise[t]
    return x


class TestEss:
    def test_white_noise(self, generator):
        x = generator.standard_normal(10_000)
        assert 0.85 < ess(x) / x.size < 1.15

    def test_ar1(self, generator):
        phi, n = 0.9, 50_000
        expected = n * (1 - phi) / (1 + phi)
        assert ess(_ar1(phi, n, generator)) == pytest.approx(expected, rel=0.25)

    def test_alternating_series_is_not_penalised(self):
        x = np.tile([1.0, -1.0], 500)
        assert ess(x) == 1000.0

    def test_constant_series(self):
        assert ess(np.full(50, 0.3)) == 50.0

    def test_affine_invariance(self, generator):
        x = _ar1(0.5, 2000, generator)
        assert ess(3.0 * x - 7.0) == pytest.approx(ess(x), rel=1e-9)

    def test_bounds(self, generator):
        for phi in (-0.9, 0.0, 0.5, 0.99):
            value = ess(_ar1(phi, 1000, generator))
            assert 0.0 <= value <= 1000.0

    def test_short_chain_is_rejected(self):
        with pytest.raises(DomainError):
            ess(np.arange(9.0))

    def test_autocorrelation_starts_at_one(self, generator):
        rho = autocorrelation(generator.standard_normal(100))
        assert rho[0] == pytest.approx(1.0)
        assert rho.size == 100


class TestAlignment:
    def test_recovers_relabelling(self, default_params):
        relabel = (1, 2, 0)
        estimate = default_params.permuted(relabel)
        perm = best_permutation(estimate.B.values, default_params.B.values)
        assert perm == tuple(np.argsort(relabel))
        aligned, _ = align(estimate, default_params)
        npt.assert_allclose(aligned.A.values, default_params.A.values)
        npt.assert_allclose(aligned.pi.weights, default_params.pi.weights)

    def test_identity_wins_ties(self):
        B = np.full((3, 2), 0.5)
        assert best_permutation(B, B) == (0, 1, 2)

    def test_inverse_maps_sampler_labels(self):
        perm = (2, 0, 1)
        relabel = inverse(perm)
        for aligned_label, sampler_label in enumerate(perm):
            assert relabel[sampler_label] == aligned_label

    def test_too_many_states(self):
        B = np.eye(6)
        with pytest.raises(DomainError):
            best_permutation(B, B)


class TestReports:
    def test_scores_are_zero_at_truth(self, default_params):
        scores = score_params(default_params, default_params)
        assert scores == {"init_mse": 0.0, "trans_mse": 0.0, "emis_mse": 0.0}

    def test_latent_accuracy(self):
        assert latent_accuracy([np.array([0, 1, 2]), np.array([1])], [np.array([0, 1, 1]), np.array([1])]) == 0.75

    def test_report_validation(self):
        with pytest.raises(DomainError):
            SamplerReport("collapsed", -1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            SamplerReport("collapsed", 0.1, 1.0, 1.0, latent_accuracy=1.5)

    def test_report_with_truth(self, default_params, flat_priors):
        dataset, truth = simulate(default_params, 30, 10, "random", 0.3, seed=3)
        config = SamplerConfig(iterations=40, burn_in=20, seed=1, keep_latents=True, log_interval=0)
        for run in (run_collapsed_gibbs, run_partially_collapsed_gibbs):
            report = Reporter(run(dataset, flat_priors, config), dataset, seed=1).report(truth)
            assert 0.0 <= report.latent_accuracy <= 1.0
            assert report.median_ess_per_iter >= 0.0
            assert sorted(report.permutation) == [0, 1, 2]
            assert report.z_steps_per_iter > 0
            row = report.to_row()
            assert isinstance(row["permutation"], str)

    def test_majority_vote_covers_every_position(self, small_dataset, flat_priors, short_config):
        trace = run_collapsed_gibbs(small_dataset, flat_priors, short_config)
        voted = Reporter(trace, small_dataset).majority_vote()
        assert [v.size for v in voted] == small_dataset.lengths.tolist()

    def test_short_chain_gives_nan_efficiency(self, small_dataset, flat_priors):
        trace = run_collapsed_gibbs(small_dataset, flat_priors, SamplerConfig(iterations=5, burn_in=0, log_interval=0))
        report = Reporter(trace, small_dataset).report()
        assert np.isnan(report.median_ess_per_iter)
        assert report.latent_accuracy is None

    def test_em_report(self, default_params):
        dataset, truth = simulate(default_params, 20, 8, "random", 0.2, seed=2)
        report = em_report(default_params, dataset, 0.5, 10, truth)
        assert report.trans_mse == 0.0
        assert report.time_per_1000_iters == pytest.approx(50.0)
        assert 0.0 <= report.latent_accuracy <= 1.0

    def test_posterior_summary(self, default_params):
        frame = posterior_summary(ChainTrace.point_mass(default_params))
        assert list(frame.columns) == ["parameter", "mean", "std"]
        assert len(frame) == 3 + 9 + 9
        assert frame.loc[frame.parameter == "A_12", "mean"].item() == pytest.approx(0.3)


class TestCrossValidation:
    def test_mask_observed(self, small_dataset, generator):
        masked, hidden = mask_observed(small_dataset, 0.3, generator)
        assert sum(h.size for h in hidden) == round(0.3 * small_dataset.total_observed)
        for seq, masked_seq, positions in zip(small_dataset, masked, hidden):
            assert np.all(seq.entries[positions] >= 0)
            assert np.all(masked_seq.entries[positions] == -1)

    def test_mask_fraction_bounds(self, small_dataset, generator):
        with pytest.raises(DomainError):
            mask_observed(small_dataset, 1.0, generator)

    def test_accuracy_is_a_fraction(self, default_params):
        dataset, _ = simulate(default_params, 20, 10, "random", 0.1, seed=8)
        spec = SamplerSpec(SamplerName.EM, Priors.flat(3, 3))
        accuracy = cross_validated_accuracy(dataset, spec, 0.2, 2, RngStream(1, Stream.CROSS_VALIDATION), draws=20)
        assert 0.0 <= accuracy <= 1.0
