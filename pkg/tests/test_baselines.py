import numpy as np
import numpy.testing as npt
import pytest

from oracles import path_weights, random_params, random_sequence
from phmm.core import Dataset, HmmParams, ObservedSequence, Priors
from phmm.definitions import LatentKind, SamplerName
from phmm.errors import DomainError
from phmm.samplers import (
    ChainTrace,
    EmConfig,
    PartiallyCollapsedGibbsSampler,
    SamplerConfig,
    SamplerSpec,
    VanillaGibbsSampler,
    fit_em,
    marginal_loglik,
    run_em,
    run_partially_collapsed_gibbs,
    run_vanilla_gibbs,
    viterbi,
)
from phmm.simulation import simulate


class TestFullPathSamplers:
    @pytest.mark.parametrize("run", [run_partially_collapsed_gibbs, run_vanilla_gibbs])
    def test_steps_count_every_position(self, run, small_dataset, flat_priors, short_config):
        trace = run(small_dataset, flat_priors, short_config)
        assert np.all(trace.z_steps == small_dataset.total_positions)

    @pytest.mark.parametrize("run", [run_partially_collapsed_gibbs, run_vanilla_gibbs])
    def test_steps_are_summed_over_worker_chunks(self, run, default_params, flat_priors):
        dataset, _ = simulate(default_params, 30, 9, "random", 0.4, seed=2)
        config = SamplerConfig(iterations=6, burn_in=2, seed=1, workers=3, log_interval=0)
        trace = run(dataset, flat_priors, config)
        assert np.all(trace.z_steps == dataset.total_positions)
        assert trace.latent_kind == LatentKind.FULL
        assert trace.latents.shape == (10, small_dataset.total_positions)

    @pytest.mark.parametrize("run", [run_partially_collapsed_gibbs, run_vanilla_gibbs])
    def test_repeatable(self, run, small_dataset, flat_priors, short_config):
        one, two = run(small_dataset, flat_priors, short_config), run(small_dataset, flat_priors, short_config)
        npt.assert_array_equal(one.A, two.A)
        npt.assert_array_equal(one.latents, two.latents)

    def test_vanilla_imputes_only_missing_positions(self, small_dataset, flat_priors, short_config):
        sampler = VanillaGibbsSampler(small_dataset, flat_priors, short_config)
        sampler.run()
        draws = sampler.current_draws()
        for seq, draw in zip(small_dataset, draws):
            assert draw.imputed.size == seq.n_missing
            assert np.all((draw.imputed >= 0) & (draw.imputed < 3))
            assert draw.states.size == seq.T
        observed = sampler.layout.valid & ~sampler.missing
        npt.assert_array_equal(sampler.filled[observed], sampler.layout.symbols[observed])

    def test_partial_draws_cover_full_paths(self, small_dataset, flat_priors, short_config):
        sampler = PartiallyCollapsedGibbsSampler(small_dataset, flat_priors, short_config)
        sampler.run()
        for seq, draw in zip(small_dataset, sampler.current_draws()):
            assert draw.states.size == seq.T
            assert draw.imputed is None


class TestSamplerSpec:
    def test_em_gives_point_mass(self, small_dataset, flat_priors):
        trace = SamplerSpec(SamplerName.EM, flat_priors).fit(small_dataset)
        assert len(trace) == 1
        assert trace.sampler == "em"

    def test_gibbs_dispatch(self, small_dataset, flat_priors):
        config = SamplerConfig(iterations=3, burn_in=1, log_interval=0)
        trace = SamplerSpec(SamplerName.VANILLA, flat_priors, config).fit(small_dataset)
        assert trace.sampler == "vanilla"
        assert len(trace) == 2


class TestEm:
    def test_loglik_never_decreases(self):
        """50 random cases; log-likelihood is non-decreasing within 1e-10"""
        generator = np.random.default_rng(11)
        for _ in range(50):
            K, M = (int(v) for v in generator.integers(2, 4, size=2))
            n, T = int(generator.integers(3, 12)), int(generator.integers(3, 15))
            p = float(generator.uniform(0, 0.6))
            truth = random_params(K, M, generator)
            dataset, _ = simulate(truth, n, T, "random", p, seed=int(generator.integers(1 << 30)))
            start = random_params(K, M, generator)
            result = run_em(dataset, start, max_iters=60, tol=1e-12)
            assert np.all(np.diff(result.loglik) >= -1e-10)

    def test_trace_matches_returned_parameters(self, default_params):
        dataset, _ = simulate(default_params, 50, 10, "random", 0.3, seed=5)
        start = Priors.flat(3, 3).sample(np.random.default_rng(0))
        result = run_em(dataset, start, max_iters=500, tol=1e-4)
        assert result.loglik.size < 500
        assert marginal_loglik(dataset, result.params) == pytest.approx(result.loglik[-1], rel=1e-8)

    def test_empty_rows_are_smoothed(self):
        dataset = Dataset((ObservedSequence.from_values([0, 0, 0]),), 2, 2)
        start = HmmParams.from_arrays([1.0, 0.0], [[1.0, 0.0], [0.5, 0.5]], [[0.9, 0.1], [0.5, 0.5]])
        result = run_em(dataset, start, max_iters=3)
        npt.assert_allclose(result.params.B.values[1], [0.5, 0.5])
        assert np.all(np.isfinite(result.loglik))

    def test_restarts_take_the_best(self, default_params):
        dataset, _ = simulate(default_params, 40, 10, "random", 0.2, seed=6)
        priors = Priors.flat(3, 3)
        single = fit_em(dataset, priors, EmConfig(max_iters=50, restarts=1, seed=2))
        several = fit_em(dataset, priors, EmConfig(max_iters=50, restarts=4, seed=2))
        assert several.loglik[-1] >= single.loglik[-1] - 1e-12

    def test_config_validation(self):
        with pytest.raises(DomainError):
            EmConfig(restarts=0)


class TestViterbi:
    def test_matches_enumeration(self):
        generator = np.random.default_rng(12)
        for _ in range(30):
            K, M = (int(v) for v in generator.integers(2, 4, size=2))
            params = random_params(K, M, generator)
            seq = random_sequence(int(generator.integers(2, 6)), M, 0.3, generator)
            paths, weights = path_weights(seq, params)
            best = viterbi(Dataset((seq,), K, M), params)[0]
            assert weights[np.all(paths == best, axis=1)][0] == pytest.approx(weights.max(), rel=1e-12)

    def test_short_complete_sequence(self, default_params):
        dataset = Dataset((ObservedSequence.from_values([0, 1]),), 3, 3)
        paths, weights = path_weights(dataset[0], default_params)
        npt.assert_array_equal(viterbi(dataset, default_params)[0], paths[weights.argmax()])

    def test_ragged_dataset(self):
        generator = np.random.default_rng(5)
        params = random_params(3, 2, generator)
        sequences = [random_sequence(T, 2, 0.3, generator) for T in (1, 4, 2, 4, 3)]
        decoded = viterbi(Dataset(tuple(sequences), 3, 2), params)
        for seq, best in zip(sequences, decoded):
            assert best.shape == (seq.T,)
            paths, weights = path_weights(seq, params)
            assert weights[np.all(paths == best, axis=1)][0] == pytest.approx(weights.max(), rel=1e-12)

    def test_ties_go_to_lowest_state(self):
        params = HmmParams.from_arrays([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]])
        dataset = Dataset((ObservedSequence.from_values([0, None, 1]),), 2, 2)
        npt.assert_array_equal(viterbi(dataset, params)[0], [0, 0, 0])


class TestChainTrace:
    def test_point_mass(self, default_params):
        trace = ChainTrace.point_mass(default_params)
        npt.assert_array_equal(trace.posterior_mean().A.values, default_params.A.values)

    def test_free_coordinates(self, small_dataset, flat_priors, short_config):
        trace = run_partially_collapsed_gibbs(small_dataset, flat_priors, short_config)
        names, values = trace.free_coordinates()
        assert len(names) == 2 + 6 + 6
        assert values.shape == (10, 14)

    def test_timings(self, small_dataset, flat_priors, short_config):
        trace = run_partially_collapsed_gibbs(small_dataset, flat_priors, short_config)
        assert trace.ms_forward.shape == (20,)
        assert trace.time_per_1000_iters == pytest.approx(1000 * trace.total_seconds / 20)
