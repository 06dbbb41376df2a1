import numpy as np
import numpy.testing as npt
import pytest

from oracles import (
    empirical_law,
    enumerated_loglik,
    observed_state_law,
    random_params,
    random_sequence,
    total_variation,
)
from phmm.core import Dataset, ObservedSequence, RngStream, build_cache, power_stack
from phmm.errors import CacheMissError
from phmm.samplers import classic_forward, collapsed_forward, backward_sample, marginal_loglik, partial_marginal_loglik
from phmm.samplers.forward import backward_batch, forward_batch
from phmm.samplers.layout import SequenceLayout


def _cache_for(seq, params):
    layout = SequenceLayout.observed(Dataset((seq,), params.K, params.M))
    return build_cache(params.A, layout.needed_gaps())


class TestSequenceLayout:
    def test_rows_sorted_by_steps(self, small_dataset):
        layout = SequenceLayout.observed(small_dataset)
        npt.assert_array_equal(layout.steps, [7, 4, 3, 3, 0])
        npt.assert_array_equal(layout.order, [2, 4, 0, 1, 3])
        npt.assert_array_equal(layout.active, [4, 4, 4, 2, 1, 1, 1])
        assert layout.total_steps == small_dataset.total_observed

    def test_gaps_and_offsets(self, small_dataset):
        layout = SequenceLayout.observed(small_dataset)
        row = list(layout.order).index(4)
        npt.assert_array_equal(layout.positions[row, :4], [0, 2, 5, 6])
        npt.assert_array_equal(layout.gaps[row, :4], [0, 2, 3, 1])
        assert layout.needed_gaps() == {1, 2, 3}

    def test_complete_layout_covers_every_position(self, small_dataset):
        layout = SequenceLayout.complete(small_dataset)
        assert layout.total_steps == small_dataset.total_positions
        assert layout.all_gaps_one

    def test_flatten_is_in_dataset_order(self, small_dataset):
        layout = SequenceLayout.observed(small_dataset)
        flat = layout.flatten(layout.symbols)
        expected = np.concatenate([seq.observed_symbols for seq in small_dataset])
        npt.assert_array_equal(flat, expected)
        npt.assert_array_equal(layout.unflatten(flat, fill=-1), layout.symbols)

    def test_chunks_stay_prefix_sorted(self, small_dataset):
        layout = SequenceLayout.observed(small_dataset)
        chunk = layout.chunk(1, 4)
        npt.assert_array_equal(chunk.active, [3, 3, 3, 1])
        assert chunk.total_steps == 10


class TestCollapsedLikelihood:
    def test_matches_enumeration(self):
        """200 random instances, relative error 1e-9"""
        generator = np.random.default_rng(1)
        for _ in range(200):
            K, M = generator.integers(2, 4, size=2)
            T = int(generator.integers(3, 7))
            params = random_params(int(K), int(M), generator)
            seq = random_sequence(T, int(M), float(generator.uniform(0, 0.8)), generator)
            table = collapsed_forward(seq, params, _cache_for(seq, params))
            expected = enumerated_loglik(seq, params)
            assert table.loglik == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_fully_missing_sequence_has_zero_loglik(self, default_params):
        seq = ObservedSequence.from_values([None] * 4)
        assert collapsed_forward(seq, default_params, build_cache(default_params.A, {1})).loglik == 0.0

    def test_trailing_missing_positions_contribute_one(self, default_params):
        short = ObservedSequence.from_values([0, None, 2])
        padded = ObservedSequence.from_values([0, None, 2, None, None])
        cache = build_cache(default_params.A, {1, 2})
        assert collapsed_forward(short, default_params, cache).loglik == pytest.approx(
            collapsed_forward(padded, default_params, cache).loglik, rel=1e-14
        )

    def test_dataset_loglik_agrees_with_full_path_recursion(self, small_dataset, default_params):
        assert marginal_loglik(small_dataset, default_params) == pytest.approx(
            partial_marginal_loglik(small_dataset, default_params), rel=1e-12
        )

    def test_missing_power_raises(self, default_params):
        seq = ObservedSequence.from_values([0, None, None, 1])
        with pytest.raises(CacheMissError):
            collapsed_forward(seq, default_params, build_cache(default_params.A, {1, 2}))


class TestNoMissingReduction:
    def test_forward_vectors_match_classic(self):
        """100 instances without missing data agree with the scaled forward algorithm entrywise"""
        generator = np.random.default_rng(2)
        for _ in range(100):
            K, M = (int(v) for v in generator.integers(2, 5, size=2))
            T = int(generator.integers(2, 15))
            params = random_params(K, M, generator)
            seq = random_sequence(T, M, 0.0, generator)
            table = collapsed_forward(seq, params, build_cache(params.A, {1}))
            alpha, log_scale = classic_forward(seq, params)
            npt.assert_allclose(table.alpha, alpha, rtol=0, atol=1e-12)
            npt.assert_allclose(table.log_scale, log_scale, rtol=0, atol=1e-12)


class TestBackwardSampling:
    def _draws(self, seq, params, count, generator):
        layout = SequenceLayout.observed(Dataset((seq,), params.K, params.M))
        stack = power_stack(params.A.values, layout.max_power)
        alpha, _ = forward_batch(layout, params.pi.weights, params.B.values, stack)
        copies = layout.repeat(count)
        states = backward_batch(copies, np.repeat(alpha, count, axis=0), stack, generator.random((count, layout.width)))
        return states[:, : seq.n_observed]

    def test_matches_enumerated_conditional(self):
        generator = np.random.default_rng(3)
        for case in range(20):
            K = 2 if case % 2 else 3
            M = int(generator.integers(2, 4))
            params = random_params(K, M, generator)
            n_obs = int(generator.integers(1, 5 if K == 2 else 4))
            T = n_obs + int(generator.integers(0, 3))
            positions = np.sort(generator.choice(T, size=n_obs, replace=False))
            seq = ObservedSequence.from_index(T, positions, generator.integers(0, M, size=n_obs))
            draws = self._draws(seq, params, 200_000, generator)
            assert total_variation(empirical_law(draws), observed_state_law(seq, params)) < 0.01

    def test_single_sequence_api(self, default_params):
        seq = ObservedSequence.from_values([None, 0, None, None, 2, 1])
        cache = _cache_for(seq, default_params)
        table = collapsed_forward(seq, default_params, cache)
        draw = backward_sample(table, seq, default_params, cache, RngStream(5, 3))
        npt.assert_array_equal(draw.positions, seq.observed_index)
        assert draw.states.shape == (3,)
        assert np.all((draw.states >= 0) & (draw.states < 3))

    def test_empty_sequence_gives_empty_draw(self, default_params):
        seq = ObservedSequence.from_values([None, None])
        cache = build_cache(default_params.A, {1})
        draw = backward_sample(collapsed_forward(seq, default_params, cache), seq, default_params, cache, RngStream(1))
        assert len(draw) == 0
