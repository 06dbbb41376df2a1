import numpy as np
import numpy.testing as npt
import pytest

from oracles import empirical_law, imputation_law, random_params, total_variation
from phmm.core import Dataset, HmmParams, ObservedSequence, RngStream, build_cache, power_stack
from phmm.errors import CacheMissError, DomainError, ImpossibleBridgeError
from phmm.prediction import (
    bridge_batch,
    bridge_fill,
    complete_paths,
    decode_new,
    forecast,
    imputation_histogram,
    impute_dataset,
    impute_missing,
    posterior_mode,
)
from phmm.samplers import ChainTrace, LatentDraw
from phmm.samplers.layout import SequenceLayout


def _identity_params(K: int) -> HmmParams:
    return HmmParams.from_arrays(np.full(K, 1.0 / K), np.eye(K), np.eye(K))


class TestBridges:
    def test_bridge_matches_enumeration(self):
        generator = np.random.default_rng(21)
        A = random_params(3, 2, generator).A.values
        stack = power_stack(A, 3)
        left, right, count = 0, 2, 100_000
        drawn = bridge_batch(np.full(count, left), np.full(count, right), np.full(count, 3), A, stack, generator)
        exact = {
            (a, b): A[left, a] * A[a, b] * A[b, right] / stack[3, left, right] for a in range(3) for b in range(3)
        }
        assert total_variation(empirical_law(drawn), exact) < 0.02

    def test_bridge_fill_length_and_endpoints(self, default_params):
        cache = build_cache(default_params.A, {1, 5})
        states = bridge_fill(1, 2, 5, cache, RngStream(3))
        assert states.shape == (4,)
        assert np.all((states >= 0) & (states < 3))

    def test_bridge_fill_needs_cached_power(self, default_params):
        with pytest.raises(CacheMissError):
            bridge_fill(0, 1, 4, build_cache(default_params.A, {1, 2}), RngStream(3))

    def test_bridge_fill_rejects_short_gap(self, default_params):
        with pytest.raises(DomainError):
            bridge_fill(0, 1, 1, build_cache(default_params.A, {1}), RngStream(3))

    def test_impossible_bridge(self):
        A = np.eye(2)
        with pytest.raises(ImpossibleBridgeError):
            bridge_batch(np.array([0]), np.array([1]), np.array([3]), A, power_stack(A, 3), np.random.default_rng(0))

    def test_complete_paths_keep_anchors(self, small_dataset, default_params):
        layout = SequenceLayout.observed(small_dataset)
        pi, A, _ = default_params.arrays()
        generator = np.random.default_rng(4)
        states = np.where(layout.valid, generator.integers(0, 3, size=layout.symbols.shape), -1)
        paths = complete_paths(layout, states, pi, A, power_stack(A, layout.max_power), generator)
        for row, index in enumerate(layout.order):
            seq = small_dataset[index]
            npt.assert_array_equal(paths[row, seq.observed_index], states[row, : seq.n_observed])
            assert np.all(paths[row, : seq.T] >= 0)
            assert np.all(paths[row, seq.T :] == -1)


class TestPredictive:
    def test_forecast_shape_and_identity_dynamics(self):
        trace = ChainTrace.point_mass(_identity_params(3))
        seq = ObservedSequence.from_values([2, None, 2, 2])
        paths = forecast(trace, seq, 5, 40, RngStream(8, 5))
        assert len(paths) == 40
        for path in paths:
            assert path.shape == (9,)
            npt.assert_array_equal(path, 2)

    def test_decode_with_identity_emissions(self):
        params = HmmParams.from_arrays([0.5, 0.5], [[0.7, 0.3], [0.4, 0.6]], np.eye(2))
        trace = ChainTrace.point_mass(params)
        seq = ObservedSequence.from_values([0, 1, 1, 0, 1])
        for draw in decode_new(trace, seq, 25, RngStream(2, 5)):
            assert isinstance(draw, LatentDraw)
            npt.assert_array_equal(draw.states, seq.entries)

    def test_decode_full_path(self, default_params):
        trace = ChainTrace.point_mass(default_params)
        seq = ObservedSequence.from_values([None, 0, None, 1])
        paths = decode_new(trace, seq, 10, RngStream(2, 5), full_path=True)
        assert all(path.shape == (4,) for path in paths)

    def test_impute_with_identity_model(self):
        trace = ChainTrace.point_mass(_identity_params(3))
        seq = ObservedSequence.from_values([1, None, 1, None])
        imputations = impute_missing(trace, seq, 30, RngStream(1, 5))
        histogram = imputation_histogram(imputations, 3)
        npt.assert_array_equal(histogram, [[0, 30, 0], [0, 30, 0]])
        npt.assert_array_equal(posterior_mode(histogram), [1, 1])

    def test_impute_matches_enumeration(self):
        generator = np.random.default_rng(22)
        for _ in range(3):
            params = random_params(2, 3, generator)
            seq = ObservedSequence.from_values([int(generator.integers(3)), None, int(generator.integers(3)), None])
            trace = ChainTrace.point_mass(params)
            drawn = np.vstack(impute_missing(trace, seq, 100_000, RngStream(int(generator.integers(1000)), 5)))
            assert total_variation(empirical_law(drawn), imputation_law(seq, params)) < 0.02

    def test_dataset_histograms_count_every_draw(self, small_dataset, default_params):
        trace = ChainTrace.point_mass(default_params)
        histograms = impute_dataset(trace, small_dataset, 200, RngStream(3, 5))
        for seq, histogram in zip(small_dataset, histograms):
            assert histogram.shape == (seq.n_missing, 3)
            npt.assert_array_equal(histogram.sum(axis=1), 200)

    def test_empty_trace_is_rejected(self, default_params):
        trace = ChainTrace.point_mass(default_params)
        trace.pi = trace.pi[:0]
        with pytest.raises(DomainError):
            forecast(trace, ObservedSequence.from_values([0, 1]), 2, 5, RngStream(1))

    def test_forecast_needs_positive_horizon(self, default_params):
        with pytest.raises(DomainError):
            forecast(ChainTrace.point_mass(default_params), ObservedSequence.from_values([0]), 0, 5, RngStream(1))
