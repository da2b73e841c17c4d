"""
Tests for the channel bounds and the Z-channel sweep
"""
import numpy as np
import pytest

from core.exceptions import DistributionError
from core.models import Channel, OptimizerOptions, ProbVector
from tools.bounds import (
    ac13_bound,
    ac13_objective,
    binary_input,
    erasure_embedding_z,
    erasure_lower_bound_z,
    new_upper_bound,
    restricted_coupling,
    source_model_bound,
    zchannel_restricted_bound,
    zchannel_sweep,
)
from tools.channel import permute_outputs, standard_channel
from tools.information import compose_joint

TINY = OptimizerOptions(restarts=2, tol=1e-9, max_iters=100, seed=0, grid_resolution=4)


class TestErasureLowerBound:

    def test_grid(self):
        for t in np.linspace(0.0, 1.0, 101):
            assert erasure_lower_bound_z(t) == min(1.0 - t, t) / 2.0

    def test_peak(self):
        assert erasure_lower_bound_z(0.5) == 0.25

    @pytest.mark.parametrize("t", [-0.01, 1.01])
    def test_out_of_range(self, t):
        with pytest.raises(DistributionError):
            erasure_lower_bound_z(t)

    @pytest.mark.parametrize("t", [0.1, 0.37, 0.5, 0.9])
    def test_embedding_is_erasure_channel(self, t):
        embedded = permute_outputs(erasure_embedding_z(t), [1, 0, 2])
        np.testing.assert_allclose(embedded.matrix, standard_channel("bec", t).matrix, atol=1e-15)


class TestAC13:
    """max over p(x) of min(I(X;Y), H(X|Y))"""

    def test_bec(self):
        result = ac13_bound(standard_channel("bec", 0.3))
        assert result.value == pytest.approx(0.3, abs=1e-6)
        assert result.arg_px.probs[0] == pytest.approx(0.5, abs=1e-3)

    @pytest.mark.parametrize("matrix", [np.eye(2), [[0.3, 0.7], [0.3, 0.7]]])
    def test_trivial_channels(self, matrix):
        assert ac13_bound(Channel(matrix=matrix)).value == pytest.approx(0.0, abs=1e-12)

    def test_zchannel_half(self):
        assert ac13_bound(standard_channel("zchannel", 0.5)).value == pytest.approx(0.32193, abs=1e-4)

    def test_extra_candidate_size_checked(self):
        with pytest.raises(DistributionError):
            ac13_bound(standard_channel("bsc", 0.1), extra_candidates=[ProbVector.uniform(3)])

    def test_objective_is_min_of_two_terms(self):
        px = binary_input(0.5)
        assert ac13_objective(px, standard_channel("bec", 0.2)) == pytest.approx(0.2, abs=1e-12)
        assert ac13_objective(px, standard_channel("bec", 0.8)) == pytest.approx(0.2, abs=1e-12)


class TestNewUpperBound:

    def test_bec(self, light_opts):
        result = new_upper_bound(standard_channel("bec", 0.3), light_opts)
        assert result.value == pytest.approx(0.3, abs=1e-3)
        assert result.arg_coupling is not None

    @pytest.mark.slow
    @pytest.mark.parametrize("t", [0.1, 0.3, 0.5, 0.7, 0.9])
    def test_bec_grid(self, t):
        result = new_upper_bound(standard_channel("bec", t))
        assert result.value == pytest.approx(min(1.0 - t, t), abs=1e-3)

    @pytest.mark.parametrize("matrix", [np.eye(2), [[0.3, 0.7], [0.3, 0.7]]])
    def test_trivial_channels(self, matrix, light_opts):
        assert new_upper_bound(Channel(matrix=matrix), light_opts).value == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("t", [0.2, 0.5, 0.8])
    def test_never_above_ac13(self, t, light_opts):
        ch = standard_channel("zchannel", t)
        new = new_upper_bound(ch, light_opts)
        ac13 = ac13_bound(ch, light_opts, extra_candidates=[new.arg_px])
        assert new.value <= ac13.value + 1e-9

    def test_output_permutation_invariance(self, light_opts):
        ch = standard_channel("bec", 0.3)
        permuted = permute_outputs(ch, [2, 0, 1])
        first = new_upper_bound(ch, light_opts).value
        second = new_upper_bound(permuted, light_opts).value
        assert first == pytest.approx(second, abs=1e-6)

    def test_three_inputs(self):
        ch = Channel(matrix=[[0.8, 0.2], [0.5, 0.5], [0.1, 0.9]])
        new = new_upper_bound(ch, TINY, threads=2)
        ac13 = ac13_bound(ch, TINY, extra_candidates=[new.arg_px])
        assert new.arg_px.size == 3
        assert 0.0 <= new.value <= ac13.value + 1e-9

    def test_deterministic_across_threads(self):
        ch = Channel(matrix=[[0.8, 0.2], [0.5, 0.5], [0.1, 0.9]])
        assert new_upper_bound(ch, TINY, threads=1).value == new_upper_bound(ch, TINY, threads=4).value


class TestRestrictedZChannel:
    """Binary Q with p(q=0|x=1)=0"""

    def test_strictly_below_ac13(self, light_opts):
        restricted = zchannel_restricted_bound(0.2, light_opts)
        ac13 = ac13_bound(standard_channel("zchannel", 0.2), light_opts, extra_candidates=[restricted.arg_px])
        assert restricted.value <= ac13.value - 0.01

    def test_half_matches_ac13(self, light_opts):
        restricted = zchannel_restricted_bound(0.5, light_opts)
        ac13 = ac13_bound(standard_channel("zchannel", 0.5), light_opts, extra_candidates=[restricted.arg_px])
        assert restricted.value <= ac13.value + 1e-9
        assert restricted.value == pytest.approx(0.32193, abs=1e-3)

    @pytest.mark.parametrize("t", [0.0, 1.0])
    def test_endpoints(self, t):
        assert zchannel_restricted_bound(t).value <= 1e-6

    def test_family_shape(self):
        np.testing.assert_allclose(restricted_coupling(0.3).matrix, [[0.3, 0.7], [0.0, 1.0]])
        np.testing.assert_allclose(restricted_coupling(1.2).matrix, [[1.0, 0.0], [0.0, 1.0]])

    def test_invalid_t(self):
        with pytest.raises(DistributionError):
            zchannel_restricted_bound(1.2)


class TestSourceModel:

    def test_bec_source(self, light_opts):
        joint = compose_joint(ProbVector.uniform(2), standard_channel("bec", 0.3))
        result = source_model_bound(joint, light_opts)
        assert result.value == pytest.approx(0.3, abs=1e-6)
        np.testing.assert_allclose(result.arg_px.probs, [0.5, 0.5])

    def test_independent_source(self, independent_joint, light_opts):
        assert source_model_bound(independent_joint, light_opts).value == pytest.approx(0.0, abs=1e-12)


class TestZChannelSweep:

    def test_endpoints_are_zero(self, light_opts):
        rows = zchannel_sweep([0.0, 1.0], light_opts)
        for row in rows:
            assert row.new_upper <= 1e-6
            assert row.ac13_upper <= 1e-6
            assert row.erasure_lower == 0.0

    def test_rows_follow_input_order(self, light_opts):
        t_values = [0.7, 0.1, 0.4]
        rows = zchannel_sweep(t_values, light_opts, threads=3)
        assert [row.t for row in rows] == t_values

    def test_same_rows_for_any_thread_count(self, light_opts):
        t_values = [0.1, 0.3, 0.5, 0.9]
        assert zchannel_sweep(t_values, light_opts, threads=1) == zchannel_sweep(t_values, light_opts, threads=4)

    def test_invalid_t(self, light_opts):
        with pytest.raises(DistributionError):
            zchannel_sweep([0.5, 1.5], light_opts)

    @pytest.mark.slow
    def test_nineteen_points(self):
        t_values = np.linspace(0.05, 0.95, 19).tolist()
        for row in zchannel_sweep(t_values):
            assert row.erasure_lower <= row.ac13_upper + 1e-6
            assert row.new_upper <= row.ac13_upper + 1e-9
            assert row.new_upper >= row.erasure_lower - 1e-6
