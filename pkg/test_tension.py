"""
Tests for the alpha functional, its epsilon relaxation and the tension slice
"""
import hypothesis as hp
import numpy as np
import pytest
from hypothesis import strategies as hps

from core.exceptions import DistributionError
from core.models import Channel, Coupling, JointDist, OptimizerOptions, ProbVector
from tools.channel import standard_channel
from tools.information import compose_joint, conditional_entropy, mutual_information
from tools.tension import (
    CouplingSearch,
    alpha_epsilon,
    alpha_epsilon_path,
    alpha_inner,
    alpha_joint,
    default_qcard,
    objective_decomposition,
    objective_f,
    search_alpha,
    tension_slice,
)
from tools.verify import brute_force_alpha, ot_correlation, random_coupling

FAST = OptimizerOptions(restarts=4, tol=1e-9, max_iters=300, seed=0)


class TestObjective:
    """objective_f and its four-entropy form"""

    def test_constant_q_gives_mutual_information(self):
        px, ch = ProbVector(probs=[0.3, 0.7]), standard_channel("zchannel", 0.4)
        value = objective_f(px, ch, Coupling.constant(2, 1))
        assert value == pytest.approx(mutual_information(compose_joint(px, ch)), abs=1e-12)

    def test_copy_gives_equivocation(self):
        px, ch = ProbVector(probs=[0.3, 0.7]), standard_channel("zchannel", 0.4)
        value = objective_f(px, ch, Coupling.copy_of_source(2))
        assert value == pytest.approx(conditional_entropy(compose_joint(px, ch)), abs=1e-12)

    def test_decomposition_on_zchannel(self):
        px, ch = ProbVector.uniform(2), standard_channel("zchannel", 0.4)
        coupling = random_coupling(np.random.default_rng(3), 2, 3)
        assert objective_f(px, ch, coupling) == pytest.approx(objective_decomposition(px, ch, coupling), abs=1e-12)

    @hp.given(hps.integers(0, 2**32 - 1))
    @hp.settings(max_examples=100, deadline=None)
    def test_decomposition_random(self, seed):
        rng = np.random.default_rng(seed)
        x_card, y_card, qcard = rng.integers(2, 5, size=3)
        px = ProbVector(probs=rng.dirichlet(np.ones(x_card)))
        ch = Channel(matrix=rng.dirichlet(np.ones(y_card), size=x_card))
        coupling = random_coupling(rng, int(x_card), int(qcard))
        assert abs(objective_f(px, ch, coupling) - objective_decomposition(px, ch, coupling)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DistributionError):
            objective_f(ProbVector.uniform(2), standard_channel("bsc", 0.1), Coupling.constant(3, 2))


class TestAlpha:
    """Multistart search for alpha"""

    def test_identity_channel(self, light_opts):
        value, _ = alpha_inner(ProbVector(probs=[0.4, 0.6]), Channel(matrix=np.eye(2)), opts=light_opts)
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_constant_output_channel(self, light_opts):
        ch = Channel(matrix=[[0.2, 0.8], [0.2, 0.8], [0.2, 0.8]])
        value, _ = alpha_inner(ProbVector.uniform(3), ch, opts=light_opts)
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_independent_and_copy_joints(self, independent_joint, copy_joint, light_opts):
        assert alpha_joint(independent_joint, opts=light_opts)[0] == pytest.approx(0.0, abs=1e-12)
        assert alpha_joint(copy_joint, opts=light_opts)[0] == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_alphabet(self, light_opts):
        value, coupling = alpha_joint(JointDist(matrix=[[0.2, 0.3, 0.5]]), opts=light_opts)
        assert value == 0.0
        assert coupling.source_card == 1

    @hp.given(hps.integers(0, 2**32 - 1))
    @hp.settings(max_examples=15, deadline=None)
    def test_never_above_trivial_bounds(self, seed):
        rng = np.random.default_rng(seed)
        px = ProbVector(probs=rng.dirichlet(np.ones(2)))
        ch = Channel(matrix=rng.dirichlet(np.ones(3), size=2))
        value, coupling = alpha_inner(px, ch, opts=FAST)
        joint = compose_joint(px, ch)
        assert value <= min(mutual_information(joint), conditional_entropy(joint))
        assert value >= -1e-10
        assert coupling.qcard == default_qcard(2, 3)

    def test_ot_correlation_value(self):
        # never below m for any coupling; the constant coupling attains m
        value, _ = alpha_joint(ot_correlation(1).joint, opts=OptimizerOptions(restarts=32, max_iters=500))
        assert 1.0 - 1e-6 <= value <= 1.0 + 1e-9

    def test_matches_lattice_oracle_on_zchannel(self, z_half_joint):
        value, _ = alpha_joint(z_half_joint, qcard=2, opts=OptimizerOptions(restarts=16, max_iters=2000))
        assert value == pytest.approx(brute_force_alpha(z_half_joint, 2, 256), abs=1e-3)

    def test_reported_coupling_attains_value(self, z_half_joint, light_opts):
        value, coupling = alpha_joint(z_half_joint, opts=light_opts)
        px = z_half_joint.row_marginal()
        ch = Channel(matrix=z_half_joint.matrix / px.probs[:, None])
        assert objective_f(px, ch, coupling) == pytest.approx(value, abs=1e-9)

    def test_deterministic(self, z_half_joint, light_opts):
        first = alpha_joint(z_half_joint, opts=light_opts)
        second = alpha_joint(z_half_joint, opts=light_opts)
        assert first[0] == second[0]
        np.testing.assert_array_equal(first[1].matrix, second[1].matrix)

    def test_qcard_bound_enforced(self, independent_joint):
        with pytest.raises(DistributionError):
            alpha_joint(independent_joint, qcard=default_qcard(2, 2) + 1)
        with pytest.raises(DistributionError):
            alpha_joint(independent_joint, qcard=0)

    def test_small_qcard_skips_copy_seed(self, z_half_joint, light_opts):
        outcome = search_alpha(z_half_joint, qcard=1, opts=light_opts)
        assert outcome.best.value == pytest.approx(mutual_information(z_half_joint), abs=1e-12)

    def test_gradient_matches_finite_differences(self, z_half_joint):
        search = CouplingSearch(z_half_joint, 3, FAST)
        coupling = np.array([[0.2, 0.5, 0.3], [0.6, 0.1, 0.3]])
        gradient = search.gradient(coupling)
        step = 1e-6
        # directional derivative along a zero-sum direction within row 0
        direction = np.zeros_like(coupling)
        direction[0] = [1.0, -1.0, 0.0]
        plus = sum(search.terms(coupling + step * direction))
        minus = sum(search.terms(coupling - step * direction))
        assert (plus - minus) / (2 * step) == pytest.approx(float(np.sum(gradient * direction)), rel=1e-4)


class TestAlphaEpsilon:

    def test_zero_eps_is_alpha(self, light_opts):
        joint = ot_correlation(1).joint
        assert alpha_epsilon(joint, 0.0, opts=light_opts) == alpha_joint(joint, opts=light_opts)[0]

    def test_non_increasing(self, light_opts):
        values = alpha_epsilon_path(ot_correlation(1).joint, [0.0, 0.01, 0.05, 0.1], opts=light_opts)
        assert all(later <= earlier for earlier, later in zip(values, values[1:]))
        assert values[0] == pytest.approx(1.0, abs=1e-6)

    def test_vacuous_constraint(self, light_opts):
        # I(Q;V|U) <= H(V|U) = 1, so Q = V is feasible and scores 0
        assert alpha_epsilon(ot_correlation(1).joint, 1.0, opts=light_opts) == 0.0

    def test_negative_eps(self, independent_joint):
        with pytest.raises(DistributionError):
            alpha_epsilon(independent_joint, -0.1)


class TestTensionSlice:

    def test_independent_contains_origin(self, independent_joint, light_opts):
        points = tension_slice(independent_joint, 5, opts=light_opts)
        assert len(points) == 5
        assert all(p.point.s2 == 0.0 and p.point.s3 == 0.0 for p in points)

    def test_copy_contains_origin(self, copy_joint, light_opts):
        points = tension_slice(copy_joint, 3, opts=light_opts)
        assert any(p.point.s2 <= 1e-12 and p.point.s3 <= 1e-12 for p in points)

    def test_frontier_is_convex_and_non_increasing(self, z_half_joint, light_opts):
        points = tension_slice(z_half_joint, 11, opts=light_opts)
        xs = [p.point.s2 for p in points]
        ys = [p.point.s3 for p in points]
        assert xs == sorted(xs)
        assert all(b <= a + 1e-12 for a, b in zip(ys, ys[1:]))

        distinct = []
        for x, y in zip(xs, ys):
            if not distinct or x > distinct[-1][0] + 1e-9:
                distinct.append((x, y))
        for (x0, y0), (x1, y1), (x2, y2) in zip(distinct, distinct[1:], distinct[2:]):
            left = (y1 - y0) / (x1 - x0)
            right = (y2 - y1) / (x2 - x1)
            assert left <= right + 1e-6

    def test_full_weight_endpoint(self, z_half_joint, light_opts):
        points = tension_slice(z_half_joint, 5, opts=light_opts)
        endpoint = next(p for p in points if p.weight == 1.0)
        # min over Q of I(X;Q|Y) is 0, reached by a constant Q
        assert endpoint.point.s2 <= 1e-3
        assert endpoint.point.s2 == min(p.point.s2 for p in points)

    def test_too_few_points(self, independent_joint):
        with pytest.raises(DistributionError):
            tension_slice(independent_joint, 1)
