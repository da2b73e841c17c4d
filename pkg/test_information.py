"""
Tests for the information measures and the joint-distribution text format
"""
import hypothesis as hp
import numpy as np
import pytest
from hypothesis import strategies as hps
from pydantic import ValidationError

from core.exceptions import DistributionError, ParseError
from core.models import Coupling, InformationTerm, JointDist, JointDist3, ProbVector
from tools.information import (
    batch_information_terms,
    compose_joint,
    conditional_entropy,
    conditional_entropy_3,
    conditional_mutual_information,
    entropy,
    extend_with_coupling,
    information_terms,
    joint_entropy,
    mutual_information,
    parse_joint,
    pushforward,
    serialize_joint,
)
from tools.channel import standard_channel


@hps.composite
def joints(draw, max_side=4):
    rows = draw(hps.integers(1, max_side))
    cols = draw(hps.integers(1, max_side))
    weights = draw(hps.lists(hps.floats(0.0, 1.0), min_size=rows * cols, max_size=rows * cols))
    grid = np.array(weights, dtype=float).reshape(rows, cols) + 1e-3
    return JointDist(matrix=grid / grid.sum())


class TestMeasures:
    """Entropy and mutual information on hand-checkable inputs"""

    def test_entropy_uniform(self):
        assert entropy(ProbVector.uniform(4)) == pytest.approx(2.0, abs=1e-12)

    def test_entropy_point_mass(self):
        assert entropy(ProbVector(probs=[1.0, 0.0, 0.0])) == 0.0

    def test_independent_mutual_information(self, independent_joint):
        assert mutual_information(independent_joint) == pytest.approx(0.0, abs=1e-12)

    def test_copy_mutual_information(self, copy_joint):
        assert mutual_information(copy_joint) == pytest.approx(1.0, abs=1e-12)
        assert conditional_entropy(copy_joint) == pytest.approx(0.0, abs=1e-12)

    def test_bec_conditional_entropy(self):
        joint = compose_joint(ProbVector.uniform(2), standard_channel("bec", 0.3))
        assert conditional_entropy(joint) == pytest.approx(0.3, abs=1e-12)
        assert mutual_information(joint) == pytest.approx(0.7, abs=1e-12)

    @hp.given(joints())
    @hp.settings(max_examples=50, deadline=None)
    def test_mutual_information_symmetric(self, joint):
        assert mutual_information(joint) == mutual_information(joint.transpose())

    @hp.given(joints())
    @hp.settings(max_examples=50, deadline=None)
    def test_chain_rule(self, joint):
        h_uv = joint_entropy(joint, "uv")
        assert h_uv == pytest.approx(joint_entropy(joint, "v") + conditional_entropy(joint), abs=1e-12)
        assert mutual_information(joint) >= 0.0

    @hp.given(hps.integers(0, 2**32 - 1), hps.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]))
    @hp.settings(max_examples=50, deadline=None)
    def test_entropy_concave(self, seed, lam):
        rng = np.random.default_rng(seed)
        p, r = rng.dirichlet(np.ones(5), size=2)
        mixed = entropy(ProbVector(probs=lam * p + (1 - lam) * r))
        assert mixed >= lam * entropy(ProbVector(probs=p)) + (1 - lam) * entropy(ProbVector(probs=r)) - 1e-12

    def test_unknown_variable(self, independent_joint):
        with pytest.raises(DistributionError):
            joint_entropy(independent_joint, "q")


class TestThreeVariables:
    """Conditional terms of p(u,v,q)"""

    def test_markov_extension_has_no_key_term(self, rng):
        joint = JointDist(matrix=rng.dirichlet(np.ones(6)).reshape(2, 3))
        coupling = Coupling(matrix=rng.dirichlet(np.ones(3), size=2))
        j3 = extend_with_coupling(joint, coupling)
        assert j3.markov_q_u_v
        assert conditional_mutual_information(j3, InformationTerm.VQ_GIVEN_U) == pytest.approx(0.0, abs=1e-12)

    def test_constant_q_terms(self, z_half_joint):
        j3 = extend_with_coupling(z_half_joint, Coupling.constant(2, 3))
        s1, s2, s3 = information_terms(j3.tensor)
        assert s2 == pytest.approx(0.0, abs=1e-12)
        assert s3 == pytest.approx(mutual_information(z_half_joint), abs=1e-12)

    def test_conditional_entropy_3(self, copy_joint):
        j3 = extend_with_coupling(copy_joint, Coupling.copy_of_source(2))
        assert conditional_entropy_3(j3, "u", "q") == pytest.approx(0.0, abs=1e-12)
        assert conditional_entropy_3(j3, "q") == pytest.approx(1.0, abs=1e-12)

    def test_markov_violation_rejected(self):
        tensor = np.zeros((1, 2, 2))
        tensor[0, 0, 0] = 0.5
        tensor[0, 1, 1] = 0.5
        with pytest.raises(ValidationError):
            JointDist3(tensor=tensor, markov_q_u_v=True)

    def test_batch_matches_single(self, rng):
        joint = rng.dirichlet(np.ones(6)).reshape(2, 3)
        couplings = rng.dirichlet(np.ones(4), size=(5, 2))
        tensors = joint[None, :, :, None] * couplings[:, :, None, :]
        batch = np.stack(batch_information_terms(tensors), axis=1)
        for row, tensor in zip(batch, tensors):
            np.testing.assert_allclose(row, information_terms(tensor), atol=1e-12)


class TestBuilders:

    def test_compose_mismatch(self):
        with pytest.raises(DistributionError):
            compose_joint(ProbVector.uniform(3), standard_channel("zchannel", 0.2))

    def test_coupling_mismatch(self, independent_joint):
        with pytest.raises(DistributionError):
            extend_with_coupling(independent_joint, Coupling.constant(3, 2))

    def test_pushforward(self):
        image = pushforward(ProbVector(probs=[0.2, 0.3, 0.5]), [1, 0, 1], 2)
        np.testing.assert_allclose(image.probs, [0.3, 0.7])

    def test_invalid_distributions(self):
        with pytest.raises(ValidationError):
            ProbVector(probs=[0.5, 0.6])
        with pytest.raises(ValidationError):
            JointDist(matrix=[[0.5, -0.1], [0.3, 0.3]])
        with pytest.raises(ValidationError):
            ProbVector(probs=[np.nan, 1.0])


class TestJointFormat:
    """Text codec of joint distribution files"""

    def test_parse_with_comments(self):
        text = "# OT correlation\n\n2 2\n0.25 0.25\n# middle\n0.25 0.25\n"
        joint = parse_joint(text)
        np.testing.assert_allclose(joint.matrix, np.full((2, 2), 0.25))

    def test_total_sum_error(self):
        with pytest.raises(ParseError) as info:
            parse_joint("2 2\n0.25 0.25\n0.25 0.2\n")
        assert info.value.line_number == 1

    def test_bad_token_reports_line(self):
        with pytest.raises(ParseError) as info:
            parse_joint("2 2\n0.25 0.25\n0.25 abc\n")
        assert info.value.line_number == 3
        assert "line 3" in str(info.value)

    def test_missing_rows(self):
        with pytest.raises(ParseError):
            parse_joint("3 2\n0.5 0.5\n")

    def test_canonical_text_is_stable(self, rng):
        joint = JointDist(matrix=rng.dirichlet(np.ones(6)).reshape(3, 2))
        text = serialize_joint(joint)
        assert serialize_joint(parse_joint(text)) == text
        np.testing.assert_allclose(parse_joint(text).matrix, joint.matrix, atol=1e-11)

    def test_rounding_overshoot_still_parses(self):
        joint = JointDist(matrix=[[0.4000000000005001, 0.3000000000005001], [0.2999999999985001, 4.996e-13]])
        reparsed = parse_joint(serialize_joint(joint))
        np.testing.assert_allclose(reparsed.matrix, joint.matrix, atol=1e-15)
        parse_joint(serialize_joint(reparsed))

    def test_total_sum_error_shows_deviation(self):
        with pytest.raises(ParseError) as info:
            parse_joint("1 2\n0.5 0.500000000002\n")
        assert "entries sum to 1," not in str(info.value)
