"""
Exact finite-alphabet information measures, in bits

Array-level helpers (prefixed with an underscore or taking raw numpy arrays)
serve the optimizers; the public functions take validated models.
"""
from typing import Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from core.exceptions import DistributionError, ParseError
from core.models import (
    Channel,
    Coupling,
    InformationTerm,
    JointDist,
    JointDist3,
    ProbVector,
)
from tools.matrix_io import read_matrix, write_matrix

_AXES = "uvq"


def entropy_bits(masses: np.ndarray) -> float:
    """-sum p log2 p over the nonzero masses (summed in sorted order, so relabeling is exact)"""
    flat = np.ravel(masses)
    p = np.sort(flat[flat > 0])
    if p.size == 0:
        return 0.0
    return float(max(0.0, -np.sum(p * np.log2(p))))


def marginal(array: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Sum out every axis not in keep, with one fixed reduction layout"""
    keep = tuple(keep)
    drop = tuple(axis for axis in range(array.ndim) if axis not in keep)
    moved = np.ascontiguousarray(np.transpose(array, keep + drop))
    kept_shape = moved.shape[: len(keep)]
    return moved.reshape(int(np.prod(kept_shape, dtype=int)), -1).sum(axis=1).reshape(kept_shape)


def _h(array: np.ndarray, variables: str, names: str) -> float:
    keep = [names.index(name) for name in variables]
    if len(keep) == array.ndim:
        return entropy_bits(array)
    return entropy_bits(marginal(array, keep))


def information_terms(tensor: np.ndarray) -> Tuple[float, float, float]:
    """(I(V;Q|U), I(U;Q|V), I(U;V|Q)) of a raw p(u,v,q) grid"""
    h_u, h_v, h_q = (_h(tensor, name, _AXES) for name in "uvq")
    h_uv, h_uq, h_vq = (_h(tensor, pair, _AXES) for pair in ("uv", "uq", "vq"))
    h_uvq = entropy_bits(tensor)
    s1 = h_uv + h_uq - h_uvq - h_u
    s2 = h_uv + h_vq - h_uvq - h_v
    s3 = h_uq + h_vq - h_uvq - h_q
    return max(0.0, s1), max(0.0, s2), max(0.0, s3)


def _batch_entropy(array: np.ndarray, summed_axes: Tuple[int, ...]) -> np.ndarray:
    reduced = array.sum(axis=summed_axes) if summed_axes else array
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(reduced > 0, reduced * np.log2(reduced), 0.0)
    return -terms.reshape(len(array), -1).sum(axis=1)


def batch_information_terms(tensors: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """information_terms over a leading batch axis of p(u,v,q) grids"""
    h_u = _batch_entropy(tensors, (2, 3))
    h_v = _batch_entropy(tensors, (1, 3))
    h_q = _batch_entropy(tensors, (1, 2))
    h_uv = _batch_entropy(tensors, (3,))
    h_uq = _batch_entropy(tensors, (2,))
    h_vq = _batch_entropy(tensors, (1,))
    h_uvq = _batch_entropy(tensors, ())
    s1 = h_uv + h_uq - h_uvq - h_u
    s2 = h_uv + h_vq - h_uvq - h_v
    s3 = h_uq + h_vq - h_uvq - h_q
    return np.maximum(s1, 0.0), np.maximum(s2, 0.0), np.maximum(s3, 0.0)


# Public measures


def entropy(p: ProbVector) -> float:
    """H(p) in bits"""
    return entropy_bits(p.probs)


def joint_entropy(j: Union[JointDist, JointDist3], variables: str = "uv") -> float:
    """Entropy of the marginal on the named variables ('u', 'v', 'q')"""
    array = j.matrix if isinstance(j, JointDist) else j.tensor
    names = _AXES[: array.ndim]
    if not variables or any(name not in names for name in variables):
        raise DistributionError(f"variables {variables!r} not in {names!r}")
    return _h(array, variables, names)


def conditional_entropy(j: JointDist) -> float:
    """H(U|V): row variable given column variable"""
    return max(0.0, entropy_bits(j.matrix) - _h(j.matrix, "v", "uv"))


def mutual_information(j: JointDist) -> float:
    """I(U;V) = H(U) + H(V) - H(U,V)"""
    h_u = _h(j.matrix, "u", "uv")
    h_v = _h(j.matrix, "v", "uv")
    return max(0.0, h_u + h_v - entropy_bits(j.matrix))


def conditional_entropy_3(j3: JointDist3, target: str, given: str = "") -> float:
    """H(target | given) for variable names drawn from 'uvq'"""
    if not given:
        return joint_entropy(j3, target)
    combined = "".join(name for name in _AXES if name in target or name in given)
    return max(0.0, joint_entropy(j3, combined) - joint_entropy(j3, given))


def conditional_mutual_information(j3: JointDist3, which: InformationTerm) -> float:
    """Selected term of (I(V;Q|U), I(U;Q|V), I(U;V|Q))"""
    s1, s2, s3 = information_terms(j3.tensor)
    return {
        InformationTerm.VQ_GIVEN_U: s1,
        InformationTerm.UQ_GIVEN_V: s2,
        InformationTerm.UV_GIVEN_Q: s3,
    }[InformationTerm(which)]


# Builders


def compose_joint(px: ProbVector, ch: Channel) -> JointDist:
    """p(x,y) = p(x) p(y|x)"""
    if px.size != ch.input_card:
        raise DistributionError(
            f"input distribution has {px.size} symbols, channel has {ch.input_card} inputs"
        )
    return JointDist(matrix=px.probs[:, None] * ch.matrix)


def extend_with_coupling(
    source: Union[JointDist, Tuple[ProbVector, Channel]], coupling: Coupling
) -> JointDist3:
    """p(u,v,q) = p(u,v) p(q|u); Q-U-V holds by construction"""
    joint = compose_joint(*source) if isinstance(source, tuple) else source
    if coupling.source_card != joint.u_card:
        raise DistributionError(
            f"coupling has {coupling.source_card} rows, joint has {joint.u_card} source symbols"
        )
    tensor = joint.matrix[:, :, None] * coupling.matrix[:, None, :]
    return JointDist3(tensor=tensor, markov_q_u_v=True)


def pushforward(p: ProbVector, mapping: Sequence[int], size: int) -> ProbVector:
    """Distribution of f(U) for a deterministic map f given as a lookup table"""
    if len(mapping) != p.size:
        raise DistributionError(f"map covers {len(mapping)} symbols, distribution has {p.size}")
    probs = np.zeros(size)
    np.add.at(probs, np.asarray(mapping, dtype=int), p.probs)
    return ProbVector(probs=probs)


# Text format


def parse_joint(text: Union[str, bytes]) -> JointDist:
    """Parse '<|U|> <|V|>' followed by |U| rows of |V| probabilities"""
    grid = read_matrix(text, stochastic_rows=False)
    try:
        return JointDist(matrix=grid)
    except ValidationError as e:
        raise ParseError(str(e))


def serialize_joint(j: JointDist) -> str:
    return write_matrix(j.matrix, stochastic_rows=False)
