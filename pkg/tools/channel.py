"""
Discrete memoryless channel models and the channel file format
"""
from typing import Sequence, Union

import numpy as np
from pydantic import ValidationError

from core.exceptions import DistributionError, ParseError
from core.logging import app_logger
from core.models import SIMPLEX_TOL, Channel, ChannelDiagnostics, ChannelKind
from tools.matrix_io import read_matrix, write_matrix

# Output index of the erasure symbol in bec(t)
ERASURE_SYMBOL = 1


def standard_channel(kind: Union[ChannelKind, str], param: float) -> Channel:
    """Z-channel, binary erasure channel or binary symmetric channel"""
    kind = ChannelKind(kind)
    if not 0.0 <= param <= 1.0:
        raise DistributionError(f"{kind.value} parameter must lie in [0, 1], got {param}")

    if kind == ChannelKind.ZCHANNEL:
        matrix = [[1.0, 0.0], [param, 1.0 - param]]
    elif kind == ChannelKind.BEC:
        matrix = [[1.0 - param, param, 0.0], [0.0, param, 1.0 - param]]
    else:
        matrix = [[1.0 - param, param], [param, 1.0 - param]]
    return Channel(matrix=matrix)


def parse_channel(text: Union[str, bytes]) -> Channel:
    """Parse '<|X|> <|Y|>' followed by one probability row per input symbol"""
    grid = read_matrix(text, stochastic_rows=True)
    try:
        return Channel(matrix=grid)
    except ValidationError as e:
        raise ParseError(str(e))


def serialize_channel(ch: Channel) -> str:
    return write_matrix(ch.matrix, stochastic_rows=True)


def validate_channel(ch: Channel) -> ChannelDiagnostics:
    """Row sums, unreachable outputs, and the noiseless / useless flags"""
    matrix = ch.matrix
    row_sums = matrix.sum(axis=1)
    errors = [
        f"row {x} sums to {total:.12g}"
        for x, total in enumerate(row_sums)
        if abs(total - 1.0) > SIMPLEX_TOL
    ]
    zero_columns = [int(y) for y in np.flatnonzero(matrix.sum(axis=0) == 0)]

    deterministic = bool(np.all(np.isclose(matrix.max(axis=1), 1.0, rtol=0, atol=SIMPLEX_TOL)))
    injective = len(set(np.argmax(matrix, axis=1).tolist())) == ch.input_card
    useless = bool(np.all(np.abs(matrix - matrix[0]) <= SIMPLEX_TOL))

    diagnostics = ChannelDiagnostics(
        row_sums=row_sums.tolist(),
        zero_columns=zero_columns,
        noiseless=deterministic and injective,
        useless=useless,
        errors=errors,
    )
    if errors:
        app_logger.warning(f"Channel validation found {len(errors)} problem(s)")
    return diagnostics


def product_channel(first: Channel, second: Channel) -> Channel:
    """Two independent uses: input (x1,x2) -> index x1*|X2|+x2, output likewise"""
    return Channel(matrix=np.kron(first.matrix, second.matrix))


def restrict_inputs(ch: Channel, inputs: Sequence[int]) -> Channel:
    """Keep only the listed input symbols, in the given order"""
    if not inputs or any(x < 0 or x >= ch.input_card for x in inputs):
        raise DistributionError(f"inputs {list(inputs)} not a subset of 0..{ch.input_card - 1}")
    return Channel(matrix=ch.matrix[list(inputs)])


def drop_unreachable_outputs(ch: Channel) -> Channel:
    """Remove output symbols no input can produce"""
    reachable = ch.matrix.sum(axis=0) > 0
    return Channel(matrix=ch.matrix[:, reachable])


def permute_outputs(ch: Channel, order: Sequence[int]) -> Channel:
    """Relabel outputs: new column k is old column order[k]"""
    if sorted(order) != list(range(ch.output_card)):
        raise DistributionError(f"{list(order)} is not a permutation of the outputs")
    return Channel(matrix=ch.matrix[:, list(order)])
