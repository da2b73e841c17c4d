"""
Probability-simplex utilities: Euclidean projection, random rows, lattices
"""
import itertools
from math import comb
from typing import Iterator

import numpy as np


def project_rows(matrix: np.ndarray) -> np.ndarray:
    """
    Project every row onto the probability simplex.

    Row-wise version of the sort-and-threshold projection:
    min ||x - c||^2 s.t. sum(x) = 1, x >= 0.
    """
    rows, size = matrix.shape
    ordered = -np.sort(-matrix, axis=1)
    shifted = np.cumsum(ordered, axis=1) - 1.0
    index = np.arange(1, size + 1)
    active = ordered - shifted / index > 0
    # last active position per row
    rho = size - 1 - np.argmax(active[:, ::-1], axis=1)
    theta = shifted[np.arange(rows), rho] / (rho + 1)
    projected = np.maximum(matrix - theta[:, None], 0.0)
    return projected / projected.sum(axis=1, keepdims=True)


def dirichlet_rows(rng: np.random.Generator, rows: int, size: int) -> np.ndarray:
    """Rows drawn independently from Dirichlet(1, ..., 1)"""
    return rng.dirichlet(np.ones(size), size=rows)


def lattice_size(size: int, resolution: int) -> int:
    """Number of points of the simplex lattice with denominator resolution"""
    return comb(resolution + size - 1, size - 1)


def lattice_points(size: int, resolution: int) -> np.ndarray:
    """All simplex points with coordinates k/resolution, in lexicographic order"""
    points = []
    for bars in itertools.combinations(range(resolution + size - 1), size - 1):
        edges = (-1,) + bars + (resolution + size - 1,)
        points.append([edges[i + 1] - edges[i] - 1 for i in range(size)])
    return np.array(points, dtype=float) / resolution


def iter_lattice_products(size: int, rows: int, resolution: int, chunk: int = 4096) -> Iterator[np.ndarray]:
    """
    Chunks of row-stochastic matrices whose rows all lie on the lattice,
    enumerated in lexicographic order of the row indices.
    """
    row_points = lattice_points(size, resolution)
    indices = itertools.product(range(len(row_points)), repeat=rows)
    while True:
        block = list(itertools.islice(indices, chunk))
        if not block:
            return
        yield row_points[np.array(block)]
