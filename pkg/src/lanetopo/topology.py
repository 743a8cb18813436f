"""Score-matrix machinery for the relationship head.

Provides sinusoidal positional encodings for endpoint coordinates, Sinkhorn
normalization of score matrices toward doubly stochastic form, and thresholded
extraction of scored directed edges. Rows are predecessor candidates, columns
successor candidates; nothing here symmetrizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDim, InvalidMatrix

SINKHORN_EPSILON = 1e-12
SINKHORN_CONVERGENCE_TOL = 1e-9


@dataclass(frozen=True)
class PositionalEncoding:
    """Sinusoidal encoding parameters: even dimension and frequency temperature."""

    dim: int
    temperature: float = 10000.0

    def __post_init__(self):
        if self.dim < 2 or self.dim % 2 != 0:
            raise InvalidDim(f"dim must be even and >= 2, got {self.dim}")
        if self.temperature <= 0.0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")


@dataclass(frozen=True)
class ScoreMatrix:
    """Non-negative n x m score grid with row/column instance identifiers."""

    values: np.ndarray
    row_ids: tuple = field(default=None)
    col_ids: tuple = field(default=None)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2:
            raise InvalidMatrix(f"score matrix must be 2D, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise InvalidMatrix("score matrix contains non-finite entries")
        if arr.size and arr.min() < 0.0:
            raise InvalidMatrix("score matrix contains negative entries")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        row_ids = tuple(self.row_ids) if self.row_ids is not None else tuple(range(arr.shape[0]))
        col_ids = tuple(self.col_ids) if self.col_ids is not None else tuple(range(arr.shape[1]))
        if len(row_ids) != arr.shape[0] or len(col_ids) != arr.shape[1]:
            raise InvalidMatrix("id lists do not match matrix shape")
        object.__setattr__(self, "row_ids", row_ids)
        object.__setattr__(self, "col_ids", col_ids)

    @property
    def shape(self):
        return self.values.shape


def sinusoidal_encode(value: float, pe: PositionalEncoding) -> np.ndarray:
    """Interleaved sin/cos encoding of a scalar.

    Component 2i is sin(value / temperature^(2i/dim)), component 2i+1 the
    matching cosine.
    """
    if pe.dim % 2 != 0:
        raise InvalidDim(f"dim must be even, got {pe.dim}")
    half = np.arange(pe.dim // 2)
    freqs = value / np.power(pe.temperature, 2.0 * half / pe.dim)
    out = np.empty(pe.dim)
    out[0::2] = np.sin(freqs)
    out[1::2] = np.cos(freqs)
    return out


def encode_point(xyz, pe: PositionalEncoding) -> np.ndarray:
    """Concatenated per-coordinate encodings of a 3D point (3 * dim values)."""
    arr = np.asarray(xyz, dtype=float).reshape(-1)
    return np.concatenate([sinusoidal_encode(float(v), pe) for v in arr])


def sinkhorn_normalize(
    m: ScoreMatrix,
    iterations: int = 100,
    epsilon: float = SINKHORN_EPSILON,
) -> ScoreMatrix:
    """Drive a positive matrix toward doubly stochastic form.

    Runs up to `iterations` rounds of row normalization followed by column
    normalization, stopping early once both marginals deviate from 1 by less
    than 1e-9. Epsilon guards all-zero rows/columns before the first division;
    the result is invariant to uniform scaling of the input.
    """
    if not isinstance(m, ScoreMatrix):
        m = ScoreMatrix(np.asarray(m, dtype=float))
    values = m.values
    if values.size == 0:
        return m
    work = values + epsilon
    for _ in range(iterations):
        work = work / work.sum(axis=1, keepdims=True)
        work = work / work.sum(axis=0, keepdims=True)
        # column sums are exactly 1 after the second step; rows decide convergence
        row_dev = np.abs(work.sum(axis=1) - 1.0).max()
        if row_dev < SINKHORN_CONVERGENCE_TOL:
            break
    return ScoreMatrix(np.clip(work, 0.0, None), m.row_ids, m.col_ids)


def adjacency_from_scores(m: ScoreMatrix, threshold: float) -> list[tuple]:
    """Extract (row_id, col_id, score) edges for entries >= threshold.

    Edges come back sorted by descending score; ties resolve in row-major
    matrix order so the output is deterministic.
    """
    values = m.values
    rows, cols = np.nonzero(values >= threshold)
    edges = [
        (m.row_ids[r], m.col_ids[c], float(values[r, c]))
        for r, c in zip(rows.tolist(), cols.tolist())
    ]
    edges.sort(key=lambda e: -e[2])
    return edges
