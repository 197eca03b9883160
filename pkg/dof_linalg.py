"""Linear systems over exact rationals (integer elimination) and complex floats (numpy)."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Any

import numpy as np

from dof_regions import DofLabError, format_rational

DEFAULT_RANK_TOLERANCE = 1e-9
FLOAT_MATCH_TOLERANCE = 1e-6

Scalar = int | Fraction | complex
Matrix = tuple[tuple[Scalar, ...], ...]


class RankDeficient(DofLabError):
    """Raised when a linear system has fewer independent equations than unknowns."""

    def __init__(self, system: str, rank: int, expected: int, detail: str = "") -> None:
        self.system = system
        self.rank = rank
        self.expected = expected
        message = f"{system}: rank {rank} < {expected} unknowns (gap {expected - rank})"
        super().__init__(f"{message}; {detail}" if detail else message)

    @property
    def gap(self) -> int:
        return self.expected - self.rank


class ReconstructionRankFailure(RankDeficient):
    """Raised when Tx1 cannot recover Tx2's past symbols from its feedback."""


class InconsistentSystem(DofLabError):
    """Raised when an exact system has no solution (observations contradict the model)."""


@dataclass(frozen=True)
class LinearSystem:
    """Coefficient matrix, observation vector and the unknown ids of each column."""

    label: str
    matrix: Matrix
    observations: tuple[Scalar, ...]
    unknowns: tuple[str, ...]

    @property
    def equations(self) -> int:
        return len(self.matrix)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.equations, len(self.unknowns))

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "equations": self.equations,
            "unknowns": list(self.unknowns),
            "matrix": [[encode_scalar(v) for v in row] for row in self.matrix],
            "observations": [encode_scalar(v) for v in self.observations],
        }


@dataclass(frozen=True)
class Solution:
    values: dict[str, Scalar]
    rank: int


def encode_scalar(value: Scalar) -> str | list[float]:
    if isinstance(value, complex):
        return [value.real, value.imag]
    return format_rational(value)


def is_exact(value: Any) -> bool:
    return isinstance(value, int | Fraction)


def values_match(a: Scalar, b: Scalar, *, exact: bool) -> bool:
    if exact:
        return a == b
    return abs(complex(a) - complex(b)) <= FLOAT_MATCH_TOLERANCE * max(1.0, abs(complex(b)))


def _integer_rows(matrix: Sequence[Sequence[Scalar]], rhs: Sequence[Scalar]) -> list[list[int]]:
    rows = []
    for row, b in zip(matrix, rhs, strict=True):
        entries = [Fraction(v) for v in (*row, b)]
        scale = lcm(*(v.denominator for v in entries))
        rows.append([v.numerator * (scale // v.denominator) for v in entries])
    return rows


def _echelon(rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Fraction-free (Bareiss) row echelon form over the first ``ncols`` columns."""

    m = [list(row) for row in rows]
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][c]
        top = m[r]
        for i in range(r + 1, len(m)):
            row = m[i]
            f = row[c]
            m[i] = [(p * row[j] - f * top[j]) // prev for j in range(len(row))]
        prev = p
        pivots.append(c)
        r += 1
    return m, pivots


def exact_rank(matrix: Sequence[Sequence[Scalar]]) -> int:
    if not matrix:
        return 0
    ncols = len(matrix[0])
    _, pivots = _echelon(_integer_rows(matrix, [0] * len(matrix)), ncols)
    return len(pivots)


def solve_exact(
    matrix: Sequence[Sequence[Scalar]], rhs: Sequence[Scalar], *, label: str, ncols: int
) -> tuple[list[Fraction], int]:
    """Unique solution of a consistent, full-column-rank exact system, and its pivot count."""

    if not matrix:
        if ncols:
            raise RankDeficient(label, 0, ncols)
        return [], 0
    m, pivots = _echelon(_integer_rows(matrix, rhs), ncols)
    rank = len(pivots)
    if rank < ncols:
        raise RankDeficient(label, rank, ncols)
    if any(row[ncols] != 0 for row in m[rank:]):
        raise InconsistentSystem(f"{label}: observations are inconsistent with the model.")

    solution = [Fraction(0)] * ncols
    for i in range(ncols - 1, -1, -1):
        row = m[i]
        acc = Fraction(row[ncols]) - sum(
            (row[j] * solution[j] for j in range(i + 1, ncols)), Fraction(0)
        )
        solution[i] = acc / row[i]
    return solution, rank


def float_rank(matrix: Sequence[Sequence[Scalar]], tolerance: float) -> int:
    a = np.asarray(matrix, dtype=complex)
    if a.size == 0:
        return 0
    singular = np.linalg.svd(a, compute_uv=False)
    if singular[0] == 0:
        return 0
    return int(np.sum(singular > tolerance * singular[0]))


def solve_float(
    matrix: Sequence[Sequence[Scalar]],
    rhs: Sequence[Scalar],
    *,
    label: str,
    ncols: int,
    tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> tuple[list[complex], int]:
    """Least-squares solution after an SVD rank check with relative ``tolerance``, and the rank."""

    if not matrix:
        if ncols:
            raise RankDeficient(label, 0, ncols)
        return [], 0
    rank = float_rank(matrix, tolerance)
    if rank < ncols:
        raise RankDeficient(label, rank, ncols)
    a = np.asarray(matrix, dtype=complex)
    b = np.asarray(rhs, dtype=complex)
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return [complex(v) for v in x], rank


def solve_system(
    system: LinearSystem, *, exact: bool, tolerance: float = DEFAULT_RANK_TOLERANCE
) -> Solution:
    ncols = len(system.unknowns)
    values: list[Scalar]
    if exact:
        values, rank = solve_exact(
            system.matrix, system.observations, label=system.label, ncols=ncols
        )
    else:
        values, rank = solve_float(
            system.matrix,
            system.observations,
            label=system.label,
            ncols=ncols,
            tolerance=tolerance,
        )
    return Solution(values=dict(zip(system.unknowns, values, strict=True)), rank=rank)


def matvec(matrix: Sequence[Sequence[Scalar]], vector: Sequence[Scalar]) -> tuple[Scalar, ...]:
    return tuple(sum((h * x for h, x in zip(row, vector, strict=True)), 0) for row in matrix)


def dot(row: Sequence[Scalar], vector: Sequence[Scalar]) -> Scalar:
    return sum((h * x for h, x in zip(row, vector, strict=True)), 0)
