"""Degree sequences of trees and the prefix-sum (majorization) order on them.

A degree sequence is kept normalized: entries sorted in non-increasing order.
Text input accepts plain lists (``"4,4,3,1"``) and exponent notation
(``"4^2,3^4,2^3,1^10"``); both may be mixed.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from itertools import accumulate, groupby
from typing import Iterable, Iterator, Sequence

import numpy as np

from .exceptions import InvalidSequenceError

__all__ = [
    "DegreeSequence",
    "Majorization",
    "parse_degree_sequence",
    "format_degree_sequence",
    "is_tree_sequence",
    "majorization_compare",
    "enumerate_tree_sequences",
    "star_sequence",
    "spider_sequence",
]

_TOKEN = re.compile(r"^\s*(-?\d+)\s*(?:\^\s*(\d+)\s*)?$")


@dataclass(frozen=True)
class DegreeSequence:
    """Immutable non-increasing sequence of vertex degrees.

    The constructor sorts its input; ``DegreeSequence([1, 3, 1, 1])`` and
    ``DegreeSequence([3, 1, 1, 1])`` compare equal.
    """

    degrees: tuple[int, ...]
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __init__(self, degrees: Iterable[int]):
        if isinstance(degrees, np.ndarray):
            arr = np.sort(np.asarray(degrees, dtype=np.int64))[::-1].copy()
            values = tuple(arr.tolist())
        else:
            values = tuple(sorted((int(d) for d in degrees), reverse=True))
            arr = np.fromiter(values, dtype=np.int64, count=len(values))
        if not values:
            raise InvalidSequenceError("degree sequence is empty")
        if values[-1] < 0:
            raise InvalidSequenceError(f"negative degree {values[-1]}")
        if len(values) >= 2 and values[-1] == 0:
            raise InvalidSequenceError("zero degree in a sequence with n >= 2")
        arr.setflags(write=False)
        object.__setattr__(self, "degrees", values)
        object.__setattr__(self, "_array", arr)

    @classmethod
    def from_sorted_array(cls, arr: np.ndarray) -> "DegreeSequence":
        """Wrap an already non-increasing integer array without re-sorting."""
        arr = np.asarray(arr, dtype=np.int64)
        if arr.size == 0:
            raise InvalidSequenceError("degree sequence is empty")
        if arr.size > 1 and np.any(arr[1:] > arr[:-1]):
            raise InvalidSequenceError("array is not non-increasing")
        if arr[-1] < 0 or (arr.size >= 2 and arr[-1] == 0):
            raise InvalidSequenceError("degrees must be positive")
        obj = cls.__new__(cls)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(obj, "degrees", tuple(arr.tolist()))
        object.__setattr__(obj, "_array", arr)
        return obj

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def array(self) -> np.ndarray:
        """Read-only ``int64`` view of the degrees."""
        return self._array

    @property
    def is_tree_sequence(self) -> bool:
        return is_tree_sequence(self)

    @property
    def leaves(self) -> int:
        """Number of entries equal to one."""
        return int(np.count_nonzero(self._array == 1))

    def __len__(self) -> int:
        return len(self.degrees)

    def __iter__(self) -> Iterator[int]:
        return iter(self.degrees)

    def __getitem__(self, i):
        return self.degrees[i]

    def __str__(self) -> str:
        return format_degree_sequence(self)


def format_degree_sequence(seq: DegreeSequence) -> str:
    """Canonical exponent notation, e.g. ``"4^2,3^4,2^3,1^10"``."""
    parts = []
    for d, grp in groupby(seq.degrees):
        m = sum(1 for _ in grp)
        parts.append(f"{d}^{m}" if m > 1 else str(d))
    return ",".join(parts)


def parse_degree_sequence(text: str) -> DegreeSequence:
    """Parse comma separated degrees, allowing ``d^m`` for ``m`` copies of ``d``.

    >>> parse_degree_sequence("3,1,2,1,1").degrees
    (3, 2, 1, 1, 1)
    >>> str(parse_degree_sequence("1,1,4,4"))
    '4^2,1^2'
    """
    if text is None or not text.strip():
        raise InvalidSequenceError("empty degree sequence")
    values: list[int] = []
    for token in text.split(","):
        m = _TOKEN.match(token)
        if m is None:
            raise InvalidSequenceError(f"malformed token {token.strip()!r}")
        d = int(m.group(1))
        mult = int(m.group(2)) if m.group(2) is not None else 1
        if mult < 1:
            raise InvalidSequenceError(f"multiplicity must be positive in {token.strip()!r}")
        values.extend([d] * mult)
    return DegreeSequence(values)


def is_tree_sequence(seq: DegreeSequence) -> bool:
    """True iff some tree has exactly these vertex degrees.

    For ``n >= 2`` this means every degree is positive and the degrees sum to
    ``2(n-1)``. The single-vertex tree ``(0,)`` is accepted as a degenerate case.
    """
    n = seq.n
    if n == 1:
        return seq.degrees[0] == 0
    return seq.degrees[-1] >= 1 and int(seq.array.sum()) == 2 * (n - 1)


class Majorization(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def _prefix_dominated(a: Sequence[int], b: Sequence[int]) -> bool:
    # prefix sums of a bounded by those of b over the first len(a) positions
    return all(x <= y for x, y in zip(accumulate(a), accumulate(b[: len(a)])))


def majorization_compare(a: DegreeSequence, b: DegreeSequence) -> Majorization:
    """Compare two normalized sequences under the prefix-sum order.

    ``LESS`` means ``len(a) <= len(b)``, ``a != b`` and every prefix sum of
    ``a`` (up to its own length) is at most the matching prefix sum of ``b``.
    Pairs satisfying neither direction are ``INCOMPARABLE``.
    """
    if a.degrees == b.degrees:
        return Majorization.EQUAL
    if a.n <= b.n and _prefix_dominated(a.degrees, b.degrees):
        return Majorization.LESS
    if b.n <= a.n and _prefix_dominated(b.degrees, a.degrees):
        return Majorization.GREATER
    return Majorization.INCOMPARABLE


def _partitions(total: int, max_part: int) -> Iterator[list[int]]:
    # integer partitions of total with parts <= max_part, lexicographically decreasing
    if total == 0:
        yield []
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in _partitions(total - first, first):
            yield [first] + rest


def enumerate_tree_sequences(n: int, leaves: int | None = None) -> list[DegreeSequence]:
    """All tree sequences of length ``n`` in lexicographically decreasing order.

    Subtracting one from each degree maps tree sequences of length ``n``
    bijectively onto integer partitions of ``n - 2`` (padded with zeros), so
    the sequences are generated from those partitions. ``leaves`` restricts the
    result to sequences with exactly that many entries equal to one.
    """
    if n < 2:
        raise InvalidSequenceError(f"need n >= 2, got {n}")
    out = []
    for part in _partitions(n - 2, n - 2):
        degs = [p + 1 for p in part] + [1] * (n - len(part))
        if leaves is not None and n - len(part) != leaves:
            continue
        out.append(DegreeSequence(degs))
    return out


def star_sequence(n: int) -> DegreeSequence:
    """``(n-1, 1, ..., 1)``, the degree sequence of the star on ``n`` vertices."""
    if n < 2:
        raise InvalidSequenceError(f"need n >= 2, got {n}")
    return DegreeSequence([n - 1] + [1] * (n - 1))


def spider_sequence(n: int, k: int) -> DegreeSequence:
    """``(k, 2, ..., 2, 1, ..., 1)`` with ``k`` ones: the maximal sequence with ``k`` leaves."""
    if n < 3 or not 2 <= k <= n - 1:
        raise InvalidSequenceError(f"invalid (n, k) = ({n}, {k})")
    return DegreeSequence([k] + [2] * (n - k - 1) + [1] * k)
