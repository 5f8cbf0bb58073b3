"""
Filtered simplicial complexes in radius units.

A simplex is a sorted tuple of point indices; its value is the smallest radius
at which it enters. Filtrations are kept in canonical (value, dim, vertices)
order, which is what the reduction relies on for deterministic pairing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, TextIO, Tuple, Union

from app.errors import InputError

logger = logging.getLogger(__name__)

Simplex = Tuple[int, ...]

MONOTONE_TOL = 1e-12
SNAP_RTOL = 1e-12


def canonical_simplex(vertices: Iterable[int]) -> Simplex:
    simplex = tuple(sorted(int(v) for v in vertices))
    if not simplex:
        raise InputError("a simplex needs at least one vertex")
    if len(set(simplex)) != len(simplex) or simplex[0] < 0:
        raise InputError(f"invalid simplex vertices {simplex}")
    return simplex


def facets(simplex: Simplex) -> List[Simplex]:
    if len(simplex) == 1:
        return []
    return [simplex[:k] + simplex[k + 1 :] for k in range(len(simplex))]


@dataclass(frozen=True, eq=False)
class Filtration:
    """Simplices with entry values; `simplices[k]` enters at `values[k]`."""

    simplices: Tuple[Simplex, ...]
    values: Tuple[float, ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Sequence[int], float]]) -> "Filtration":
        """Canonicalize and sort. Duplicate simplices keep their smallest value."""
        best: Dict[Simplex, float] = {}
        for vertices, value in pairs:
            simplex = canonical_simplex(vertices)
            value = float(value)
            if not value >= 0:
                raise InputError(f"simplex {simplex} has invalid value {value}")
            if simplex not in best or value < best[simplex]:
                best[simplex] = value
        ordered = sorted(best.items(), key=lambda kv: (kv[1], len(kv[0]), kv[0]))
        return cls(tuple(s for s, _ in ordered), tuple(v for _, v in ordered))

    def __len__(self) -> int:
        return len(self.simplices)

    def __iter__(self):
        return iter(zip(self.simplices, self.values))

    @property
    def max_dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    @property
    def n_vertices(self) -> int:
        return sum(1 for s in self.simplices if len(s) == 1)

    def value_map(self) -> Dict[Simplex, float]:
        return dict(zip(self.simplices, self.values))

    def count_by_dim(self) -> List[int]:
        counts = [0] * (self.max_dim + 1)
        for s in self.simplices:
            counts[len(s) - 1] += 1
        return counts

    def check_monotone(self) -> None:
        """Every face is present and enters no later than its cofaces; raises InputError otherwise."""
        values = self.value_map()
        for simplex, value in self:
            for face in facets(simplex):
                face_value = values.get(face)
                if face_value is None:
                    raise InputError(f"face {face} of {simplex} is missing from the filtration")
                if face_value > value + MONOTONE_TOL:
                    raise InputError(
                        f"face monotonicity violated: {face} at {face_value!r} > {simplex} at {value!r}"
                    )

    def scaled(self, factor: float) -> "Filtration":
        if not factor > 0:
            raise InputError("scale factor must be positive")
        return Filtration(self.simplices, tuple(v * factor for v in self.values))

    def write(self, target: Union[str, Path, TextIO]) -> None:
        """One line per simplex: `value dim v0 v1 ...`."""
        if isinstance(target, (str, Path)):
            with open(target, "w") as fh:
                self.write(fh)
            return
        for simplex, value in self:
            target.write(" ".join([repr(value), str(len(simplex) - 1), *map(str, simplex)]) + "\n")

    @classmethod
    def read(cls, source: Union[str, Path, TextIO]) -> "Filtration":
        if isinstance(source, (str, Path)):
            with open(source) as fh:
                return cls.read(fh)
        pairs = []
        for lineno, line in enumerate(source, start=1):
            fields = line.split()
            if not fields:
                continue
            try:
                value, dim, vertices = float(fields[0]), int(fields[1]), [int(v) for v in fields[2:]]
            except (ValueError, IndexError):
                raise InputError(f"line {lineno}: expected `value dim v0 v1 ...`, got {line.strip()!r}")
            if len(vertices) != dim + 1:
                raise InputError(f"line {lineno}: dim {dim} but {len(vertices)} vertices")
            pairs.append((vertices, value))
        return cls.from_pairs(pairs)


def vertex_entries(n: int) -> List[Tuple[Simplex, float]]:
    return [((i,), 0.0) for i in range(n)]


def subsets_up_to(n: int, max_dim: int) -> Iterable[Simplex]:
    for size in range(1, min(n, max_dim + 1) + 1):
        yield from combinations(range(n), size)


def entry_value(raw: float, face_max: float) -> float:
    """max(raw, face_max), snapping raw onto face_max when they agree to SNAP_RTOL.

    Keeps simplices that enter together with a face at exactly the same value, so
    the pair they form has zero length and is dropped.
    """
    if raw <= face_max * (1.0 + SNAP_RTOL):
        return face_max
    return raw
