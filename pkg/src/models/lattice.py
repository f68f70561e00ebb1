"""Combinatorial geometry of the level-l Sierpinski gasket SG_l."""

from dataclasses import dataclass
from typing import List, Tuple


@dataclass(frozen=True, order=True)
class BarycentricPoint:
    """A lattice point of the base triangle in units of 1/l.

    The point is ``p1 + (a/l)(p2 - p1) + (b/l)(p3 - p1)``. Identity is exact
    integer equality of ``(a, b)``.
    """

    a: int
    b: int

    def is_valid(self, level: int) -> bool:
        return self.a >= 0 and self.b >= 0 and self.a + self.b <= level


@dataclass(frozen=True)
class SelfSimilarStructure:
    """SG_l as a finite incidence structure.

    Cells are indexed by symbol (0-based internally, 1-based in words): symbols
    0, 1, 2 are the corner cells whose maps fix p1, p2, p3.
    """

    level: int
    cells: Tuple[BarycentricPoint, ...]  # cell anchors in symbol order
    v1_points: Tuple[BarycentricPoint, ...]
    v0: Tuple[int, int, int]  # indices of p1, p2, p3 in v1_points
    corner_map: Tuple[Tuple[int, int, int], ...]  # symbol -> V1 indices of psi_i(p1..p3)
    symbol_order: Tuple[int, ...]  # permutation of the (b, a)-sorted anchor list

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    @property
    def num_points(self) -> int:
        return len(self.v1_points)

    @property
    def interior_indices(self) -> List[int]:
        """Indices of V1 points not in V0, in V1 order."""
        boundary = set(self.v0)
        return [i for i in range(self.num_points) if i not in boundary]

    def cell_memberships(self) -> List[List[int]]:
        """For each V1 point, the symbols of the cells containing it."""
        members: List[List[int]] = [[] for _ in self.v1_points]
        for symbol, corners in enumerate(self.corner_map):
            for index in corners:
                members[index].append(symbol)
        return members
