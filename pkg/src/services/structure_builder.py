"""Service to build SG_l and its regular harmonic structure.

The exact backend does everything in rationals: the level-1 network is
assembled from one copy of D per cell, interior points are eliminated by
fraction-free Gaussian elimination, and r is read off the Schur complement
G' = r D, which is checked entrywise. The float backend runs the same
pipeline with numpy for levels beyond the exact cap.
"""

import itertools
import logging
from fractions import Fraction
from math import lcm
from typing import Any, Dict, List, Sequence, Tuple

import networkx as nx
import numpy as np

from ..models.errors import DomainError, PreconditionError, StructureError
from ..models.harmonic_structure import A2Report, HarmonicStructure
from ..models.lattice import BarycentricPoint, SelfSimilarStructure
from ..utils import rational_linalg as rl
from ..utils.output import format_scalar

logger = logging.getLogger(__name__)

# Boundary Laplacian of every SG_l; satisfies D^2 = -3 D.
STANDARD_D = ((-2, 1, 1), (1, -2, 1), (1, 1, -2))

FLOAT_ZERO_DET = 1e-14


def validate_laplacian(d: Sequence[Sequence]) -> rl.Matrix:
    """Check that D is a valid boundary Laplacian and return it as a Fraction matrix.

    Raises:
        PreconditionError: if D is not symmetric, has a negative off-diagonal
            entry, does not annihilate constants, has a kernel larger than the
            constants, or is not non-positive definite.
    """
    m = rl.to_matrix(d)
    n = len(m)
    if any(len(row) != n for row in m):
        raise PreconditionError("D must be square")
    for i in range(n):
        for j in range(n):
            if m[i][j] != m[j][i]:
                raise PreconditionError("D must be symmetric")
            if i != j and m[i][j] < 0:
                raise PreconditionError("D must have nonnegative off-diagonal entries")
        if sum(m[i], Fraction(0)) != 0:
            raise PreconditionError("D must annihilate constants")
    if rl.rank(m) != n - 1:
        raise PreconditionError("the kernel of D must be exactly the constants")
    negated = rl.scale(m, Fraction(-1))
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            minor = tuple(tuple(negated[i][j] for j in subset) for i in subset)
            if rl.determinant(minor) < 0:
                raise PreconditionError("D must be non-positive definite")
    return m


class StructureBuilder:
    """Builds self-similar structures and harmonic structures for SG_l."""

    def __init__(self, exact_cap: int = 20, certify_cap: int = 50):
        """Initialize the builder.

        Args:
            exact_cap: Largest level built with the exact backend
            certify_cap: Largest level whose extension-matrix determinants are certified
                in exact arithmetic
        """
        self.exact_cap = exact_cap
        self.certify_cap = certify_cap

    # ------------------------------------------------------------------
    # Combinatorial structure
    # ------------------------------------------------------------------

    def build_structure(self, level: int) -> SelfSimilarStructure:
        """Build SG_l as cells, V1 points and incidence.

        Args:
            level: l >= 2

        Returns:
            SelfSimilarStructure with corner cells first (symbols 1, 2, 3)
            and the remaining cells ordered by (b, a)

        Raises:
            DomainError: if level < 2
        """
        if level < 2:
            raise DomainError(f"SG_l needs l >= 2, got {level}")

        points = [
            BarycentricPoint(a, b) for b in range(level + 1) for a in range(level + 1 - b)
        ]
        index = {p: i for i, p in enumerate(points)}
        anchors = [
            BarycentricPoint(a, b) for b in range(level) for a in range(level - b)
        ]
        corners = [
            BarycentricPoint(0, 0),
            BarycentricPoint(level - 1, 0),
            BarycentricPoint(0, level - 1),
        ]
        ordered = corners + [c for c in anchors if c not in corners]
        symbol_order = tuple(anchors.index(c) for c in ordered)
        corner_map = tuple(
            (
                index[BarycentricPoint(c.a, c.b)],
                index[BarycentricPoint(c.a + 1, c.b)],
                index[BarycentricPoint(c.a, c.b + 1)],
            )
            for c in ordered
        )
        v0 = (
            index[BarycentricPoint(0, 0)],
            index[BarycentricPoint(level, 0)],
            index[BarycentricPoint(0, level)],
        )
        structure = SelfSimilarStructure(
            level=level,
            cells=tuple(ordered),
            v1_points=tuple(points),
            v0=v0,
            corner_map=corner_map,
            symbol_order=symbol_order,
        )
        self._check_connected(structure)
        return structure

    def cell_graph(self, structure: SelfSimilarStructure) -> nx.Graph:
        """Cells as nodes, an edge whenever two cells share a V1 point."""
        graph = nx.Graph()
        graph.add_nodes_from(range(structure.num_cells))
        for members in structure.cell_memberships():
            graph.add_edges_from(itertools.combinations(members, 2))
        return graph

    def _check_connected(self, structure: SelfSimilarStructure) -> None:
        if not nx.is_connected(self.cell_graph(structure)):
            raise StructureError(f"cell graph of SG_{structure.level} is not connected")
        members = structure.cell_memberships()
        boundary = set(structure.v0)
        for i, cells in enumerate(members):
            if i not in boundary and len(cells) < 2:
                raise StructureError(
                    f"point {structure.v1_points[i]} lies in a single cell"
                )

    # ------------------------------------------------------------------
    # Exact pipeline
    # ------------------------------------------------------------------

    def level_one_laplacian(
        self, structure: SelfSimilarStructure, d: Sequence[Sequence]
    ) -> rl.Matrix:
        """Assemble G on V1 with one copy of D per cell (unit weights).

        Raises:
            PreconditionError: if D is not a valid boundary Laplacian
        """
        m = validate_laplacian(d)
        n = structure.num_points
        g = [[Fraction(0)] * n for _ in range(n)]
        for corners in structure.corner_map:
            for a, p in enumerate(corners):
                for b, q in enumerate(corners):
                    g[p][q] += m[a][b]
        return tuple(tuple(row) for row in g)

    def _exact_extension(
        self, structure: SelfSimilarStructure, d: rl.Matrix
    ) -> Tuple[List[List[Fraction]], rl.Matrix]:
        """Harmonic extensions of the boundary basis and the Schur complement.

        Returns:
            (ext, schur) where ext[p][k] is the value at V1 point p of the
            harmonic extension of e_k, and schur is G' on V0.
        """
        denominators = [x.denominator for row in d for x in row]
        scale = lcm(*denominators)
        d_int = [[int(x * scale) for x in row] for row in d]

        n = structure.num_points
        rows: List[Dict[int, int]] = [dict() for _ in range(n)]
        for corners in structure.corner_map:
            for a, p in enumerate(corners):
                row = rows[p]
                for b, q in enumerate(corners):
                    row[q] = row.get(q, 0) + d_int[a][b]

        interior = structure.interior_indices
        position = {p: i for i, p in enumerate(interior)}
        coefficients = [
            {position[q]: v for q, v in rows[p].items() if q in position and v != 0}
            for p in interior
        ]
        right_hand_sides = [
            [-rows[p].get(structure.v0[k], 0) for p in interior] for k in range(3)
        ]
        try:
            solutions = rl.solve_fraction_free(coefficients, right_hand_sides)
        except ZeroDivisionError as e:
            raise StructureError(
                f"interior block of SG_{structure.level} is singular"
            ) from e

        ext: List[List[Fraction]] = []
        boundary_slot = {p: k for k, p in enumerate(structure.v0)}
        for p in range(n):
            if p in boundary_slot:
                ext.append([Fraction(int(k == boundary_slot[p])) for k in range(3)])
            else:
                ext.append([solutions[k][position[p]] for k in range(3)])

        schur = []
        for a in range(3):
            pa = structure.v0[a]
            schur_row = []
            for k in range(3):
                value = Fraction(rows[pa].get(structure.v0[k], 0))
                for q, v in rows[pa].items():
                    if q in position:
                        value += v * solutions[k][position[q]]
                schur_row.append(value / scale)
            schur.append(tuple(schur_row))
        return ext, tuple(schur)

    @staticmethod
    def _ratio_to_d(schur: rl.Matrix, d: rl.Matrix) -> Fraction:
        i, j = next((i, j) for i in range(3) for j in range(3) if i != j and d[i][j] != 0)
        r = schur[i][j] / d[i][j]
        if any(schur[a][b] != r * d[a][b] for a in range(3) for b in range(3)):
            raise StructureError("no uniform harmonic structure: G' is not proportional to D")
        if not 0 < r < 1:
            raise StructureError(f"harmonic structure is not regular: r = {r}")
        return r

    def renormalization_factor(
        self, structure: SelfSimilarStructure, d: Sequence[Sequence]
    ) -> Fraction:
        """The unique r with G' = r D, checked entrywise in rationals.

        Raises:
            PreconditionError: if D is not a valid boundary Laplacian
            StructureError: if G' is not proportional to D or r is not in (0, 1)
        """
        m = validate_laplacian(d)
        _, schur = self._exact_extension(structure, m)
        return self._ratio_to_d(schur, m)

    def extension_matrices(
        self, structure: SelfSimilarStructure, d: Sequence[Sequence], r: Fraction
    ) -> List[rl.Matrix]:
        """Exact A_i: row k of A_i is the extension value at psi_i(p_k).

        Raises:
            StructureError: if ``r`` is not the renormalization factor or the
                harmonic identity sum_i tA_i D A_i = r D fails
        """
        m = validate_laplacian(d)
        ext, schur = self._exact_extension(structure, m)
        if self._ratio_to_d(schur, m) != Fraction(r):
            raise StructureError(f"r = {r} does not match the Schur complement")
        maps = [
            tuple(tuple(ext[p][k] for k in range(3)) for p in corners)
            for corners in structure.corner_map
        ]
        if not harmonic_identity_holds(maps, m, Fraction(r)):
            raise StructureError("harmonic identity sum_i tA_i D A_i = r D fails")
        return maps

    # ------------------------------------------------------------------
    # Harmonic structure (either backend)
    # ------------------------------------------------------------------

    def build_harmonic_structure(
        self, level: int, backend: str = "exact", d: Sequence[Sequence] = STANDARD_D
    ) -> HarmonicStructure:
        """Build (D, r), the A_i and the corner eigendata for SG_l.

        Args:
            level: l >= 2
            backend: "exact" or "float"; exact requests above ``exact_cap``
                fall back to float with a warning
            d: Boundary Laplacian (defaults to the SG_l matrix)

        Returns:
            HarmonicStructure
        """
        if backend == "exact" and level > self.exact_cap:
            logger.warning(
                "level %d exceeds the exact-backend cap %d; using the float backend",
                level,
                self.exact_cap,
            )
            backend = "float"
        structure = self.build_structure(level)
        logger.info("building SG_%d harmonic structure (%s backend)", level, backend)
        if backend == "exact":
            hs = self._build_exact(structure, d)
        else:
            hs = self._build_float(structure, d)
        logger.info("SG_%d: r = %s, %d cells", level, format_scalar(hs.r), structure.num_cells)
        return hs

    def _build_exact(
        self, structure: SelfSimilarStructure, d: Sequence[Sequence]
    ) -> HarmonicStructure:
        m = validate_laplacian(d)
        ext, schur = self._exact_extension(structure, m)
        r = self._ratio_to_d(schur, m)
        maps = tuple(
            tuple(tuple(ext[p][k] for k in range(3)) for p in corners)
            for corners in structure.corner_map
        )
        d_squared = rl.matmul(m, m)
        gamma = -d_squared[0][0] / m[0][0]
        if d_squared != rl.scale(m, -gamma):
            raise StructureError("D^2 is not a multiple of D")

        u_vectors = tuple(tuple(m[row][j] for row in range(3)) for j in range(3))
        v_vectors = []
        for j in range(3):
            shifted = rl.add(maps[j], rl.scale(rl.identity(3), -r))
            basis = rl.nullspace(shifted)
            if len(basis) != 1:
                raise StructureError(f"r is not a simple eigenvalue of A_{j + 1}")
            v = basis[0]
            norm = rl.dot(u_vectors[j], v)
            v_vectors.append(tuple(x / norm for x in v))

        return HarmonicStructure(
            structure=structure,
            d_matrix=m,
            r=r,
            a_maps=maps,
            gamma=gamma,
            u_vectors=u_vectors,
            v_vectors=tuple(v_vectors),
            backend="exact",
            schur_complement=schur,
        )

    def _float_extension(
        self, structure: SelfSimilarStructure, d: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        n = structure.num_points
        g = np.zeros((n, n))
        for corners in structure.corner_map:
            g[np.ix_(corners, corners)] += d
        interior = np.array(structure.interior_indices, dtype=int)
        boundary = np.array(structure.v0, dtype=int)
        try:
            h = np.linalg.solve(g[np.ix_(interior, interior)], -g[np.ix_(interior, boundary)])
        except np.linalg.LinAlgError as e:
            raise StructureError(
                f"interior block of SG_{structure.level} is singular"
            ) from e
        schur = g[np.ix_(boundary, boundary)] + g[np.ix_(boundary, interior)] @ h
        ext = np.zeros((n, 3))
        ext[boundary] = np.eye(3)
        ext[interior] = h
        return ext, schur

    def _build_float(
        self, structure: SelfSimilarStructure, d: Sequence[Sequence]
    ) -> HarmonicStructure:
        m = validate_laplacian(d)
        d_array = np.array(m, dtype=float)
        ext, schur = self._float_extension(structure, d_array)
        r = float(schur[0, 1] / d_array[0, 1])
        if not np.allclose(schur, r * d_array, rtol=1e-9, atol=1e-12):
            raise StructureError("no uniform harmonic structure: G' is not proportional to D")
        if not 0 < r < 1:
            raise StructureError(f"harmonic structure is not regular: r = {r}")
        maps = ext[np.array(structure.corner_map)]  # (S, 3, 3)

        d_squared = d_array @ d_array
        gamma = float(-d_squared[0, 0] / d_array[0, 0])
        if not np.allclose(d_squared, -gamma * d_array, atol=1e-12):
            raise StructureError("D^2 is not a multiple of D")

        u_vectors = d_array.T.copy()  # u_j = column j of D
        v_vectors = []
        for j in range(3):
            _, _, vt = np.linalg.svd(maps[j] - r * np.eye(3))
            v = vt[-1]
            v_vectors.append(v / np.dot(u_vectors[j], v))

        return HarmonicStructure(
            structure=structure,
            d_matrix=_float_tuple(d_array),
            r=r,
            a_maps=tuple(_float_tuple(a) for a in maps),
            gamma=gamma,
            u_vectors=_float_tuple(u_vectors),
            v_vectors=_float_tuple(np.array(v_vectors)),
            backend="float",
            schur_complement=_float_tuple(schur),
        )

    # ------------------------------------------------------------------
    # Invertibility of the extension matrices
    # ------------------------------------------------------------------

    def check_a2(self, structure: SelfSimilarStructure, hs: HarmonicStructure) -> A2Report:
        """Determinant of every A_i; a zero is reported, never raised."""
        if hs.is_exact:
            determinants: List[Any] = [rl.determinant(a) for a in hs.a_maps]
            zero = [i + 1 for i, det in enumerate(determinants) if det == 0]
        else:
            determinants = [float(x) for x in np.linalg.det(hs.a_array())]
            zero = [i + 1 for i, det in enumerate(determinants) if abs(det) < FLOAT_ZERO_DET]
        report = A2Report(
            level=structure.level,
            backend=hs.backend,
            determinants=determinants,
            zero_symbols=zero,
            min_abs_det=min(abs(x) for x in determinants),
        )
        if zero:
            logger.warning("SG_%d: A_i singular for symbols %s", structure.level, zero)
        return report

    def certify_a2(self, level: int) -> A2Report:
        """Invertibility of every A_i at one level: exact determinants up to ``certify_cap``.

        Levels above ``exact_cap`` but within ``certify_cap`` skip the
        eigendata and only run the exact extension solve.
        """
        structure = self.build_structure(level)
        if level <= self.exact_cap:
            return self.check_a2(structure, self._build_exact(structure, STANDARD_D))
        if level <= self.certify_cap:
            m = validate_laplacian(STANDARD_D)
            ext, schur = self._exact_extension(structure, m)
            self._ratio_to_d(schur, m)
            determinants = [
                rl.determinant(tuple(tuple(ext[p][k] for k in range(3)) for p in corners))
                for corners in structure.corner_map
            ]
            zero = [i + 1 for i, det in enumerate(determinants) if det == 0]
            return A2Report(
                level=level,
                backend="exact",
                determinants=determinants,
                zero_symbols=zero,
                min_abs_det=min(abs(x) for x in determinants),
            )
        logger.warning("level %d exceeds the certification cap; float determinants", level)
        return self.check_a2(structure, self._build_float(structure, STANDARD_D))


def harmonic_identity_holds(maps: Sequence[rl.Matrix], d: rl.Matrix, r: Fraction) -> bool:
    """sum_i tA_i D A_i == r D, exactly."""
    total = rl.scale(d, Fraction(0))
    for a in maps:
        total = rl.add(total, rl.matmul(rl.matmul(rl.transpose(a), d), a))
    return total == rl.scale(d, r)


def harmonic_identity_residual(hs: HarmonicStructure) -> float:
    """max |sum_i tA_i D A_i - r D| in floating point."""
    a = hs.a_array()
    d = hs.d_array()
    total = np.einsum("sji,jk,skl->il", a, d, a)
    return float(np.max(np.abs(total - float(hs.r) * d)))


def structure_summary(hs: HarmonicStructure, a2: A2Report) -> Dict[str, Any]:
    """JSON-ready description of a harmonic structure."""
    structure = hs.structure
    if hs.is_exact:
        identity: Any = harmonic_identity_holds(hs.a_maps, hs.d_matrix, hs.r)
    else:
        identity = harmonic_identity_residual(hs)
    return {
        "level": structure.level,
        "backend": hs.backend,
        "cells": structure.num_cells,
        "points": structure.num_points,
        "r": format_scalar(hs.r),
        "gamma": format_scalar(hs.gamma),
        "d_matrix": [[format_scalar(x) for x in row] for row in hs.d_matrix],
        "cell_anchors": [[c.a, c.b] for c in structure.cells],
        "a_maps": [
            [[format_scalar(x) for x in row] for row in a] for a in hs.a_maps
        ],
        "determinants": [format_scalar(x) for x in a2.determinants],
        "min_abs_det": format_scalar(a2.min_abs_det),
        "harmonic_identity": identity,
        "v_vectors": [[format_scalar(x) for x in v] for v in hs.v_vectors],
    }


def _float_tuple(a: np.ndarray) -> Tuple[Tuple[float, ...], ...]:
    return tuple(tuple(float(x) for x in row) for row in a)
