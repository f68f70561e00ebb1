"""Tests for SG_l construction and the harmonic structure."""

from fractions import Fraction

import numpy as np
import pytest

from src.models.errors import DomainError, PreconditionError
from src.models.lattice import BarycentricPoint
from src.services.structure_builder import (
    STANDARD_D,
    StructureBuilder,
    harmonic_identity_holds,
    harmonic_identity_residual,
    structure_summary,
    validate_laplacian,
)
from src.utils import rational_linalg as rl

F = Fraction


@pytest.mark.parametrize("level, cells, points", [(2, 3, 6), (3, 6, 10), (5, 15, 21)])
def test_build_structure_counts(builder, level, cells, points):
    s = builder.build_structure(level)
    assert s.num_cells == cells
    assert s.num_points == points
    assert [s.v1_points[i] for i in s.v0] == [
        BarycentricPoint(0, 0),
        BarycentricPoint(level, 0),
        BarycentricPoint(0, level),
    ]


def test_corner_cells_fix_boundary_points(builder):
    s = builder.build_structure(4)
    for j in range(3):
        assert s.corner_map[j][j] == s.v0[j]
    # remaining cells sorted by (b, a)
    rest = s.cells[3:]
    assert list(rest) == sorted(rest, key=lambda c: (c.b, c.a))


def test_cell_graph_connected(builder):
    import networkx as nx

    s = builder.build_structure(6)
    assert nx.is_connected(builder.cell_graph(s))


def test_level_below_two_rejected(builder):
    with pytest.raises(DomainError):
        builder.build_structure(1)


def test_level_one_laplacian_sg2(builder):
    s = builder.build_structure(2)
    g = builder.level_one_laplacian(s, STANDARD_D)
    diagonal = {s.v1_points[i]: g[i][i] for i in range(s.num_points)}
    for corner in (BarycentricPoint(0, 0), BarycentricPoint(2, 0), BarycentricPoint(0, 2)):
        assert diagonal[corner] == -2
    for midpoint in (BarycentricPoint(1, 0), BarycentricPoint(0, 1), BarycentricPoint(1, 1)):
        assert diagonal[midpoint] == -4
    assert all(sum(row) == 0 for row in g)
    indicator = [F(int(i == s.v0[0])) for i in range(s.num_points)]
    energy = -rl.dot(indicator, rl.matvec(g, indicator))
    assert energy == 2


@pytest.mark.parametrize(
    "d",
    [
        [[-2, 1, 1], [1, -2, 1], [1, 1, -1]],  # constants not annihilated
        [[-1, 1, 0], [1, -1, 0], [0, 0, 0]],  # kernel too large
        [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]],  # negative off-diagonals
        [[-2, 1, 1], [2, -2, 0], [1, 1, -2]],  # not symmetric
    ],
)
def test_validate_laplacian_rejects(d):
    with pytest.raises(PreconditionError):
        validate_laplacian(d)


def test_sg2_golden_values(sg2):
    assert sg2.r == F(3, 5)
    assert sg2.gamma == 3
    assert sg2.a_maps[0] == (
        (F(1), F(0), F(0)),
        (F(2, 5), F(2, 5), F(1, 5)),
        (F(2, 5), F(1, 5), F(2, 5)),
    )
    assert sg2.u_vectors[0] == (-2, 1, 1)
    assert sg2.v_vectors[0] == (0, F(1, 2), F(1, 2))
    assert rl.determinant(sg2.a_maps[0]) == F(3, 25)


def test_sg3_renormalization(sg3, builder):
    assert sg3.r == F(7, 15)
    s = builder.build_structure(3)
    assert builder.renormalization_factor(s, STANDARD_D) == F(7, 15)


def test_harmonic_structure_invariants(sg3):
    ones = (F(1),) * 3
    for a in sg3.a_maps:
        assert rl.matvec(a, ones) == ones
    for j in range(3):
        a, u, v = sg3.a_maps[j], sg3.u_vectors[j], sg3.v_vectors[j]
        assert rl.matvec(rl.transpose(a), u) == tuple(sg3.r * x for x in u)
        assert rl.matvec(a, v) == tuple(sg3.r * x for x in v)
        assert rl.dot(u, v) == 1
        assert all(x >= 0 for x in v)
    assert harmonic_identity_holds(sg3.a_maps, sg3.d_matrix, sg3.r)
    assert sg3.schur_complement == rl.scale(sg3.d_matrix, sg3.r)


def test_extension_matrices_match_build(builder, sg2):
    s = builder.build_structure(2)
    maps = builder.extension_matrices(s, STANDARD_D, F(3, 5))
    assert tuple(maps) == sg2.a_maps


def test_float_backend_agrees_with_exact(sg2, sg2_float):
    assert sg2_float.backend == "float"
    assert sg2_float.r == pytest.approx(0.6, abs=1e-12)
    np.testing.assert_allclose(sg2_float.a_array(), sg2.a_array(), atol=1e-12)
    np.testing.assert_allclose(sg2_float.v_array(), sg2.v_array(), atol=1e-12)
    assert harmonic_identity_residual(sg2_float) < 1e-12


def test_exact_request_above_cap_falls_back(caplog):
    builder = StructureBuilder(exact_cap=2, certify_cap=3)
    with caplog.at_level("WARNING"):
        hs = builder.build_harmonic_structure(3, backend="exact")
    assert hs.backend == "float"
    assert "float backend" in caplog.text
    assert hs.r == pytest.approx(7 / 15, abs=1e-12)


def test_check_a2_sg2(builder, sg2):
    report = builder.check_a2(sg2.structure, sg2)
    assert report.all_invertible
    assert report.determinants[0] == F(3, 25)
    assert report.to_dict()["determinants"][0] == "3/25"


def test_certify_a2_between_caps():
    builder = StructureBuilder(exact_cap=2, certify_cap=5)
    report = builder.certify_a2(5)
    assert report.backend == "exact"
    assert report.all_invertible
    assert len(report.determinants) == 15


def test_structure_summary_is_json_ready(sg2, builder):
    summary = structure_summary(sg2, builder.check_a2(sg2.structure, sg2))
    assert summary["r"] == "3/5"
    assert summary["cells"] == 3
    assert summary["harmonic_identity"] is True
    assert summary["a_maps"][0][1] == ["2/5", "2/5", "1/5"]


@pytest.mark.slow
def test_a2_exact_up_to_twenty():
    builder = StructureBuilder()
    for level in range(2, 21):
        assert builder.certify_a2(level).all_invertible, level


@pytest.mark.slow
def test_a2_certified_up_to_fifty():
    builder = StructureBuilder()
    for level in range(21, 51):
        assert builder.certify_a2(level).all_invertible, level
