"""Tests for exact signed-support geometry."""

from collections import Counter
from fractions import Fraction

import pytest

from copositivity.errors import ContractViolation, InputError
from copositivity.lattice import (
    SignedSupport,
    affine_dim,
    barycentric_coordinates,
    classify_support,
    enumerate_faces,
    find_cell_witness,
    hull_vertices,
    is_nonseparable,
    minus_in_interior,
    reduce_to_full_dim,
    simplices_containing_cell,
    smallest_face_containing,
    truncation_face_set_J,
)

SQUARE4 = ((0, 0), (4, 0), (0, 4), (4, 4))


def test_affine_dim_examples():
    """Point, square with center, collinear points."""
    assert affine_dim([(0, 0)]) == 0
    assert affine_dim([(0, 0), (2, 0), (0, 2), (2, 2), (1, 1)]) == 2
    assert affine_dim([(0, 0), (1, 1), (2, 2)]) == 1


def test_affine_dim_empty_raises():
    with pytest.raises(InputError):
        affine_dim([])


def test_affine_dim_invariant_under_permutation_and_translation():
    """Reordering and integer translation keep the dimension."""
    points = [(0, 0, 1), (2, 1, 1), (1, 3, 1), (4, 4, 1)]
    shifted = [(x + 3, y - 7, z + 11) for x, y, z in reversed(points)]
    assert affine_dim(points) == affine_dim(shifted) == 2


def test_hull_vertices():
    """The center of the square and the middle of a segment are not vertices."""
    assert hull_vertices([(0, 0), (2, 0), (0, 2), (2, 2), (1, 1)]) == (0, 1, 2, 3)
    assert hull_vertices([(5, 5)]) == (0,)
    assert hull_vertices([(0, 0), (1, 0), (2, 0)]) == (0, 2)


def test_enumerate_faces_square(square_support):
    """Four vertices, four edges and the square itself."""
    faces = enumerate_faces(square_support)
    assert Counter(face.dim for face in faces) == {0: 4, 1: 4, 2: 1}


def test_enumerate_faces_triangle_and_segment():
    triangle = SignedSupport(((0, 0), (2, 0), (0, 2)), (), 2)
    assert Counter(face.dim for face in enumerate_faces(triangle)) == {0: 3, 1: 3, 2: 1}
    segment = SignedSupport(((0,), (2,)), ((1,),), 1)
    assert Counter(face.dim for face in enumerate_faces(segment)) == {0: 2, 1: 1}


def test_face_normals_certify_faces(pentagon_support):
    """Every point is on the nonnegative side, face points at zero."""
    points = pentagon_support.points
    for face in enumerate_faces(pentagon_support):
        for k, p in enumerate(points):
            value = face.value(p)
            if k in face.point_indices:
                assert value == 0
            else:
                assert value > 0


def test_smallest_face_containing(square_support):
    """Interior point gives the whole square, an edge point the edge."""
    full = smallest_face_containing(square_support, [(1, 1)])
    assert full.dim == 2
    assert full.point_indices == (0, 1, 2, 3, 4)

    edge_support = SignedSupport(((0, 0), (2, 0), (0, 2), (2, 2)), ((1, 0),), 2)
    edge = smallest_face_containing(edge_support, [(1, 0)])
    assert edge.dim == 1
    assert edge.point_indices == (0, 1, 4)

    vertex = smallest_face_containing(square_support, [(2, 2)])
    assert vertex.dim == 0
    assert vertex.point_indices == (3,)


def test_smallest_face_outside_raises(square_support):
    with pytest.raises(InputError):
        smallest_face_containing(square_support, [(3, 3)])


def test_truncation_face_set_J(square_support):
    """Interior A- gives only the face itself; an edge point adds that edge."""
    gamma = smallest_face_containing(square_support, square_support.a_minus)
    assert truncation_face_set_J(gamma, square_support) == [gamma]

    edge_support = SignedSupport(((0, 0), (2, 0), (0, 2), (2, 2)), ((1, 0),), 2)
    full = enumerate_faces(edge_support)[-1]
    faces = truncation_face_set_J(full, edge_support)
    assert sorted(face.dim for face in faces) == [1, 2]

    positive = SignedSupport(((0, 0), (2, 0)), (), 2)
    assert truncation_face_set_J(enumerate_faces(positive)[-1], positive) == []


def test_reduce_to_full_dim_identity(square_support):
    psi, reduced = reduce_to_full_dim(square_support)
    assert reduced == square_support
    assert psi.apply((1, 1)) == (1, 1)


def test_reduce_segment_preserves_order_and_round_trips():
    """The diagonal segment becomes a one-dimensional support in the same order."""
    support = SignedSupport(((0, 0), (2, 2)), ((1, 1),), 2)
    psi, reduced = reduce_to_full_dim(support)
    assert reduced.ambient_dim == 1
    assert [abs(p[0]) for p in reduced.points] == [0, 2, 1]
    for original, image in zip(support.points, reduced.points):
        assert psi.invert(image) == tuple(Fraction(v) for v in original)


def test_reduce_embedded_triangle():
    """A triangle at height 1 in dimension three reduces to dimension two."""
    support = SignedSupport(((0, 0, 1), (3, 0, 1), (0, 3, 1)), ((1, 1, 1),), 3)
    psi, reduced = reduce_to_full_dim(support)
    assert reduced.ambient_dim == 2
    assert hull_vertices(reduced.points) == hull_vertices(support.points)
    assert is_nonseparable(reduced)[0] == is_nonseparable(support)[0]


def test_barycentric_coordinates():
    """Exact weights for the four-variable circuit, a vertex and a barycenter."""
    simplex = [(0, 0, 0, 0), (40, 0, 0, 0), (0, 40, 0, 0), (0, 0, 40, 0), (0, 0, 0, 40)]
    lam = barycentric_coordinates(simplex, (1, 1, 1, 1))
    assert lam == (Fraction(9, 10),) + (Fraction(1, 40),) * 4
    assert barycentric_coordinates(simplex, (40, 0, 0, 0)) == (0, 1, 0, 0, 0)

    triangle = [(0, 0), (2, 0), (0, 2)]
    lam = barycentric_coordinates(triangle, (Fraction(2, 3), Fraction(2, 3)))
    assert lam == (Fraction(1, 3),) * 3
    assert sum(lam) == 1


def test_barycentric_degenerate_raises():
    with pytest.raises(InputError):
        barycentric_coordinates([(0, 0), (1, 1), (2, 2)], (1, 1))


def test_nonseparable_single_interior_point(square_support):
    assert is_nonseparable(square_support)[0] is True


def test_separable_pairs_in_big_square():
    """Negative points on opposite sides of a diagonal are separable."""
    for minus in [((1, 3), (3, 1)), ((1, 1), (3, 3))]:
        nonseparable, report = is_nonseparable(SignedSupport(SQUARE4, minus, 2))
        assert nonseparable is False
        assert report is not None


def test_nonseparable_pair_sharing_a_cell():
    """(1,3) and (3,3) lie in a common cell of both triangulations of the square."""
    support = SignedSupport(SQUARE4, ((1, 3), (3, 3)), 2)
    assert is_nonseparable(support)[0] is True


def test_nonseparable_without_strict_hyperplane_criterion():
    """A separating spanning line does not make this support separable."""
    support = SignedSupport(((0, 0), (4, 0), (0, 4), (1, 1)), ((2, 1), (1, 2)), 2)
    assert is_nonseparable(support)[0] is True


def test_point_outside_hull_is_separable():
    support = SignedSupport(((0, 0), (2, 0), (0, 2)), ((2, 2),), 2)
    assert minus_in_interior(support) is False
    assert is_nonseparable(support)[0] is False


def test_nonseparable_requires_negative_points():
    with pytest.raises(InputError):
        is_nonseparable(SignedSupport(((0, 0), (2, 0)), (), 2))


def test_cell_witness_in_interior(square_support):
    """The witness lies strictly inside the square and off both diagonals."""
    witness = find_cell_witness(square_support)
    x, y = witness.point
    assert 0 < x < 2 and 0 < y < 2
    assert x != y and x + y != 2


def test_cell_witness_separable_raises():
    with pytest.raises(ContractViolation):
        find_cell_witness(SignedSupport(SQUARE4, ((1, 3), (3, 1)), 2))


def test_simplices_square_center(square_support):
    """One triangle from each diagonal split contains the witness cell."""
    family = simplices_containing_cell(square_support, find_cell_witness(square_support))
    assert len(family.simplices) == 2
    for simplex in family.simplices:
        vertices = [square_support.a_plus[i] for i in simplex]
        assert min(barycentric_coordinates(vertices, (1, 1))) >= 0


def test_simplices_circuit():
    support = SignedSupport(((0, 0), (3, 0), (0, 3)), ((1, 1),), 2)
    family = simplices_containing_cell(support, find_cell_witness(support))
    assert family.simplices == ((0, 1, 2),)


def test_simplices_pentagon_star(pentagon_support):
    """The central cell lies in the five triangles made of a vertex and its opposite edge."""
    family = simplices_containing_cell(pentagon_support, find_cell_witness(pentagon_support))
    expected = {frozenset({i, (i + 2) % 5, (i + 3) % 5}) for i in range(5)}
    assert {frozenset(s) for s in family.simplices} == expected


def test_classify_support_reason(square_support):
    result = classify_support(square_support)
    assert result.nonseparable
    assert result.witness is not None
    assert isinstance(result.reason, str)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
