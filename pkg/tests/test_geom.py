import random

import pytest

from geocover.geom import (
    COORD_BOUND,
    Disk,
    GeometryError,
    Halfspace3,
    Point2,
    Point3,
    Square,
    cone_contains,
    contains,
    depth,
    halfspace_dual,
    lift_disk,
    lift_point,
    lifted_square,
    point_dual_contains,
    square_dual,
)


def test_contains_square_closed_corner():
    assert contains(Square(0, 0, 2), Point2(2, 2))
    assert not contains(Square(0, 0, 2), Point2(3, 2))


def test_contains_halfspace_boundary_and_outside():
    assert not contains(Halfspace3(1, 0, 0), Point3(3, 5, 2))
    assert contains(Halfspace3(1, 0, 0), Point3(3, 5, 3))


def test_contains_disk_pythagorean_boundary():
    assert contains(Disk(0, 0, 5), Point2(3, 4))
    assert not contains(Disk(0, 0, 5), Point2(4, 4))


def test_contains_kind_mismatch_raises():
    with pytest.raises(GeometryError):
        contains(Square(0, 0, 1), Point3(0, 0, 0))
    with pytest.raises(GeometryError):
        contains(Halfspace3(0, 0, 0), Point2(0, 0))


def test_square_dual_example():
    assert square_dual(Square(3, 4, 2)) == Point3(3, 4, 2)


def test_cone_contains_equality_branch():
    assert cone_contains(Point2(0, 0), Point3(1, 1, 1))
    assert not cone_contains(Point2(0, 0), Point3(2, 1, 1))


def test_square_cone_duality_exhaustive_grid():
    # Every (square, point) pair on an 8x8 grid of centers/points, small h.
    for cx in range(-4, 4):
        for cy in range(-4, 4):
            for h in (1, 2):
                s = Square(cx, cy, h)
                for px in range(-4, 4):
                    for py in range(-4, 4):
                        p = Point2(px, py)
                        assert cone_contains(p, square_dual(s)) == contains(s, p)


def test_square_cone_duality_randomized():
    rng = random.Random(1234)
    for _ in range(10_000):
        s = Square(rng.randint(-10**6, 10**6), rng.randint(-10**6, 10**6), rng.randint(1, 10**5))
        p = Point2(rng.randint(-10**6, 10**6), rng.randint(-10**6, 10**6))
        assert cone_contains(p, square_dual(s)) == contains(s, p)


def test_lifted_square_order_invariants():
    s = Square(5, -3, 4)
    x1, x2, y1, y2 = lifted_square(s)
    assert x1 < x2 and y1 < y2
    assert (x1, x2, y1, y2) == (1, 9, -7, 1)


def test_lift_disk_trivial_cases():
    d = Disk(0, 0, 1)
    assert contains(lift_disk(d), lift_point(Point2(0, 0)))
    assert not contains(lift_disk(d), lift_point(Point2(2, 0)))


def test_lift_disk_randomized_equivalence():
    rng = random.Random(99)
    for _ in range(10_000):
        d = Disk(rng.randint(-8000, 8000), rng.randint(-8000, 8000), rng.randint(1, 4000))
        p = Point2(rng.randint(-8000, 8000), rng.randint(-8000, 8000))
        assert contains(lift_disk(d), lift_point(p)) == contains(d, p)


def test_lift_point_rejects_out_of_range():
    big = 1 << 15
    with pytest.raises(GeometryError):
        lift_point(Point2(big, big))


def test_halfspace_duality_trivial():
    assert contains(Halfspace3(0, 0, 0), Point3(0, 0, 0))
    assert point_dual_contains(Point3(0, 0, 0), halfspace_dual(Halfspace3(0, 0, 0)))
    h = Halfspace3(1, 1, 1)
    p = Point3(1, 1, 10)
    assert contains(h, p)
    assert point_dual_contains(p, halfspace_dual(h))


def test_halfspace_duality_randomized():
    rng = random.Random(7)
    for _ in range(10_000):
        h = Halfspace3(rng.randint(-1000, 1000), rng.randint(-1000, 1000), rng.randint(-10**6, 10**6))
        p = Point3(rng.randint(-10**6, 10**6), rng.randint(-10**6, 10**6), rng.randint(-10**6, 10**6))
        assert point_dual_contains(p, halfspace_dual(h)) == contains(h, p)


def test_depth_empty_and_full():
    assert depth(Point2(0, 0), []) == 0
    squares = [Square(0, 0, k) for k in range(1, 8)]
    assert depth(Point2(0, 0), squares) == 7


def test_int64_margins_for_vectorized_paths():
    # Worst-case magnitudes of every int64-evaluated expression in the
    # package, given the coordinate bound. Kept in sync with the fast paths.
    B = COORD_BOUND
    int64_max = (1 << 63) - 1
    # square membership: |p - c| <= h uses differences up to 2B
    assert 2 * B < int64_max
    # disk membership: dx^2 + dy^2 vs r^2
    assert 2 * (2 * B) ** 2 < int64_max
    # halfspace membership: z - (a*x + b*y + c)
    assert B + 2 * B * B + B < int64_max
    # dual-region membership uses the same form with roles swapped
    assert B + 2 * B * B + B < int64_max


def test_constructor_bounds_enforced():
    with pytest.raises(GeometryError):
        Square(COORD_BOUND, 0, 1)
    with pytest.raises(GeometryError):
        Halfspace3(COORD_BOUND + 1, 0, 0)
    with pytest.raises(GeometryError):
        Disk(0, 0, 0)
