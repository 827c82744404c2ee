"""Exact integer geometry shared by every structure in the package.

All coordinates and plane coefficients are integers with magnitude at most
``COORD_BOUND`` (2**28).  With that bound every predicate below fits
comfortably in signed 128-bit intermediates (Python ints are exact anyway);
the vectorized paths elsewhere in the package rely on the int64 margins
worked out in ``tests/test_geom.py``.

Membership is closed everywhere: boundaries count as inside.  Where an
arbitrary witness is required, ties are broken by element id.
"""

from __future__ import annotations

from dataclasses import dataclass

COORD_BOUND = 1 << 28


class GeometryError(ValueError):
    """Contract violation in a geometric constructor or predicate."""


def _check_coord(value: int, what: str) -> None:
    if abs(value) > COORD_BOUND:
        raise GeometryError(f"{what}={value} exceeds the coordinate bound {COORD_BOUND}")


@dataclass(frozen=True)
class Point2:
    x: int
    y: int

    def __post_init__(self) -> None:
        _check_coord(self.x, "x")
        _check_coord(self.y, "y")


@dataclass(frozen=True)
class Point3:
    x: int
    y: int
    z: int

    def __post_init__(self) -> None:
        _check_coord(self.x, "x")
        _check_coord(self.y, "y")
        _check_coord(self.z, "z")


@dataclass(frozen=True)
class Square:
    """Axis-aligned square with integer center (cx, cy) and half-side h."""

    cx: int
    cy: int
    h: int

    def __post_init__(self) -> None:
        if self.h < 1:
            raise GeometryError(f"half-side must be >= 1, got {self.h}")
        for v, name in ((self.cx - self.h, "cx-h"), (self.cx + self.h, "cx+h"),
                        (self.cy - self.h, "cy-h"), (self.cy + self.h, "cy+h")):
            _check_coord(v, name)

    @property
    def x1(self) -> int:
        return self.cx - self.h

    @property
    def x2(self) -> int:
        return self.cx + self.h

    @property
    def y1(self) -> int:
        return self.cy - self.h

    @property
    def y2(self) -> int:
        return self.cy + self.h


@dataclass(frozen=True)
class Disk:
    cx: int
    cy: int
    r: int

    def __post_init__(self) -> None:
        if self.r < 1:
            raise GeometryError(f"radius must be >= 1, got {self.r}")
        _check_coord(self.cx, "cx")
        _check_coord(self.cy, "cy")
        _check_coord(self.r, "r")


@dataclass(frozen=True)
class Halfspace3:
    """Closed upper halfspace z >= a*x + b*y + c."""

    a: int
    b: int
    c: int

    def __post_init__(self) -> None:
        _check_coord(self.a, "a")
        _check_coord(self.b, "b")
        _check_coord(self.c, "c")


GeomObject = Square | Disk | Halfspace3


def contains(obj: GeomObject, p: Point2 | Point3) -> bool:
    """Closed membership predicate, exact for all in-bound inputs."""
    if isinstance(obj, Square):
        if not isinstance(p, Point2):
            raise GeometryError("Square membership needs a Point2")
        return abs(p.x - obj.cx) <= obj.h and abs(p.y - obj.cy) <= obj.h
    if isinstance(obj, Disk):
        if not isinstance(p, Point2):
            raise GeometryError("Disk membership needs a Point2")
        dx = p.x - obj.cx
        dy = p.y - obj.cy
        return dx * dx + dy * dy <= obj.r * obj.r
    if isinstance(obj, Halfspace3):
        if not isinstance(p, Point3):
            raise GeometryError("Halfspace3 membership needs a Point3")
        return p.z >= obj.a * p.x + obj.b * p.y + obj.c
    raise GeometryError(f"unsupported object {obj!r}")


def depth(p: Point2 | Point3, objects) -> int:
    """Number of objects containing p, by linear scan.

    This is the oracle primitive; all faster counting paths in the package
    are validated against it.
    """
    return sum(1 for obj in objects if contains(obj, p))


# -- square <-> cone duality ------------------------------------------------

def square_dual(s: Square) -> Point3:
    """Map a square to the dual point (cx, cy, h)."""
    return Point3(s.cx, s.cy, s.h)


def cone_contains(p: Point2, q: Point3) -> bool:
    """True iff the dual point q lies in the cone region of p.

    The cone of p is {(x, y, z): z >= max(|x - p.x|, |y - p.y|)}, so this is
    equivalent to the square with dual point q containing p.
    """
    return q.z >= abs(q.x - p.x) and q.z >= abs(q.y - p.y)


def lifted_square(s: Square) -> tuple[int, int, int, int]:
    """4D lift (x1, x2, y1, y2); p in s iff x1 <= px <= x2 and y1 <= py <= y2."""
    return (s.x1, s.x2, s.y1, s.y2)


# -- disk -> halfspace lifting ----------------------------------------------

def lift_point(p: Point2) -> Point3:
    """Lift a planar point for disk containment tests against lift_disk output.

    The paraboloid lift is negated so that disks become upper halfspaces:
    the image is (x, y, -(x^2 + y^2)). Rejects points whose lifted height
    leaves the coordinate bound.
    """
    zz = p.x * p.x + p.y * p.y
    if zz > COORD_BOUND:
        raise GeometryError(f"lifted height {zz} exceeds the coordinate bound")
    return Point3(p.x, p.y, -zz)


def lift_disk(d: Disk) -> Halfspace3:
    """Lift a disk to the upper halfspace containing exactly the lifted points
    of its members."""
    a = -2 * d.cx
    b = -2 * d.cy
    c = d.cx * d.cx + d.cy * d.cy - d.r * d.r
    for v, name in ((a, "a"), (b, "b"), (c, "c")):
        if abs(v) > COORD_BOUND:
            raise GeometryError(f"lifted coefficient {name}={v} exceeds the coordinate bound")
    return Halfspace3(a, b, c)


# -- halfspace <-> point duality --------------------------------------------

def halfspace_dual(h: Halfspace3) -> Point3:
    """Dual point of an upper halfspace: just its coefficient triple."""
    return Point3(h.a, h.b, h.c)


def point_dual_contains(p: Point3, q: Point3) -> bool:
    """True iff q lies in the dual region of p.

    The dual region of p is {(a, b, c): p.z >= a*p.x + b*p.y + c}; membership
    of a halfspace's dual point here equals membership of p in the halfspace.
    """
    return p.z >= q.x * p.x + q.y * p.y + q.z
