"""Instance container: one point set and one object set with stable ids.

Supported kinds: ``squares2d`` (objects [cx, cy, h]), ``disks2d``
([cx, cy, r]) and ``halfspaces3d`` ([a, b, c] meaning z >= a*x + b*y + c).
Points are [x, y] for the planar kinds and [x, y, z] in 3D.

Ids are assigned monotonically on insert and never reused.  Loading from a
JSON document assigns ids by array index.  Inserts validate the coordinate
bounds of the underlying geometry (including liftability for disk inputs).
"""

from __future__ import annotations

import json

import numpy as np

from . import geom

KINDS = ("squares2d", "disks2d", "halfspaces3d")


class InstanceError(ValueError):
    pass


def _validate_point(kind, coords):
    if kind == "halfspaces3d":
        if len(coords) != 3:
            raise InstanceError(f"3D point expected, got {coords}")
        geom.Point3(*coords)
    else:
        if len(coords) != 2:
            raise InstanceError(f"2D point expected, got {coords}")
        p = geom.Point2(*coords)
        if kind == "disks2d":
            geom.lift_point(p)  # rejects points whose lift leaves the bound


def _validate_object(kind, coords):
    if len(coords) != 3:
        raise InstanceError(f"object triple expected, got {coords}")
    if kind == "squares2d":
        geom.Square(*coords)
    elif kind == "disks2d":
        geom.lift_disk(geom.Disk(*coords))
    elif kind == "halfspaces3d":
        geom.Halfspace3(*coords)
    else:
        raise InstanceError(f"unknown kind {kind!r}")


class Instance:
    def __init__(self, kind):
        if kind not in KINDS:
            raise InstanceError(f"unknown kind {kind!r}")
        self.kind = kind
        self._points = {}
        self._objects = {}
        self._next_pid = 0
        self._next_oid = 0
        self._version = 0
        self._pt_cols = None
        self._obj_cols = None

    # -- construction ----------------------------------------------------

    @classmethod
    def from_lists(cls, kind, points, objects):
        inst = cls(kind)
        for coords in points:
            inst.insert_point(coords)
        for coords in objects:
            inst.insert_object(coords)
        return inst

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"malformed instance JSON: {exc}") from exc
        for key in ("kind", "points", "objects"):
            if key not in doc:
                raise InstanceError(f"instance document missing {key!r}")
        return cls.from_lists(doc["kind"], doc["points"], doc["objects"])

    def to_json(self):
        # ids are array indices on round-trip, so emit in id order
        return json.dumps(
            {
                "kind": self.kind,
                "points": [list(self._points[k]) for k in sorted(self._points)],
                "objects": [list(self._objects[k]) for k in sorted(self._objects)],
            },
            separators=(",", ":"),
        )

    # -- updates ---------------------------------------------------------

    def insert_point(self, coords):
        coords = tuple(int(c) for c in coords)
        _validate_point(self.kind, coords)
        pid = self._next_pid
        self._next_pid += 1
        self._points[pid] = coords
        self._touch()
        return pid

    def delete_point(self, pid):
        if pid not in self._points:
            raise InstanceError(f"unknown point id {pid}")
        del self._points[pid]
        self._touch()

    def insert_object(self, coords):
        coords = tuple(int(c) for c in coords)
        _validate_object(self.kind, coords)
        oid = self._next_oid
        self._next_oid += 1
        self._objects[oid] = coords
        self._touch()
        return oid

    def delete_object(self, oid):
        if oid not in self._objects:
            raise InstanceError(f"unknown object id {oid}")
        del self._objects[oid]
        self._touch()

    def _touch(self):
        self._version += 1
        self._pt_cols = None
        self._obj_cols = None

    # -- access ----------------------------------------------------------

    @property
    def version(self):
        return self._version

    @property
    def n_points(self):
        return len(self._points)

    @property
    def n_objects(self):
        return len(self._objects)

    @property
    def size(self):
        return len(self._points) + len(self._objects)

    def point(self, pid):
        return self._points[pid]

    def obj(self, oid):
        return self._objects[oid]

    def point_ids(self):
        return sorted(self._points)

    def object_ids(self):
        return sorted(self._objects)

    def points_dict(self):
        return dict(self._points)

    def objects_dict(self):
        return dict(self._objects)

    def point_cols(self):
        """(ids, coord columns...) as int64 arrays, cached per version."""
        if self._pt_cols is None:
            ids = np.array(sorted(self._points), dtype=np.int64)
            dim = 3 if self.kind == "halfspaces3d" else 2
            cols = np.empty((len(ids), dim), dtype=np.int64)
            for i, pid in enumerate(ids):
                cols[i] = self._points[int(pid)]
            self._pt_cols = (ids,) + tuple(cols[:, d] for d in range(dim))
        return self._pt_cols

    def object_cols(self):
        if self._obj_cols is None:
            ids = np.array(sorted(self._objects), dtype=np.int64)
            cols = np.empty((len(ids), 3), dtype=np.int64)
            for i, oid in enumerate(ids):
                cols[i] = self._objects[int(oid)]
            self._obj_cols = (ids,) + tuple(cols[:, d] for d in range(3))
        return self._obj_cols

    # -- lifted views (disks act as 3D upper halfspaces) -------------------

    def lifted_object(self, oid):
        cx, cy, r = self._objects[oid]
        if self.kind != "disks2d":
            raise InstanceError("lifted_object applies to disks2d")
        h = geom.lift_disk(geom.Disk(cx, cy, r))
        return (h.a, h.b, h.c)

    def lifted_point(self, pid):
        x, y = self._points[pid]
        p = geom.lift_point(geom.Point2(x, y))
        return (p.x, p.y, p.z)
