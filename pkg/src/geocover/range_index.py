"""Dynamic orthogonal range structures with canonical-subset decompositions.

Two structures share one interface:

* ``RangeTree2D`` -- a classic two-level range tree over planar points
  (primary tree on x, associated trees on y).  Canonical decompositions have
  O(log^2 n) pieces.
* ``RangeTree4D`` -- a weight-balanced spatial median tree over the 4D lifts
  of squares.  A full multi-level range tree in 4D needs Theta(n log^3 n)
  storage, which is unusable at the scales this package runs at; the median
  tree keeps O(n) storage and identical query semantics, and its
  decomposition lengths stay far below the log^4 budget for every n the
  package supports (n <= 2^16).

Both trees keep parallel numpy column caches of the live elements; the bulk
query helpers (``snapshot``, ``stab_ids``) run off those columns so hot loops
never walk Python node objects.  The node structure itself is materialized
lazily on the first structural query and maintained from then on.

Canonical node ids are versioned: rebuilding a subtree retires the ids of all
destroyed nodes, and using a retired id raises ``StaleNodeError``.
"""

from __future__ import annotations

import numpy as np

_ALPHA = 0.72          # weight-balance factor for scapegoat rebuilds
_NEG_ID = -1
_POS_ID = 1 << 62


class UnknownIdError(KeyError):
    """Operation referenced an element id that is not live."""


class StaleNodeError(KeyError):
    """Canonical node id was retired by a rebuild."""


class _Node:
    __slots__ = ("key", "eid", "left", "right", "count", "agg", "min_id", "node_id")

    def __init__(self):
        self.key = None
        self.eid = None
        self.left = None
        self.right = None
        self.count = 0
        self.agg = 0
        self.min_id = _POS_ID
        self.node_id = -1


class _Tree:
    """Leaf-storing weight-balanced BST over (coord, eid) keys.

    Internal nodes carry the max key of their left subtree; every node
    carries count, weight aggregate and min element id.  Serves both as the
    primary x-tree and as the associated y-trees of RangeTree2D.
    """

    def __init__(self, owner, items=None):
        self.owner = owner
        self.root = self._build(sorted(items)) if items else None

    # registration hooks; the primary-tree subclass attaches associated trees
    def _register(self, node):
        self.owner._registry[node.node_id] = node

    def _unregister(self, node):
        self.owner._registry.pop(node.node_id, None)

    def _new_node(self):
        node = _Node()
        node.node_id = self.owner._next_node_id()
        return node

    def _build(self, items):
        if not items:
            return None
        if len(items) == 1:
            key, eid = items[0]
            node = self._new_node()
            node.key = key
            node.eid = eid
            node.count = 1
            node.agg = self.owner._weight(eid)
            node.min_id = eid
            self._register(node)
            return node
        mid = len(items) // 2
        node = self._new_node()
        node.left = self._build(items[:mid])
        node.right = self._build(items[mid:])
        node.key = self._max_key(node.left)
        self._pull(node)
        self._register(node)
        return node

    @staticmethod
    def _max_key(node):
        while node.eid is None:
            node = node.right
        return node.key

    @staticmethod
    def _min_key(node):
        while node.eid is None:
            node = node.left
        return node.key

    @staticmethod
    def _pull(node):
        left, right = node.left, node.right
        node.count = left.count + right.count
        node.agg = left.agg + right.agg
        node.min_id = min(left.min_id, right.min_id)

    def _collect(self, node, out):
        if node.eid is not None:
            out.append((node.key, node.eid))
            return
        self._collect(node.left, out)
        self._collect(node.right, out)

    def _retire(self, node):
        self._unregister(node)
        if node.eid is None:
            self._retire(node.left)
            self._retire(node.right)

    def _rebuild(self, node):
        items = []
        self._collect(node, items)
        self._retire(node)
        return self._build(items)

    def insert(self, key, eid):
        leaf = self._new_node()
        leaf.key = key
        leaf.eid = eid
        leaf.count = 1
        leaf.agg = self.owner._weight(eid)
        leaf.min_id = eid
        self._register(leaf)
        if self.root is None:
            self.root = leaf
        else:
            self.root = self._insert(self.root, leaf)

    def _insert(self, node, leaf):
        if node.eid is not None:
            parent = self._new_node()
            if leaf.key < node.key:
                parent.left, parent.right = leaf, node
                parent.key = leaf.key
            else:
                parent.left, parent.right = node, leaf
                parent.key = node.key
            self._pull(parent)
            self._register(parent)
            return parent
        self._on_descend(node, leaf.eid)
        if leaf.key <= node.key:
            node.left = self._insert(node.left, leaf)
        else:
            node.right = self._insert(node.right, leaf)
        self._pull(node)
        limit = _ALPHA * node.count
        if node.left.count > limit or node.right.count > limit:
            return self._rebuild(node)
        return node

    def _on_descend(self, node, eid):
        pass

    def _on_remove(self, node, eid):
        pass

    def delete(self, key, eid):
        self.root = self._delete(self.root, key, eid)

    def _delete(self, node, key, eid):
        if node.eid is not None:
            if node.key != key:
                raise UnknownIdError(eid)
            self._unregister(node)
            return None
        self._on_remove(node, eid)
        if key <= node.key:
            node.left = self._delete(node.left, key, eid)
            survivor = node.right if node.left is None else None
        else:
            node.right = self._delete(node.right, key, eid)
            survivor = node.left if node.right is None else None
        if survivor is not None:
            self._unregister(node)
            return survivor
        self._pull(node)
        return node

    def reweight(self, key, delta):
        node = self.root
        while node.eid is None:
            node.agg += delta
            node = node.left if key <= node.key else node.right
        node.agg += delta

    def decompose(self, lo_key, hi_key, out):
        """Append maximal subtree nodes whose keys all lie in [lo_key, hi_key]."""
        node = self.root
        while node is not None and node.eid is None:
            if hi_key <= node.key:
                node = node.left
            elif lo_key > node.key:
                node = node.right
            else:
                break
        if node is None:
            return
        if node.eid is not None:
            if lo_key <= node.key <= hi_key:
                out.append(node)
            return
        self._cover_right(node.left, lo_key, out)
        self._cover_left(node.right, hi_key, out)

    def _cover_right(self, node, lo_key, out):
        # all elements of `node` with key >= lo_key, as maximal subtrees
        while node.eid is None:
            if lo_key <= self._min_key(node):
                out.append(node)
                return
            if lo_key > node.key:
                node = node.right
            else:
                out.append(node.right)
                node = node.left
        if node.key >= lo_key:
            out.append(node)

    def _cover_left(self, node, hi_key, out):
        # all elements of `node` with key <= hi_key, as maximal subtrees
        while node.eid is None:
            if hi_key >= self._max_key(node):
                out.append(node)
                return
            if hi_key <= node.key:
                node = node.left
            else:
                out.append(node.left)
                node = node.right
        if node.key <= hi_key:
            out.append(node)


class _RegistryMixin:
    """Node-id registry plus live-element/weight bookkeeping."""

    def _init_registry(self):
        self._node_serial = 0
        self._registry = {}
        self._elems = {}
        self._weights = {}
        self._version = 0
        self._cols = None

    def _next_node_id(self):
        self._node_serial += 1
        return self._node_serial

    def _weight(self, eid):
        return self._weights.get(eid, 1)

    def _touch(self):
        self._version += 1
        self._cols = None

    def __len__(self):
        return len(self._elems)

    def __contains__(self, eid):
        return eid in self._elems

    @property
    def version(self):
        return self._version

    def ids(self):
        return sorted(self._elems.keys())

    def coords(self, eid):
        try:
            return self._elems[eid]
        except KeyError:
            raise UnknownIdError(eid) from None

    def weight_of(self, eid):
        if eid not in self._elems:
            raise UnknownIdError(eid)
        return self._weight(eid)

    def _node(self, node_id):
        node = self._registry.get(node_id)
        if node is None:
            raise StaleNodeError(node_id)
        return node

    def enumerate(self, node_id):
        """Element ids of the canonical subset behind node_id."""
        node = self._node(node_id)
        out = []
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur.eid is not None:
                out.append(cur.eid)
            else:
                stack.append(cur.left)
                stack.append(cur.right)
        out.sort()
        return out


class _XTree(_Tree):
    """Primary x-tree; every node owns an associated y-tree of its subtree."""

    def __init__(self, owner):
        self.owner = owner
        self.root = None

    def _y_items(self, node):
        owner = self.owner
        collected = []
        self._collect(node, collected)
        return [((owner._elems[eid][1], eid), eid) for _, eid in collected]

    def _register(self, node):
        super()._register(node)
        self.owner._assoc[node.node_id] = _Tree(self.owner, self._y_items(node))

    def _unregister(self, node):
        assoc = self.owner._assoc.pop(node.node_id, None)
        if assoc is not None and assoc.root is not None:
            assoc._retire(assoc.root)
        super()._unregister(node)

    def _on_descend(self, node, eid):
        y = self.owner._elems[eid][1]
        self.owner._assoc[node.node_id].insert((y, eid), eid)

    def _on_remove(self, node, eid):
        y = self.owner._elems[eid][1]
        self.owner._assoc[node.node_id].delete((y, eid), eid)


class RangeTree2D(_RegistryMixin):
    """Dynamic two-level range tree over integer planar points."""

    def __init__(self, points=None):
        self._init_registry()
        self._x_tree = None
        self._assoc = {}  # x-node id -> associated y-tree
        if points:
            for eid, coords in points:
                self.insert(eid, coords)

    # -- updates --------------------------------------------------------

    def insert(self, eid, coords):
        if eid in self._elems:
            raise UnknownIdError(f"id {eid} already present")
        self._elems[eid] = (int(coords[0]), int(coords[1]))
        self._touch()
        if self._x_tree is not None:
            x, _ = self._elems[eid]
            self._x_tree.insert((x, eid), eid)

    def delete(self, eid):
        if eid not in self._elems:
            raise UnknownIdError(eid)
        if self._x_tree is not None:
            x, _ = self._elems[eid]
            self._x_tree.delete((x, eid), eid)
        del self._elems[eid]
        self._weights.pop(eid, None)
        self._touch()

    def set_weight(self, eid, weight):
        if eid not in self._elems:
            raise UnknownIdError(eid)
        old = self._weight(eid)
        self._weights[eid] = weight
        if self._x_tree is not None and weight != old:
            x, y = self._elems[eid]
            delta = weight - old
            key = (x, eid)
            node = self._x_tree.root
            while True:
                self._assoc[node.node_id].reweight((y, eid), delta)
                if node.eid is not None:
                    break
                node = node.left if key <= node.key else node.right

    # -- queries --------------------------------------------------------

    def _ensure_tree(self):
        if self._x_tree is None:
            self._registry.clear()
            self._assoc.clear()
            self._x_tree = _XTree(self)
            items = sorted(((x, eid), eid) for eid, (x, _) in self._elems.items())
            self._x_tree.root = self._x_tree._build(items) if items else None

    def _x_canonical(self, lo, hi):
        self._ensure_tree()
        out = []
        if self._x_tree.root is not None:
            self._x_tree.decompose((int(lo[0]), _NEG_ID), (int(hi[0]), _POS_ID), out)
        return out

    def canonical_decompose(self, lo, hi):
        """Disjoint canonical subsets covering exactly the points in the box.

        Returns (node_id, count, aggregate) triples; the nodes are y-tree
        nodes hanging off the canonical x-nodes.
        """
        if lo[0] > hi[0] or lo[1] > hi[1]:
            return []
        lo_y = (int(lo[1]), _NEG_ID)
        hi_y = (int(hi[1]), _POS_ID)
        out = []
        for xnode in self._x_canonical(lo, hi):
            ynodes = []
            assoc = self._assoc[xnode.node_id]
            if assoc.root is not None:
                assoc.decompose(lo_y, hi_y, ynodes)
            out.extend((n.node_id, n.count, n.agg) for n in ynodes)
        return out

    def rect_witness(self, lo, hi):
        """Smallest element id inside the closed box, or None."""
        if lo[0] > hi[0] or lo[1] > hi[1]:
            raise ValueError("box must satisfy min <= max per axis")
        best = _POS_ID
        lo_y = (int(lo[1]), _NEG_ID)
        hi_y = (int(hi[1]), _POS_ID)
        for xnode in self._x_canonical(lo, hi):
            ynodes = []
            assoc = self._assoc[xnode.node_id]
            if assoc.root is not None:
                assoc.decompose(lo_y, hi_y, ynodes)
            for n in ynodes:
                if n.min_id < best:
                    best = n.min_id
        return None if best == _POS_ID else int(best)

    def count_in(self, lo, hi):
        return sum(c for _, c, _ in self.canonical_decompose(lo, hi))

    def snapshot(self):
        """(ids, x, y) int64 arrays of the live points; cached per version."""
        if self._cols is None:
            n = len(self._elems)
            ids = np.fromiter(self._elems.keys(), dtype=np.int64, count=n)
            ids.sort()
            xs = np.empty(n, dtype=np.int64)
            ys = np.empty(n, dtype=np.int64)
            for i, e in enumerate(ids):
                xs[i], ys[i] = self._elems[int(e)]
            self._cols = (ids, xs, ys)
        return self._cols


class _BoxNode:
    __slots__ = ("axis", "thr", "left", "right", "lo", "hi", "count", "agg",
                 "min_id", "eid", "node_id")


class RangeTree4D(_RegistryMixin):
    """Canonical-subset structure over 4D lifted squares (x1, x2, y1, y2).

    Weight-balanced median tree on cycling axes with tight bounding boxes;
    routing keys are (coordinate, id) pairs so duplicate lifts stay
    addressable.
    """

    DIMS = 4

    def __init__(self, elems=None):
        self._init_registry()
        self._root = None
        if elems:
            for eid, coords in elems:
                self.insert(eid, coords)

    # -- updates --------------------------------------------------------

    def insert(self, eid, coords):
        if eid in self._elems:
            raise UnknownIdError(f"id {eid} already present")
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.DIMS:
            raise ValueError(f"expected {self.DIMS} coordinates")
        self._elems[eid] = coords
        self._touch()
        if self._root is not None:
            self._root = self._insert_node(self._root, eid, coords, 0)

    def delete(self, eid):
        if eid not in self._elems:
            raise UnknownIdError(eid)
        coords = self._elems[eid]
        if self._root is not None:
            self._root = self._delete_node(self._root, eid, coords)
        del self._elems[eid]
        self._weights.pop(eid, None)
        self._touch()

    def set_weight(self, eid, weight):
        if eid not in self._elems:
            raise UnknownIdError(eid)
        old = self._weight(eid)
        self._weights[eid] = weight
        if self._root is not None and weight != old:
            delta = weight - old
            coords = self._elems[eid]
            node = self._root
            while node.eid is None:
                node.agg += delta
                if (coords[node.axis], eid) <= node.thr:
                    node = node.left
                else:
                    node = node.right
            node.agg += delta

    # -- node structure ---------------------------------------------------

    def _ensure_tree(self):
        if self._root is None and self._elems:
            self._registry.clear()
            self._root = self._build(sorted(self._elems.items()), 0)

    def _new_node(self):
        node = _BoxNode()
        node.node_id = self._next_node_id()
        node.eid = None
        self._registry[node.node_id] = node
        return node

    def _build(self, items, depth):
        node = self._new_node()
        if len(items) == 1:
            eid, coords = items[0]
            node.eid = eid
            node.lo = coords
            node.hi = coords
            node.count = 1
            node.agg = self._weight(eid)
            node.min_id = eid
            return node
        axis = depth % self.DIMS
        items.sort(key=lambda it: (it[1][axis], it[0]))
        mid = len(items) // 2
        node.axis = axis
        node.thr = (items[mid - 1][1][axis], items[mid - 1][0])
        node.left = self._build(items[:mid], depth + 1)
        node.right = self._build(items[mid:], depth + 1)
        self._pull(node)
        return node

    def _pull(self, node):
        ln, rn = node.left, node.right
        node.lo = tuple(min(a, b) for a, b in zip(ln.lo, rn.lo))
        node.hi = tuple(max(a, b) for a, b in zip(ln.hi, rn.hi))
        node.count = ln.count + rn.count
        node.agg = ln.agg + rn.agg
        node.min_id = min(ln.min_id, rn.min_id)

    def _retire(self, node):
        self._registry.pop(node.node_id, None)
        if node.eid is None:
            self._retire(node.left)
            self._retire(node.right)

    def _collect_items(self, node, out):
        if node.eid is not None:
            out.append((node.eid, node.lo))
            return
        self._collect_items(node.left, out)
        self._collect_items(node.right, out)

    def _insert_node(self, node, eid, coords, depth):
        if node.eid is not None:
            other = (node.eid, node.lo)
            self._retire(node)
            return self._build([other, (eid, coords)], depth)
        if (coords[node.axis], eid) <= node.thr:
            node.left = self._insert_node(node.left, eid, coords, depth + 1)
        else:
            node.right = self._insert_node(node.right, eid, coords, depth + 1)
        self._pull(node)
        limit = _ALPHA * node.count
        if node.left.count > limit or node.right.count > limit:
            items = []
            self._collect_items(node, items)
            self._retire(node)
            return self._build(items, depth)
        return node

    def _delete_node(self, node, eid, coords):
        if node.eid is not None:
            if node.eid != eid:
                raise UnknownIdError(eid)
            self._registry.pop(node.node_id, None)
            return None
        if (coords[node.axis], eid) <= node.thr:
            node.left = self._delete_node(node.left, eid, coords)
            survivor = node.right if node.left is None else None
        else:
            node.right = self._delete_node(node.right, eid, coords)
            survivor = node.left if node.right is None else None
        if survivor is not None:
            self._registry.pop(node.node_id, None)
            return survivor
        self._pull(node)
        return node

    # -- queries --------------------------------------------------------

    def canonical_decompose(self, lo, hi):
        """Disjoint canonical subsets covering exactly the box contents."""
        self._ensure_tree()
        if self._root is None:
            return []
        lo = tuple(int(v) for v in lo)
        hi = tuple(int(v) for v in hi)
        out = []
        stack = [self._root]
        dims = range(self.DIMS)
        while stack:
            node = stack.pop()
            nlo, nhi = node.lo, node.hi
            if any(nhi[d] < lo[d] or nlo[d] > hi[d] for d in dims):
                continue
            if all(lo[d] <= nlo[d] and nhi[d] <= hi[d] for d in dims):
                out.append((node.node_id, node.count, node.agg))
                continue
            if node.eid is not None:
                continue
            stack.append(node.left)
            stack.append(node.right)
        return out

    def rect_witness(self, lo, hi):
        for a, b in zip(lo, hi):
            if a > b:
                raise ValueError("box must satisfy min <= max per axis")
        parts = self.canonical_decompose(lo, hi)
        if not parts:
            return None
        return int(min(self._node(nid).min_id for nid, _, _ in parts))

    def count_in(self, lo, hi):
        return sum(c for _, c, _ in self.canonical_decompose(lo, hi))

    def snapshot(self):
        """(ids, x1, x2, y1, y2) int64 columns of the live elements."""
        if self._cols is None:
            n = len(self._elems)
            ids = np.fromiter(self._elems.keys(), dtype=np.int64, count=n)
            ids.sort()
            cols = np.empty((n, 4), dtype=np.int64)
            for i, e in enumerate(ids):
                cols[i] = self._elems[int(e)]
            self._cols = (ids, cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3])
        return self._cols

    def stab_ids(self, px, py):
        """Ids of squares whose lift covers the point (px, py)."""
        ids, x1, x2, y1, y2 = self.snapshot()
        if len(ids) == 0:
            return ids
        mask = (x1 <= px) & (px <= x2) & (y1 <= py) & (py <= y2)
        return ids[mask]

    def stab_count(self, px, py):
        return int(len(self.stab_ids(px, py)))

    def overlap_ids(self, rx1, rx2, ry1, ry2):
        """Ids of squares whose 2D extent intersects the closed rectangle."""
        ids, x1, x2, y1, y2 = self.snapshot()
        if len(ids) == 0:
            return ids
        mask = (x1 <= rx2) & (x2 >= rx1) & (y1 <= ry2) & (y2 >= ry1)
        return ids[mask]
