"""Graphs given by flags, and projective dendrograms built on them.

A graph is a set of vertices, a set of flags (half-edges), a boundary map
sending each flag to its vertex and an involution pairing flags.  Pairs are
internal edges, fixed points are unbounded edges.  A projective dendrogram is
a rooted tree of this kind whose root carries the unbounded edge labelled
``INFINITY``; the other unbounded edges are the data.
"""

from __future__ import annotations

import itertools
import json
import re
from collections import deque
from dataclasses import dataclass

from .errors import InvalidInputError

INFINITY = "∞"


@dataclass(frozen=True, eq=False)
class FlagGraph:
    vertices: tuple
    boundary: dict  # flag -> vertex
    inversion: dict  # flag -> flag, an involution

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise InvalidInputError("duplicate vertex ids")
        if set(self.boundary) != set(self.inversion):
            raise InvalidInputError("boundary and inversion must share the flag set")
        for flag, v in self.boundary.items():
            if v not in vs:
                raise InvalidInputError(f"flag {flag} sits on unknown vertex {v!r}")
        for flag, other in self.inversion.items():
            if self.inversion.get(other) != flag:
                raise InvalidInputError(f"inversion is not an involution at flag {flag}")

    @property
    def flags(self):
        return tuple(self.boundary)

    @classmethod
    def from_edges(cls, vertices, internal=(), unbounded=()):
        """Graph with internal edges ``(a, b)`` and unbounded edges at the given vertices.

        Flags are numbered consecutively: two per internal edge, in order,
        then one per unbounded edge.
        """
        boundary, inversion = {}, {}
        counter = itertools.count()
        for a, b in internal:
            fa, fb = next(counter), next(counter)
            boundary[fa], boundary[fb] = a, b
            inversion[fa], inversion[fb] = fb, fa
        for v in unbounded:
            fl = next(counter)
            boundary[fl] = v
            inversion[fl] = fl
        return cls(tuple(vertices), boundary, inversion)


def edges(graph: FlagGraph):
    """Orbits of the inversion: ``(internal, unbounded)``.

    Internal edges are flag pairs ``(f, inv(f))`` with ``f < inv(f)``.
    """
    internal, unbounded = [], []
    for fl in graph.flags:
        other = graph.inversion[fl]
        if other == fl:
            unbounded.append(fl)
        elif fl < other:
            internal.append((fl, other))
    return internal, unbounded


def betti(graph: FlagGraph):
    """``(h0, h1)``: components by union-find, h1 from the Euler formula."""
    parent = {v: v for v in graph.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    internal, _ = edges(graph)
    for fa, fb in internal:
        ra, rb = find(graph.boundary[fa]), find(graph.boundary[fb])
        if ra != rb:
            parent[ra] = rb
    h0 = len({find(v) for v in graph.vertices})
    h1 = h0 - len(graph.vertices) + len(internal)
    return h0, h1


def cycle_rank(graph: FlagGraph):
    """``(h0, h1)`` by traversal: h1 counts edges closing a cycle in a DFS forest.

    Independent of the Euler formula, so it can be used to cross-check
    ``betti``.
    """
    adj = {v: [] for v in graph.vertices}
    internal, _ = edges(graph)
    for idx, (fa, fb) in enumerate(internal):
        a, b = graph.boundary[fa], graph.boundary[fb]
        adj[a].append((b, idx))
        if a != b:
            adj[b].append((a, idx))
    seen, used = set(), set()
    h0 = closing = 0
    for start in graph.vertices:
        if start in seen:
            continue
        h0 += 1
        seen.add(start)
        stack = [start]
        while stack:
            v = stack.pop()
            for w, idx in adj[v]:
                if idx in used:
                    continue
                used.add(idx)
                if w in seen:
                    closing += 1
                else:
                    seen.add(w)
                    stack.append(w)
    return h0, closing


class ProjectiveDendrogram:
    """Rooted labelled tree with an ``INFINITY`` edge at the root and integer edge lengths.

    ``labels`` maps unbounded flags to labels, ``metric`` maps internal edges
    (sorted flag pairs) to lengths, and ``child_order`` maps a vertex to its
    outgoing flags in order.  Missing orders default to ascending smallest
    data label below each child.  Pass ``check=False`` to allow vertices with
    a single child (unstabilised trees).
    """

    def __init__(self, graph, root, labels, metric, child_order=None, *, check=True):
        self.graph = graph
        self.root = root
        self.labels = dict(labels)
        self.metric = {tuple(sorted(k)): v for k, v in metric.items()}
        self._orient()
        self._set_order(child_order or {})
        if check:
            self.validate()

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, root, internal_edges, leaves, child_order=None, *, check=True):
        """From ``(parent, child, length)`` edges and ``(vertex, label)`` leaves.

        ``child_order`` maps a vertex to child references: child vertex ids or
        leaf labels.
        """
        vertices = [root]
        for a, b, _ in internal_edges:
            for v in (a, b):
                if v not in vertices:
                    vertices.append(v)
        for v, _ in leaves:
            if v not in vertices:
                raise InvalidInputError(f"leaf attached to unknown vertex {v!r}")
        graph = FlagGraph.from_edges(
            vertices,
            [(a, b) for a, b, _ in internal_edges],
            [root] + [v for v, _ in leaves],
        )
        internal, unbounded = edges(graph)
        metric = {pair: int(length) for pair, (_, _, length) in zip(internal, internal_edges)}
        labels = {unbounded[0]: INFINITY}
        for fl, (_, label) in zip(unbounded[1:], leaves):
            labels[fl] = label
        tree = cls(graph, root, labels, metric, None, check=False)
        if child_order:
            tree._set_order(tree._resolve_refs(child_order))
        if check:
            tree.validate()
        return tree

    def _orient(self):
        g = self.graph
        at = {v: [] for v in g.vertices}
        for fl, v in g.boundary.items():
            at[v].append(fl)
        self._flags_at = at
        self._target = {}
        self._parent = {self.root: None}
        self._out_unordered = {v: [] for v in g.vertices}
        inf_flags = [fl for fl, lab in self.labels.items() if lab == INFINITY]
        if len(inf_flags) != 1:
            raise InvalidInputError("exactly one unbounded edge must be labelled infinity")
        self._inf_flag = inf_flags[0]
        if g.boundary[self._inf_flag] != self.root:
            raise InvalidInputError("the infinity edge must sit at the root")
        queue = deque([self.root])
        while queue:
            v = queue.popleft()
            for fl in at[v]:
                other = g.inversion[fl]
                if fl == self._inf_flag:
                    continue
                if other == fl:
                    if fl not in self.labels:
                        raise InvalidInputError(f"unbounded flag {fl} has no label")
                    self._target[fl] = ("leaf", self.labels[fl])
                    self._out_unordered[v].append(fl)
                    continue
                w = g.boundary[other]
                if self._parent.get(v) is not None and self._parent[v][1] == other:
                    continue
                if w in self._parent:
                    raise InvalidInputError("underlying graph is not a tree")
                self._parent[w] = (v, fl)
                self._target[fl] = ("vertex", w)
                self._out_unordered[v].append(fl)
                queue.append(w)
        if len(self._parent) != len(g.vertices):
            raise InvalidInputError("underlying graph is not connected")

    def _set_order(self, order):
        self._below = {}
        for v in self._postorder():
            data = set()
            for fl in self._out_unordered[v]:
                kind, tgt = self._target[fl]
                data |= {tgt} if kind == "leaf" else self._below[tgt]
            self._below[v] = frozenset(data)

        def key(fl):
            kind, tgt = self._target[fl]
            labels = [tgt] if kind == "leaf" else self._below[tgt]
            return min(str(x) for x in labels) if labels else ""

        self.child_order = {}
        for v in self.graph.vertices:
            default = sorted(self._out_unordered[v], key=key)
            given = order.get(v)
            if given is not None:
                given = tuple(given)
                if sorted(given) != sorted(default):
                    raise InvalidInputError(f"child order at {v!r} is not a permutation of its children")
                self.child_order[v] = given
            else:
                self.child_order[v] = tuple(default)

    def _resolve_refs(self, child_order):
        out = {}
        for v, refs in child_order.items():
            if v not in self._out_unordered:
                raise InvalidInputError(f"child order given for unknown vertex {v!r}")
            by_ref = {}
            for fl in self._out_unordered[v]:
                ref = self._target[fl][1]
                if ref in by_ref:
                    raise InvalidInputError(f"ambiguous child reference {ref!r} at {v!r}")
                by_ref[ref] = fl
            try:
                out[v] = tuple(by_ref[r] for r in refs)
            except KeyError as exc:
                raise InvalidInputError(f"{exc.args[0]!r} is not a child of {v!r}") from None
        return out

    def _postorder(self):
        order, stack = [], [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            for fl in self._out_unordered[v]:
                kind, tgt = self._target[fl]
                if kind == "vertex":
                    stack.append(tgt)
        return order[::-1]

    def validate(self, stable=True):
        h0, h1 = betti(self.graph)
        if (h0, h1) != (1, 0):
            raise InvalidInputError(f"not a tree: h0={h0}, h1={h1}")
        for pair, length in self.metric.items():
            if not isinstance(length, int) or length < 1:
                raise InvalidInputError(f"edge length must be a positive integer, got {length!r}")
        internal, _ = edges(self.graph)
        if set(internal) != set(self.metric):
            raise InvalidInputError("metric must be defined on exactly the internal edges")
        data = self.data
        if len(set(map(str, data))) != len(data):
            raise InvalidInputError("data labels must be distinct")
        if stable:
            for v in self.graph.vertices:
                if len(self._out_unordered[v]) < 2:
                    raise InvalidInputError(f"vertex {v!r} originates in fewer than two edges")

    # -- queries -----------------------------------------------------------

    @property
    def vertices(self):
        return self.graph.vertices

    @property
    def data(self):
        return [lab for fl, lab in self.labels.items() if fl != self._inf_flag]

    def children(self, v):
        """Outgoing edges of ``v`` in order, as ``(kind, target, length)``.

        ``kind`` is ``"vertex"`` (target a vertex id, length an int) or
        ``"leaf"`` (target a data label, length None).
        """
        out = []
        for fl in self.child_order[v]:
            kind, tgt = self._target[fl]
            length = None
            if kind == "vertex":
                length = self.metric[tuple(sorted((fl, self.graph.inversion[fl])))]
            out.append((kind, tgt, length))
        return out

    def child_vertices(self, v):
        return [t for k, t, _ in self.children(v) if k == "vertex"]

    def parent(self, v):
        entry = self._parent[v]
        return None if entry is None else entry[0]

    def edge_length(self, child):
        """Length of the edge from ``child`` to its parent."""
        _, fl = self._parent[child]
        return self.metric[tuple(sorted((fl, self.graph.inversion[fl])))]

    def internal_edges(self):
        """``(parent, child, length)`` in breadth-first child order."""
        out = []
        for v in self.bfs():
            for kind, tgt, length in self.children(v):
                if kind == "vertex":
                    out.append((v, tgt, length))
        return out

    def leaves(self):
        """``(vertex, label)`` for every datum, in data order."""
        out = []
        for v in self.bfs():
            out += [(v, t) for k, t, _ in self.children(v) if k == "leaf"]
        rank = {lab: i for i, lab in enumerate(self.order_data())}
        return sorted(out, key=lambda item: rank[item[1]])

    def leaf_vertex(self, label):
        for fl, lab in self.labels.items():
            if lab == label and fl != self._inf_flag:
                return self.graph.boundary[fl]
        raise KeyError(label)

    def bfs(self):
        out, queue = [], deque([self.root])
        while queue:
            v = queue.popleft()
            out.append(v)
            queue.extend(self.child_vertices(v))
        return out

    def subtree_data(self, v):
        return self._below[v]

    def level_map(self):
        """Distance from the root along internal edges."""
        levels = {self.root: 0}
        for v in self.bfs():
            for kind, tgt, length in self.children(v):
                if kind == "vertex":
                    levels[tgt] = levels[v] + length
        return levels

    def order_data(self):
        """Data in lexicographic order of their root paths under the child orders."""
        out, stack = [], [("vertex", self.root)]
        while stack:
            kind, tgt = stack.pop()
            if kind == "leaf":
                out.append(tgt)
                continue
            for k, t, _ in reversed(self.children(tgt)):
                stack.append((k, t))
        return out

    def is_binary(self):
        return all(len(self.child_order[v]) == 2 for v in self.vertices)

    def max_children(self):
        return max(len(self.child_order[v]) for v in self.vertices)

    def canonical_form(self, v=None):
        """Hashable form equal for isometric isomorphic labelled rooted trees."""
        v = self.root if v is None else v
        items = []
        for kind, tgt, length in self.children(v):
            if kind == "leaf":
                items.append(("L", str(tgt)))
            else:
                items.append(("V", length, self.canonical_form(tgt)))
        return tuple(sorted(items))

    def stabilize(self):
        """Suppress vertices with a single child, adding up edge lengths."""
        keep = [v for v in self.bfs() if v == self.root or len(self.child_order[v]) != 1]
        keep_set = set(keep)
        new_edges, new_leaves, order = [], [], {}

        def descend(kind, tgt, length):
            while kind == "vertex" and tgt not in keep_set:
                (k2, t2, l2), = self.children(tgt)
                if k2 == "vertex":
                    length += l2
                kind, tgt = k2, t2
            return kind, tgt, length

        for v in keep:
            refs = []
            for kind, tgt, length in self.children(v):
                kind, tgt, length = descend(kind, tgt, length)
                if kind == "vertex":
                    new_edges.append((v, tgt, length))
                else:
                    new_leaves.append((v, tgt))
                refs.append(tgt)
            order[v] = refs
        return ProjectiveDendrogram.build(self.root, new_edges, new_leaves, order)

    def relabel_vertices(self, mapping):
        edges_ = [(mapping[a], mapping[b], n) for a, b, n in self.internal_edges()]
        leaves_ = [(mapping[v], lab) for v, lab in self.leaves()]
        order = {
            mapping[v]: [mapping[t] if k == "vertex" else t for k, t, _ in self.children(v)]
            for v in self.vertices
        }
        return ProjectiveDendrogram.build(mapping[self.root], edges_, leaves_, order, check=False)

    # -- serialisation -----------------------------------------------------

    def to_json(self):
        return {
            "vertices": list(self.bfs()),
            "root": self.root,
            "internal_edges": [{"a": a, "b": b, "len": n} for a, b, n in self.internal_edges()],
            "leaves": [{"vertex": v, "label": lab} for v, lab in self.leaves()],
            "infinity_at": self.root,
            "child_order": [
                {"vertex": v, "children": [t for _, t, _ in self.children(v)]}
                for v in self.bfs()
            ],
        }

    @classmethod
    def from_json(cls, obj, *, check=True):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            root = obj["root"]
            if obj.get("infinity_at", root) != root:
                raise InvalidInputError("infinity edge must be attached at the root")
            edges_ = [(e["a"], e["b"], e["len"]) for e in obj["internal_edges"]]
            leaves_ = [(leaf["vertex"], leaf["label"]) for leaf in obj["leaves"]]
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed dendrogram JSON: {exc}") from None
        order = None
        if "child_order" in obj:
            order = {entry["vertex"]: entry["children"] for entry in obj["child_order"]}
        tree = cls.build(root, edges_, leaves_, order, check=check)
        listed = obj.get("vertices")
        if listed is not None and set(listed) != set(tree.vertices):
            raise InvalidInputError("vertex list does not match the edges")
        return tree

    def to_dot(self, name="dendrogram"):
        """Undirected DOT graph; internal edges carry ``len``."""
        lines = [f"graph {name} {{"]
        q = _dot_quote
        lines.append(f"  {q('inf')} [label={q(INFINITY)}, shape=plaintext];")
        for v in self.bfs():
            lines.append(f"  {q('v:' + str(v))} [label={q(str(v))}, shape=point];")
        lines.append(f"  {q('inf')} -- {q('v:' + str(self.root))};")
        for a, b, n in self.internal_edges():
            lines.append(f"  {q('v:' + str(a))} -- {q('v:' + str(b))} [len={n}];")
        for v, lab in self.leaves():
            node = q("leaf:" + str(lab))
            lines.append(f"  {node} [label={q(str(lab))}, shape=plaintext];")
            lines.append(f"  {q('v:' + str(v))} -- {node};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_newick(self):
        """Newick string; the infinity edge is dropped and the root is the outer node."""

        def node(v):
            parts = []
            for kind, tgt, length in self.children(v):
                if kind == "leaf":
                    parts.append(_newick_quote(str(tgt)))
                else:
                    parts.append(f"{node(tgt)}:{length}")
            return "(" + ",".join(parts) + ")" + _newick_quote(str(v))

        return node(self.root) + ";"

    @classmethod
    def from_newick(cls, text):
        """Inverse of ``to_newick``: internal nodes must be named, leaves carry no length."""
        pos = 0
        text = text.strip()
        edges_, leaves_, order = [], [], {}

        def name():
            nonlocal pos
            if pos < len(text) and text[pos] == "'":
                end = pos + 1
                buf = []
                while True:
                    if text[end] == "'":
                        if end + 1 < len(text) and text[end + 1] == "'":
                            buf.append("'")
                            end += 2
                            continue
                        break
                    buf.append(text[end])
                    end += 1
                pos = end + 1
                return "".join(buf)
            m = re.compile(r"[^(),:;']*").match(text, pos)
            pos = m.end()
            return m.group(0)

        def length():
            nonlocal pos
            if pos < len(text) and text[pos] == ":":
                m = re.compile(r":(\d+)").match(text, pos)
                if not m:
                    raise InvalidInputError(f"bad branch length at offset {pos}")
                pos = m.end()
                return int(m.group(1))
            return None

        def subtree():
            nonlocal pos
            if text[pos] != "(":
                return ("leaf", name())
            pos += 1
            kids = [subtree_with_len()]
            while text[pos] == ",":
                pos += 1
                kids.append(subtree_with_len())
            if text[pos] != ")":
                raise InvalidInputError(f"expected ')' at offset {pos}")
            pos += 1
            vid = name()
            refs = []
            for (kind, tgt), n in kids:
                if kind == "leaf":
                    leaves_.append((vid, tgt))
                else:
                    if n is None:
                        raise InvalidInputError("internal branch without length")
                    edges_.append((vid, tgt, n))
                refs.append(tgt)
            order[vid] = refs
            return ("vertex", vid)

        def subtree_with_len():
            node = subtree()
            return node, length()

        try:
            kind, root = subtree()
        except IndexError:
            raise InvalidInputError("truncated Newick string") from None
        if text[pos:] != ";":
            raise InvalidInputError("Newick string must end with ';'")
        return cls.build(root, edges_, leaves_, order)


def _dot_quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _newick_quote(s):
    if s and not re.search(r"[\s(),:;'\[\]]", s):
        return s
    return "'" + s.replace("'", "''") + "'"


def level_map(tree: ProjectiveDendrogram):
    return tree.level_map()


def order_data(tree: ProjectiveDendrogram):
    return tree.order_data()
