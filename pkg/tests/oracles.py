"""Independent reference computations used to cross-check the library."""

from fractions import Fraction
import random

import networkx as nx
import sympy

from padic_dendro.dendrogram import ProjectiveDendrogram
from padic_dendro.padic_core import PAdicNumber


def digit_valuation(x, y):
    """First exponent where the digit expansions differ, read digit by digit."""
    lo = min(x.v0 if x.digits else x.precision, y.v0 if y.digits else y.precision)
    for n in range(lo, min(x.precision, y.precision)):
        if x.digit(n) != y.digit(n):
            return n
    return None


def threshold_clusters(labels, values):
    """Vertices of the dendrogram as ``{(frozenset of labels, radius exponent)}``.

    Sort all pairwise valuations descending and merge components at each
    threshold with a plain union-find; every merge at level ``m`` yields the
    disc of radius exponent ``m`` around the merged component.
    """
    n = len(values)
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            pairs.append((digit_valuation(values[i], values[j]), i, j))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    out = set()
    for m in sorted({v for v, _, _ in pairs}, reverse=True):
        touched = set()
        for v, i, j in pairs:
            if v == m:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
                touched.add(i)
        roots = {find(i) for i in touched}
        for r in roots:
            members = frozenset(labels[k] for k in range(n) if find(k) == r)
            out.add((members, m))
    return out


def hierarchy_clusters(h):
    tree = h.dendrogram
    return {(frozenset(tree.subtree_data(v)), h.vertex_disc[v].radius_exp) for v in tree.vertices}


def sympy_modulus(p, f):
    """Smallest monic irreducible polynomial, coefficients compared from degree 0 up."""
    x = sympy.Symbol("x")
    best = None
    for code in range(p ** f):
        coeffs = [(code // p ** i) % p for i in range(f)] + [1]
        poly = sympy.Poly(sum(c * x ** i for i, c in enumerate(coeffs)), x, modulus=p)
        if poly.is_irreducible:
            key = tuple(coeffs)
            if best is None or key < best:
                best = key
    return best


def graph_betti(vertices, internal_pairs):
    """``(h0, h1)`` by counting components and non-forest edges of a multigraph."""
    g = nx.MultiGraph()
    g.add_nodes_from(vertices)
    g.add_edges_from(internal_pairs)
    h0 = nx.number_connected_components(g)
    seen, forest_edges = set(), 0
    for start in vertices:
        if start in seen:
            continue
        seen.add(start)
        stack = [start]
        while stack:
            v = stack.pop()
            for w in g.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    forest_edges += 1
                    stack.append(w)
    h1 = len(internal_pairs) - forest_edges
    return h0, h1


def random_dendrogram(rng: random.Random, max_leaves=32, max_arity=2, max_len=8):
    """A stable random dendrogram with integer lengths and leaves ``d0, d1, ...``."""
    n_leaves = rng.randint(2, max_leaves)
    # start from leaves and repeatedly group 2..max_arity subtrees
    items = [("leaf", f"d{i}") for i in range(n_leaves)]
    edges, leaves, counter = [], [], 0
    while len(items) > 1:
        k = rng.randint(2, min(max_arity, len(items)))
        rng.shuffle(items)
        group, items = items[:k], items[k:]
        v = f"u{counter}"
        counter += 1
        for kind, ref in group:
            if kind == "leaf":
                leaves.append((v, ref))
            else:
                edges.append((v, ref, rng.randint(1, max_len)))
        items.append(("vertex", v))
    root = items[0][1]
    return ProjectiveDendrogram.build(root, edges, leaves)


def random_padic(rng, fd, length=10):
    v0 = rng.randint(0, 3)
    digits = [rng.randrange(fd.q) for _ in range(rng.randint(1, length))]
    return PAdicNumber.from_digits(fd, digits, v0=v0)


def baire(s, t, p):
    """``p^-n`` from the longest common prefix, by direct comparison."""
    if s == t:
        return Fraction(0)
    n = 0
    while n < min(len(s), len(t)) and s[n] == t[n]:
        n += 1
    return Fraction(1, p ** n)
