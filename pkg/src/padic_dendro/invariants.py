"""Dagger-tree, volume, branch weights and balance of a dendrogram."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import sympy

from .classifier import ClusterHierarchy
from .dendrogram import ProjectiveDendrogram


@dataclass(frozen=True)
class DaggerTree:
    """The subtree spanned by the internal vertices; unbounded edges dropped."""

    root: object
    vertices: tuple
    edges: tuple  # (parent, child, length)

    @property
    def volume(self) -> int:
        return sum(n for _, _, n in self.edges)


def _tree(x) -> ProjectiveDendrogram:
    return x.dendrogram if isinstance(x, ClusterHierarchy) else x


def dagger_tree(x) -> DaggerTree:
    tree = _tree(x)
    return DaggerTree(tree.root, tuple(tree.bfs()), tuple(tree.internal_edges()))


def subtree_volume(tree: ProjectiveDendrogram, v) -> int:
    """Total internal edge length below ``v``."""
    total, stack = 0, [v]
    while stack:
        w = stack.pop()
        for kind, tgt, n in tree.children(w):
            if kind == "vertex":
                total += n
                stack.append(tgt)
    return total


def root_of_unity(nu: int, m: int) -> complex:
    """``exp(2 pi i nu / m)``, exact at the quarter turns."""
    nu %= m
    if (4 * nu) % m == 0:
        return (1, 1j, -1, -1j)[(4 * nu) // m]
    return cmath.exp(2j * math.pi * nu / m)


@dataclass(frozen=True)
class BalanceReport:
    volume: int
    branch_weights: tuple
    m: int
    balanced: bool

    @property
    def balance(self) -> complex:
        """``sum_nu w_nu exp(2 pi i nu / m)`` as a float; advisory only."""
        return complex(sum(w * root_of_unity(nu, self.m) for nu, w in enumerate(self.branch_weights)))

    @property
    def binary_balance(self) -> int:
        if self.m != 2:
            raise ValueError("the integer balance w0 - w1 needs exactly two branches")
        return self.branch_weights[0] - self.branch_weights[1]

    def balance_is_zero(self) -> bool:
        """Exact test: the m-th cyclotomic polynomial divides ``sum w_nu x^nu``."""
        x = sympy.Symbol("x")
        poly = sympy.Poly(sum(w * x ** nu for nu, w in enumerate(self.branch_weights)), x)
        if poly.is_zero:
            return True
        return sympy.rem(poly, sympy.Poly(sympy.cyclotomic_poly(self.m, x), x)).is_zero

    def to_json(self):
        b = self.balance
        return {
            "volume": self.volume,
            "weights": list(self.branch_weights),
            "balance": {"re": b.real, "im": b.imag},
            "balanced": self.balanced,
        }


def branch_weights(tree: ProjectiveDendrogram, order=None):
    """Weight of each root branch: its root edge length plus the volume below.

    A datum hanging directly off the root is a branch of weight 0.
    """
    kids = tree.children(tree.root)
    if order is not None:
        kids = [kids[i] for i in order]
    out = []
    for kind, tgt, n in kids:
        out.append(0 if kind == "leaf" else n + subtree_volume(tree, tgt))
    return tuple(out)


def balance_report(x, order=None) -> BalanceReport:
    """Volume, branch weights and balance; ``order`` permutes the root branches."""
    tree = _tree(x)
    weights = branch_weights(tree, order)
    m = len(weights)
    if m < 2:
        raise ValueError("balance needs at least two branches at the root")
    return BalanceReport(
        volume=dagger_tree(tree).volume,
        branch_weights=weights,
        m=m,
        balanced=len(set(weights)) == 1,
    )
