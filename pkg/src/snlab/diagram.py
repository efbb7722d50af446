"""Planar diagram engine on fusion trees.

Diagrams are vectors in splitting spaces Hom(r, x_1 (x) ... (x) x_n),
expanded over basis trees.  A basis tree records a full bracketing
(``shape``), the labels of internal edges, and a multiplicity index per
trivalent vertex.  Vertices carry the normalization (d_a d_b / d_c)^(1/4),
so a closed loop evaluates to d_a and a bubble collapses to
sqrt(d_a d_b / d_c).

Most operations require the canonical left-associated shape, where a tree
is the chain ``v_1 = x_1, v_k = fuse(v_{k-1}, x_k)`` ending at the root.
``f_move`` re-brackets between shapes and ``canonicalize`` drives any
vector back to the chain form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from snlab.category import FusionCategory

_PRUNE = 1e-14


def left_shape(n: int):
    """Fully left-associated bracketing of n leaves: (((0,1),2),3)..."""
    if n == 0:
        return None
    shape = 0
    for k in range(1, n):
        shape = (shape, k)
    return shape


def _internal_nodes(shape, acc=None):
    """Postorder list of internal nodes (each node is its nested tuple)."""
    if acc is None:
        acc = []
    if isinstance(shape, tuple):
        _internal_nodes(shape[0], acc)
        _internal_nodes(shape[1], acc)
        acc.append(shape)
    return acc


def _span(node):
    if isinstance(node, int):
        return frozenset((node,))
    return _span(node[0]) | _span(node[1])


@dataclass(frozen=True)
class FusionTree:
    """One basis diagram of Hom(root, leaves[0] (x) ... (x) leaves[-1]).

    ``inner`` and ``mults`` list the internal-node labels and vertex
    multiplicities in postorder; the top node comes last and its label
    always equals ``root``.
    """

    root: int
    leaves: tuple
    shape: object
    inner: tuple
    mults: tuple

    def node_label(self, node) -> int:
        if isinstance(node, int):
            return self.leaves[node]
        return self.inner[_internal_nodes(self.shape).index(node)]

    def is_canonical(self) -> bool:
        return self.shape == left_shape(len(self.leaves))

    def chain(self) -> tuple:
        """Fused prefixes (v_1 .. v_n) for canonical trees; v_n == root."""
        if not self.is_canonical():
            raise ValueError("chain view requires the left-associated shape")
        if not self.leaves:
            return ()
        return (self.leaves[0],) + self.inner

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Tree(r={self.root}, x={self.leaves}, v={self.inner}, m={self.mults})"


def canonical_tree(root, leaves, inner, mults=None) -> FusionTree:
    leaves = tuple(leaves)
    inner = tuple(inner)
    if mults is None:
        mults = (0,) * len(inner)
    return FusionTree(root, leaves, left_shape(len(leaves)), inner, tuple(mults))


def leaf_tree(label: int) -> FusionTree:
    """The identity strand: Hom(label, (label,))."""
    return FusionTree(label, (label,), 0, (), ())


class TreeVector:
    """Sparse complex linear combination of fusion trees."""

    def __init__(self, cat: FusionCategory, amps: dict | None = None):
        self.cat = cat
        self.amps: dict[FusionTree, complex] = {}
        if amps:
            for t, a in amps.items():
                if abs(a) > _PRUNE:
                    self.amps[t] = complex(a)

    @classmethod
    def unit(cls, cat, tree: FusionTree) -> "TreeVector":
        return cls(cat, {tree: 1.0})

    def __add__(self, other: "TreeVector") -> "TreeVector":
        out = dict(self.amps)
        for t, a in other.amps.items():
            out[t] = out.get(t, 0.0) + a
        return TreeVector(self.cat, out)

    def __mul__(self, scalar) -> "TreeVector":
        return TreeVector(self.cat, {t: a * scalar for t, a in self.amps.items()})

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + other * (-1.0)

    def norm(self) -> float:
        return abs(inner_product(self, self)) ** 0.5

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        terms = ", ".join(f"{a:.4g}*{t}" for t, a in list(self.amps.items())[:4])
        more = "" if len(self.amps) <= 4 else f" (+{len(self.amps) - 4})"
        return f"TreeVector[{terms}{more}]"


def tree_norm_sq(cat: FusionCategory, tree: FusionTree) -> float:
    """Gram norm of a basis tree: product of bubble factors over vertices."""
    out = 1.0
    for node in _internal_nodes(tree.shape):
        a = tree.node_label(node[0])
        b = tree.node_label(node[1])
        c = tree.node_label(node)
        out *= np.sqrt(cat.d(a) * cat.d(b) / cat.d(c))
    return float(out)


def inner_product(v1: TreeVector, v2: TreeVector) -> complex:
    """Gram inner product; basis trees are orthogonal with known norms."""
    tot = 0.0 + 0.0j
    small, big = (v1, v2) if len(v1.amps) <= len(v2.amps) else (v2, v1)
    for t, a in small.amps.items():
        b = big.amps.get(t)
        if b is None:
            continue
        a1 = v1.amps[t]
        a2 = v2.amps[t]
        tot += np.conj(a1) * a2 * tree_norm_sq(v1.cat, t)
    return complex(tot)


# ---------------------------------------------------------------------------
# F-moves on general shapes


def _rebracket(tree: FusionTree, old_node, new_node, new_assign):
    """Rebuild a tree after a single re-bracketing at one node.

    ``new_assign`` maps leaf-spans to (label, mult) for the nodes that the
    move creates or relabels; every other internal node keeps its data,
    matched by leaf-span.
    """
    def sub(shape):
        if shape == old_node:
            return new_node
        if isinstance(shape, int):
            return shape
        return (sub(shape[0]), sub(shape[1]))

    new_shape = sub(tree.shape)
    old_nodes = _internal_nodes(tree.shape)
    by_span = {_span(n): (tree.inner[i], tree.mults[i]) for i, n in enumerate(old_nodes)}
    by_span.update(new_assign)
    inner, mults = [], []
    for n in _internal_nodes(new_shape):
        lab, mu = by_span[_span(n)]
        inner.append(lab)
        mults.append(mu)
    return FusionTree(tree.root, tree.leaves, new_shape, tuple(inner), tuple(mults))


def f_move(v: TreeVector, node_index: int, direction: str = "LR") -> TreeVector:
    """Re-bracket at one internal node (postorder index).

    "LR" rewrites ((A B) C) at the node into (A (B C)); "RL" is the inverse.
    Applying one then the other returns the input within round-off.
    """
    cat = v.cat
    out: dict[FusionTree, complex] = {}
    for tree, amp in v.amps.items():
        nodes = _internal_nodes(tree.shape)
        if node_index >= len(nodes):
            raise ValueError(f"no internal node {node_index} in shape {tree.shape}")
        node = nodes[node_index]
        if direction == "LR":
            if not isinstance(node[0], tuple):
                raise ValueError(f"node {node} does not match ((A B) C)")
            asub, bsub = node[0]
            csub = node[1]
            a, b, c = (tree.node_label(s) for s in (asub, bsub, csub))
            d = tree.node_label(node)
            e = tree.node_label(node[0])
            mu = tree.mults[nodes.index(node[0])]
            nu = tree.mults[node_index]
            blk = cat.f_block(a, b, c, d)
            ri = blk.row_pos(e, mu, nu)
            new_node = (asub, (bsub, csub))
            for ci, (f, al, be) in enumerate(blk.cols):
                coeff = blk.matrix[ri, ci]
                if abs(coeff) < _PRUNE:
                    continue
                nt = _rebracket(
                    tree, node, new_node,
                    {_span((bsub, csub)): (f, al), _span(node): (d, be)},
                )
                out[nt] = out.get(nt, 0.0) + amp * coeff
        elif direction == "RL":
            if not isinstance(node[1], tuple):
                raise ValueError(f"node {node} does not match (A (B C))")
            asub = node[0]
            bsub, csub = node[1]
            a, b, c = (tree.node_label(s) for s in (asub, bsub, csub))
            d = tree.node_label(node)
            f = tree.node_label(node[1])
            al = tree.mults[nodes.index(node[1])]
            be = tree.mults[node_index]
            blk = cat.f_block(a, b, c, d)
            ci = blk.col_pos(f, al, be)
            new_node = ((asub, bsub), csub)
            for ri, (e, mu, nu) in enumerate(blk.rows):
                coeff = np.conj(blk.matrix[ri, ci])
                if abs(coeff) < _PRUNE:
                    continue
                nt = _rebracket(
                    tree, node, new_node,
                    {_span((asub, bsub)): (e, mu), _span(node): (d, nu)},
                )
                out[nt] = out.get(nt, 0.0) + amp * coeff
        else:
            raise ValueError("direction must be 'LR' or 'RL'")
    return TreeVector(cat, out)


def canonicalize(v: TreeVector) -> TreeVector:
    """Rewrite every component into the left-associated shape."""
    done: dict[FusionTree, complex] = {}
    work = v
    while work.amps:
        target = None
        for t in work.amps:
            if not t.is_canonical():
                target = t
                break
        if target is None:
            for t, a in work.amps.items():
                done[t] = done.get(t, 0.0) + a
            break
        nodes = _internal_nodes(target.shape)
        idx = next(i for i, n in enumerate(nodes) if isinstance(n[1], tuple))
        same = TreeVector(work.cat, {t: a for t, a in work.amps.items() if t.shape == target.shape})
        rest = TreeVector(work.cat, {t: a for t, a in work.amps.items() if t.shape != target.shape})
        work = rest + f_move(same, idx, "RL")
    return TreeVector(v.cat, done)


# ---------------------------------------------------------------------------
# canonical-shape operations
#
# Chain bookkeeping (1-indexed math, 0-indexed arrays): v_1 = x_1 and
# v_j = inner[j-2] for j >= 2, with v_n = root.  The vertex joining
# (v_{j-1}, x_j) -> v_j carries mults[j-2].


def fuse_adjacent(v: TreeVector, k: int, channel: int, mult: int = 0) -> TreeVector:
    """Compose a fusion vertex on leaves k, k+1 (1-indexed), fixed channel."""
    cat = v.cat
    out: dict[FusionTree, complex] = {}
    for tree, amp in v.amps.items():
        x = tree.leaves
        n = len(x)
        if not 1 <= k <= n - 1:
            raise ValueError(f"no adjacent pair at position {k}")
        a, b = x[k - 1], x[k]
        if cat.n(a, b, channel) <= mult:
            continue
        bubble = np.sqrt(cat.d(a) * cat.d(b) / cat.d(channel))
        new_leaves = x[: k - 1] + (channel,) + x[k + 1 :]
        inner, mults = tree.inner, tree.mults
        if k == 1:
            if inner[0] != channel or mults[0] != mult:
                continue
            nt = canonical_tree(tree.root, new_leaves, inner[1:], mults[1:])
            out[nt] = out.get(nt, 0.0) + amp * bubble
        else:
            ch = tree.chain()
            blk = cat.f_block(ch[k - 2], a, b, ch[k])
            ri = blk.row_pos(ch[k - 1], mults[k - 2], mults[k - 1])
            for ci, (f, al, be) in enumerate(blk.cols):
                if f != channel or al != mult:
                    continue
                coeff = blk.matrix[ri, ci]
                if abs(coeff) < _PRUNE:
                    continue
                new_inner = inner[: k - 2] + inner[k - 1 :]
                nm = mults[: k - 2] + (be,) + mults[k:]
                nt = canonical_tree(tree.root, new_leaves, new_inner, nm)
                out[nt] = out.get(nt, 0.0) + amp * coeff * bubble
    return TreeVector(cat, out)


def split_leaf(v: TreeVector, k: int, a: int, b: int, gamma: int = 0) -> TreeVector:
    """Compose a splitting vertex on leaf k (1-indexed): x_k -> (a, b)."""
    cat = v.cat
    out: dict[FusionTree, complex] = {}
    for tree, amp in v.amps.items():
        x = tree.leaves
        n = len(x)
        if not 1 <= k <= n:
            raise ValueError(f"no leaf at position {k}")
        if cat.n(a, b, x[k - 1]) <= gamma:
            continue
        new_leaves = x[: k - 1] + (a, b) + x[k:]
        inner, mults = tree.inner, tree.mults
        if k == 1:
            nt = canonical_tree(tree.root, new_leaves, (x[0],) + inner, (gamma,) + mults)
            out[nt] = out.get(nt, 0.0) + amp
        else:
            ch = tree.chain()
            blk = cat.f_block(ch[k - 2], a, b, ch[k - 1])
            ci = blk.col_pos(x[k - 1], gamma, mults[k - 2])
            for ri, (vp, mup, nup) in enumerate(blk.rows):
                coeff = np.conj(blk.matrix[ri, ci])
                if abs(coeff) < _PRUNE:
                    continue
                new_inner = inner[: k - 2] + (vp,) + inner[k - 2 :]
                nm = mults[: k - 2] + (mup, nup) + mults[k - 1 :]
                nt = canonical_tree(tree.root, new_leaves, new_inner, nm)
                out[nt] = out.get(nt, 0.0) + amp * coeff
    return TreeVector(cat, out)


def insert_cup(v: TreeVector, pos: int, a: int) -> TreeVector:
    """Insert a created pair (a, abar) after leaf ``pos`` (0 = leftmost)."""
    cat = v.cat
    abar = cat.bar(a)
    out: dict[FusionTree, complex] = {}
    for tree, amp in v.amps.items():
        x = tree.leaves
        n = len(x)
        if not 0 <= pos <= n:
            raise ValueError(f"bad cup position {pos}")
        new_leaves = x[:pos] + (a, abar) + x[pos:]
        inner, mults = tree.inner, tree.mults
        if pos == 0:
            if n == 0:
                nt = canonical_tree(tree.root, (a, abar), (0,), (0,))
            else:
                nt = canonical_tree(
                    tree.root, new_leaves, (0, x[0]) + inner, (0, 0) + mults
                )
            out[nt] = out.get(nt, 0.0) + amp
        else:
            ch = tree.chain()
            vp = ch[pos - 1]
            blk = cat.f_block(vp, a, abar, vp)
            ci = blk.col_pos(0, 0, 0)
            for ri, (t, mu, nu) in enumerate(blk.rows):
                coeff = np.conj(blk.matrix[ri, ci])
                if abs(coeff) < _PRUNE:
                    continue
                new_inner = inner[: pos - 1] + (t, vp) + inner[pos - 1 :]
                nm = mults[: pos - 1] + (mu, nu) + mults[pos - 1 :]
                nt = canonical_tree(tree.root, new_leaves, new_inner, nm)
                out[nt] = out.get(nt, 0.0) + amp * coeff
    return TreeVector(cat, out)


def remove_vacuum_leaf(v: TreeVector, k: int) -> TreeVector:
    """Delete leaf k, which must carry the vacuum label."""
    out: dict[FusionTree, complex] = {}
    for tree, amp in v.amps.items():
        x = tree.leaves
        if x[k - 1] != 0:
            raise ValueError(f"leaf {k} carries {x[k - 1]}, not the vacuum")
        new_leaves = x[: k - 1] + x[k:]
        inner, mults = tree.inner, tree.mults
        if k == 1:
            nt = canonical_tree(tree.root, new_leaves, inner[1:], mults[1:])
        else:
            new_inner = inner[: k - 2] + inner[k - 1 :]
            nm = mults[: k - 2] + mults[k - 1 :]
            nt = canonical_tree(tree.root, new_leaves, new_inner, nm)
        out[nt] = out.get(nt, 0.0) + amp
    return TreeVector(v.cat, out)


def cap_adjacent(v: TreeVector, k: int) -> TreeVector:
    """Annihilate the adjacent pair (x_k, x_{k+1}) into the vacuum."""
    return remove_vacuum_leaf(fuse_adjacent(v, k, 0, 0), k)


def pop_bubble(v: TreeVector, k: int) -> TreeVector:
    """Remove an (s, sbar) bubble at leaves (k, k+1); factor d_s included."""
    for tree in v.amps:
        a, b = tree.leaves[k - 1], tree.leaves[k]
        if v.cat.bar(a) != b:
            raise ValueError(f"leaves {k},{k+1} carry ({a},{b}), not a bubble")
        break
    return cap_adjacent(v, k)


def bend(v: TreeVector, direction: str) -> TreeVector:
    """Bend the rightmost leaf down into the root, or raise the root.

    Down absorbs the last leaf: Hom(r, (Y, a)) -> Hom(v_{n-1}, Y), with a
    Frobenius-Schur sign for the bent label.  Up appends the dual of the
    root as a new rightmost leaf, re-rooting at the vacuum.  Bending down
    and back up multiplies by kappa_a (the zig-zag move).
    """
    cat = v.cat
    out: dict[FusionTree, complex] = {}
    if direction == "down":
        for tree, amp in v.amps.items():
            n = len(tree.leaves)
            if n < 2:
                raise ValueError("bend down needs at least two leaves")
            if any(m != 0 for m in tree.mults[-1:]) and cat.n(tree.chain()[n - 2], tree.leaves[-1], tree.root) > 1:
                raise ValueError("bend down is only defined for multiplicity-free top links")
            a = tree.leaves[-1]
            newroot = tree.chain()[n - 2]
            nt = canonical_tree(newroot, tree.leaves[:-1], tree.inner[:-1], tree.mults[:-1])
            out[nt] = out.get(nt, 0.0) + amp * cat.fs[a]
    elif direction == "up":
        for tree, amp in v.amps.items():
            r = tree.root
            rb = cat.bar(r)
            n = len(tree.leaves)
            if n == 0:
                raise ValueError("bend up needs at least one leaf")
            nt = canonical_tree(0, tree.leaves + (rb,), tree.inner + (0,), tree.mults + (0,))
            out[nt] = out.get(nt, 0.0) + amp
    else:
        raise ValueError("direction must be 'down' or 'up'")
    return TreeVector(cat, out)


def fuse_pair(v: TreeVector, k: int) -> dict:
    """Resolution of identity on adjacent leaves (k, k+1).

    Returns {(channel, mult): component}, where each component carries the
    completeness weight sqrt(d_c / (d_a d_b)).  Splitting every component
    back and summing reproduces the input.
    """
    cat = v.cat
    pieces: dict[tuple, TreeVector] = {}
    labels = {(t.leaves[k - 1], t.leaves[k]) for t in v.amps}
    for a, b in labels:
        sub = TreeVector(
            cat,
            {t: x for t, x in v.amps.items() if (t.leaves[k - 1], t.leaves[k]) == (a, b)},
        )
        for c in cat.fusion_outcomes(a, b):
            w = np.sqrt(cat.d(c) / (cat.d(a) * cat.d(b)))
            for mu in range(cat.n(a, b, c)):
                piece = fuse_adjacent(sub, k, c, mu) * w
                if piece.amps:
                    key = (c, mu)
                    pieces[key] = pieces.get(key, TreeVector(cat)) + piece
    return pieces


def unfuse_pair(pieces: dict, k: int, a: int, b: int) -> TreeVector:
    """Inverse of fuse_pair: re-split every channel component and sum."""
    total = None
    for (c, mu), vec in pieces.items():
        back = split_leaf(vec, k, a, b, mu)
        total = back if total is None else total + back
    return total


def vacuum_collapse(v: TreeVector) -> TreeVector:
    """Drop components of a two-strand vacuum-rooted vector that cannot
    close up: a closed subdiagram with open strands (a, b) vanishes unless
    b is the dual of a."""
    out = {}
    for tree, amp in v.amps.items():
        if tree.root != 0 or len(tree.leaves) != 2:
            raise ValueError("vacuum_collapse expects Hom(1, a (x) b) vectors")
        a, b = tree.leaves
        if v.cat.bar(a) == b:
            out[tree] = out.get(tree, 0.0) + amp
    return TreeVector(v.cat, out)


def expand_in_family(cat, target: TreeVector, family: dict) -> dict:
    """Coefficients of ``target`` in the linear span of ``family``.

    Both sides are expanded over canonical basis trees and solved by least
    squares; membership must be exact (residual below 1e-9 relative).
    """
    basis_trees: dict[FusionTree, int] = {}
    for vec in family.values():
        for t in vec.amps:
            basis_trees.setdefault(t, len(basis_trees))
    for t in target.amps:
        basis_trees.setdefault(t, len(basis_trees))
    nb = len(basis_trees)
    keys = list(family.keys())
    A = np.zeros((nb, len(keys)), dtype=complex)
    for j, key in enumerate(keys):
        for t, a in family[key].amps.items():
            A[basis_trees[t], j] = a
    y = np.zeros(nb, dtype=complex)
    for t, a in target.amps.items():
        y[basis_trees[t]] = a
    w = np.sqrt([tree_norm_sq(cat, t) for t in basis_trees])
    Aw = A * w[:, None]
    yw = y * w
    coef, *_ = np.linalg.lstsq(Aw, yw, rcond=None)
    resid = float(np.linalg.norm(Aw @ coef - yw))
    if resid > 1e-9 * max(1.0, float(np.linalg.norm(yw))):
        raise ValueError(f"target does not lie in the family span (residual {resid:.3e})")
    return {k: complex(c) for k, c in zip(keys, coef)}


# ---------------------------------------------------------------------------
# plaquette fragments
#
# A brick of the honeycomb reduces in four fragments once the string is
# laid around the face: the bottom-middle and top-middle vertices act
# alone, while each vertical edge pairs its two end vertices with the
# string opening (left) or closing (right).  Every fragment is the
# expansion of the decorated diagram over bare-vertex diagrams in a small
# splitting space; the string junction multiplicities (gamma) are shared
# between neighboring fragments and summed in the operator assembly.


def _frag_cache(cat) -> dict:
    cache = getattr(cat, "_frag_cache", None)
    if cache is None:
        cache = {}
        cat._frag_cache = cache
    return cache


def frag_bottom(cat, s, u_b, h1, h2, h1p, h2p, alpha, g1, g2):
    """Bottom-middle vertex: b-coefficients over the target multiplicity."""
    cache = _frag_cache(cat)
    key = ("bm", s, u_b, h1, h2, h1p, h2p, alpha, g1, g2)
    hit = cache.get(key)
    if hit is not None:
        return hit
    base = TreeVector.unit(cat, leaf_tree(h2p))
    t = split_leaf(base, 1, h2, s, g2)
    t = split_leaf(t, 1, u_b, h1, alpha)
    t = fuse_adjacent(t, 2, h1p, g1)
    out = np.zeros(cat.n(u_b, h1p, h2p), dtype=complex)
    for tree, amp in t.amps.items():
        if tree.leaves == (u_b, h1p):
            out[tree.mults[0]] = np.conj(amp)  # built in the adjoint frame
    cache[key] = out
    return out


def frag_top(cat, s, t1p, t2p, t1, t2, u_t, alpha, g1, g2):
    """Top-middle vertex: b-coefficients over the target multiplicity."""
    cache = _frag_cache(cat)
    key = ("tm", s, t1p, t2p, t1, t2, u_t, alpha, g1, g2)
    hit = cache.get(key)
    if hit is not None:
        return hit
    sb = cat.bar(s)
    base = TreeVector.unit(cat, leaf_tree(t1p))
    t = split_leaf(base, 1, sb, t1, g1)
    t = split_leaf(t, 2, t2, u_t, alpha)
    t = fuse_adjacent(t, 1, t2p, g2)
    out = np.zeros(cat.n(t2p, u_t, t1p), dtype=complex)
    for tree, amp in t.amps.items():
        if tree.leaves == (t2p, u_t):
            out[tree.mults[0]] = amp
    cache[key] = out
    return out


def frag_left(cat, s, g_bl, g_tl, h1, ell, t1, h1p, t1p, a_bl, a_tl, g1, g2):
    """Left pair (bl + tl + string opening): {(ell', a_bl', a_tl'): coeff}."""
    cache = _frag_cache(cat)
    key = ("L", s, g_bl, g_tl, h1, ell, t1, h1p, t1p, a_bl, a_tl, g1, g2)
    hit = cache.get(key)
    if hit is not None:
        return hit
    base = TreeVector.unit(cat, leaf_tree(g_bl))
    dec = split_leaf(base, 1, h1, ell, a_bl)
    dec = insert_cup(dec, 2, g_tl)
    dec = fuse_adjacent(dec, 2, t1, a_tl)
    dec = insert_cup(dec, 1, s)
    dec = fuse_adjacent(dec, 1, h1p, g1)
    dec = fuse_adjacent(dec, 2, t1p, g2)
    if not dec.amps:
        cache[key] = {}
        return {}
    family = _bare_left_family(cat, g_bl, g_tl, h1p, t1p)
    coefs = expand_in_family(cat, dec, family)
    out = {k: v for k, v in coefs.items() if abs(v) > _PRUNE}
    cache[key] = out
    return out


def frag_right(cat, s, h2p, t2p, h2, t2, g_br, ellr, g_tr, a_br, a_tr, g1, g2):
    """Right pair (br + tr + string closing): {(ellr', a_br', a_tr'): coeff}."""
    cache = _frag_cache(cat)
    key = ("R", s, h2p, t2p, h2, t2, g_br, ellr, g_tr, a_br, a_tr, g1, g2)
    hit = cache.get(key)
    if hit is not None:
        return hit
    sb = cat.bar(s)
    base = TreeVector.unit(cat, leaf_tree(h2p))
    dec = insert_cup(base, 1, t2p)
    dec = split_leaf(dec, 1, h2, s, g1)
    dec = split_leaf(dec, 3, sb, t2, g2)
    dec = cap_adjacent(dec, 2)
    dec = split_leaf(dec, 1, g_br, ellr, a_br)
    dec = fuse_adjacent(dec, 2, g_tr, a_tr)
    if not dec.amps:
        cache[key] = {}
        return {}
    family = _bare_right_family(cat, h2p, t2p, g_br, g_tr)
    coefs = expand_in_family(cat, dec, family)
    out = {k: v for k, v in coefs.items() if abs(v) > _PRUNE}
    cache[key] = out
    return out


def _bare_left_family(cat, g_bl, g_tl, h1p, t1p):
    family = {}
    base = TreeVector.unit(cat, leaf_tree(g_bl))
    for ellp in range(cat.rank):
        for a1 in range(cat.n(h1p, ellp, g_bl)):
            stem = split_leaf(base, 1, h1p, ellp, a1)
            stem = insert_cup(stem, 2, g_tl)
            for a2 in range(cat.n(ellp, g_tl, t1p)):
                vec = fuse_adjacent(stem, 2, t1p, a2)
                if vec.amps:
                    family[(ellp, a1, a2)] = vec
    return family


def _bare_right_family(cat, h2p, t2p, g_br, g_tr):
    family = {}
    base = TreeVector.unit(cat, leaf_tree(h2p))
    stem0 = insert_cup(base, 1, t2p)
    for ellp in range(cat.rank):
        for a1 in range(cat.n(g_br, ellp, h2p)):
            stem = split_leaf(stem0, 1, g_br, ellp, a1)
            for a2 in range(cat.n(ellp, t2p, g_tr)):
                vec = fuse_adjacent(stem, 2, g_tr, a2)
                if vec.amps:
                    family[(ellp, a1, a2)] = vec
    return family


def plaquette_coeffs(cat, s, vertex_kind, labels):
    """Reduction coefficients for one plaquette vertex.

    ``vertex_kind`` follows the brick layout: 1 bottom-left, 2 bottom-middle,
    3 bottom-right, 4 top-right, 5 top-middle, 6 top-left.  Kinds 2 and 5
    reduce alone and return a coefficient vector over the new vertex
    multiplicity.  Kinds 1/6 and 3/4 share the string opening (closing)
    with their vertical-edge neighbor and return the joint table keyed by
    (vertical-label', lower-mult', upper-mult').
    """
    if vertex_kind == 2:
        return frag_bottom(cat, s, *labels)
    if vertex_kind == 5:
        return frag_top(cat, s, *labels)
    if vertex_kind in (1, 6):
        return frag_left(cat, s, *labels)
    if vertex_kind in (3, 4):
        return frag_right(cat, s, *labels)
    raise ValueError(f"vertex_kind must be 1..6, got {vertex_kind}")
