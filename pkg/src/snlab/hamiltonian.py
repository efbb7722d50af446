"""Vertex and plaquette operators, the string-net Hamiltonian, and exact
ground spaces.

The plaquette operator B_p^s lays an s-string around the face of brick p
and absorbs it into the six ring edges.  Its matrix elements factor into
four fragment reductions from :mod:`snlab.diagram` (bottom, top, and the
two vertical-edge pairs), glued by shared junction multiplicities, times
one completeness weight sqrt(d_i' / (d_i d_s)) per horizontal ring edge.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from snlab.diagram import frag_bottom, frag_left, frag_right, frag_top
from snlab.lattice import Region, StringNetBasis, enumerate_basis

_HERMITICITY_TOL = 1e-10
_GROUND_TOL = 1e-9
_RANK_TOL = 1e-8
_MAGIC = b"SNST"


class OperatorError(RuntimeError):
    pass


def vertex_projector(lattice, basis: StringNetBasis, vidx: int) -> sp.csr_matrix:
    """Q_I enforcing the branching rule; the identity on an enumerated basis."""
    n = basis.dim
    return sp.identity(n, dtype=complex, format="csr")


def plaquette_operator(cat, lattice, basis: StringNetBasis, p: int, s: int) -> sp.csr_matrix:
    """Assemble B_p^s on the enumerated basis.

    Rows are grouped by their local signature on the brick (ring labels,
    leg labels, vertex multiplicities); the diagrammatic reduction runs
    once per distinct signature.
    """
    brick = lattice.plaquettes[p]
    live_legs = {e for e in brick.legs if e is not None}
    # legs may coincide with each other on small tori (they are read-only
    # spectators), but the six rewritten ring edges must be distinct and
    # disjoint from the legs
    if len(set(brick.ring)) != 6 or set(brick.ring) & live_legs:
        raise OperatorError(
            f"plaquette {p} touches itself (degenerate wrap); operators need Lx, Ly >= 2"
        )
    if not set(brick.verts) <= basis.vertex_set:
        raise OperatorError(f"plaquette {p} is not contained in the basis vertex set")
    n = basis.dim
    if s == 0:
        return sp.identity(n, dtype=complex, format="csr")

    vcols = np.array([basis.vpos[v] for v in brick.verts])
    ecols = np.array([basis.evar_pos[e] for e in brick.ring])
    legcols = np.array(
        [basis.evar_pos[e] if e is not None else -1 for e in brick.legs]
    )
    leglabs = np.where(
        legcols[None, :] >= 0, basis.labels[:, np.maximum(legcols, 0)], 0
    ).astype(np.uint8)
    sigs = np.concatenate(
        [basis.labels[:, ecols], leglabs, basis.mults[:, vcols]], axis=1
    )
    uniq, inverse = np.unique(sigs, axis=0, return_inverse=True)

    rows, cols, vals = [], [], []
    row_groups = [np.where(inverse == u)[0] for u in range(uniq.shape[0])]
    for u, sig in enumerate(uniq):
        targets = _signature_targets(cat, s, sig)
        if not targets:
            continue
        group = row_groups[u]
        for (ring_p, mults_p), coeff in targets.items():
            for i in group:
                lab2 = basis.labels[i].copy()
                lab2[ecols] = ring_p
                mul2 = basis.mults[i].copy()
                mul2[vcols] = mults_p
                j = basis.index(lab2, mul2)
                if j is None:
                    continue
                rows.append(j)
                cols.append(i)
                vals.append(coeff)
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)
    return A.tocsr()


def _signature_targets(cat, s, sig) -> dict:
    """Target (ring labels, vertex mults) -> amplitude for one signature.

    The signature packs (h1, h2, lL, lR, t1, t2), the six leg labels
    (g_bl, u_b, g_br, g_tl, u_t, g_tr) and the six vertex multiplicities
    (bl, bm, br, tl, tm, tr).
    """
    cache = getattr(cat, "_sig_cache", None)
    if cache is None:
        cache = {}
        cat._sig_cache = cache
    key = (s, bytes(sig))
    hit = cache.get(key)
    if hit is not None:
        return hit
    h1, h2, lL, lR, t1, t2 = (int(x) for x in sig[:6])
    g_bl, u_b, g_br, g_tl, u_t, g_tr = (int(x) for x in sig[6:12])
    m_bl, m_bm, m_br, m_tl, m_tm, m_tr = (int(x) for x in sig[12:18])
    sb = cat.bar(s)
    ds = cat.d(s)
    out: dict[tuple, complex] = {}
    for h1p in cat.fusion_outcomes(h1, s):
        for g_h1 in range(cat.n(h1, s, h1p)):
            for t1p in cat.fusion_outcomes(sb, t1):
                for g_t1 in range(cat.n(sb, t1, t1p)):
                    L = frag_left(
                        cat, s, g_bl, g_tl, h1, lL, t1, h1p, t1p, m_bl, m_tl, g_h1, g_t1
                    )
                    if not L:
                        continue
                    for h2p in cat.fusion_outcomes(h2, s):
                        for g_h2 in range(cat.n(h2, s, h2p)):
                            Bv = frag_bottom(cat, s, u_b, h1, h2, h1p, h2p, m_bm, g_h1, g_h2)
                            if not np.any(np.abs(Bv) > 1e-14):
                                continue
                            for t2p in cat.fusion_outcomes(sb, t2):
                                for g_t2 in range(cat.n(sb, t2, t2p)):
                                    Tv = frag_top(cat, s, t1p, t2p, t1, t2, u_t, m_tm, g_t1, g_t2)
                                    if not np.any(np.abs(Tv) > 1e-14):
                                        continue
                                    R = frag_right(
                                        cat, s, h2p, t2p, h2, t2, g_br, lR, g_tr,
                                        m_br, m_tr, g_h2, g_t2,
                                    )
                                    if not R:
                                        continue
                                    pref = np.sqrt(
                                        cat.d(h1p) * cat.d(h2p) * cat.d(t1p) * cat.d(t2p)
                                        / (cat.d(h1) * cat.d(h2) * cat.d(t1) * cat.d(t2))
                                    ) / ds**2
                                    for (lLp, a_bl, a_tl), cL in L.items():
                                        for (lRp, a_br, a_tr), cR in R.items():
                                            ring_p = (h1p, h2p, lLp, lRp, t1p, t2p)
                                            for a_bm, cB in enumerate(Bv):
                                                if abs(cB) < 1e-14:
                                                    continue
                                                for a_tm, cT in enumerate(Tv):
                                                    if abs(cT) < 1e-14:
                                                        continue
                                                    mults_p = (a_bl, a_bm, a_br, a_tl, a_tm, a_tr)
                                                    tgt = (ring_p, mults_p)
                                                    out[tgt] = out.get(tgt, 0.0) + pref * cL * cB * cR * cT
    cache[key] = out
    return out


def plaquette_projector(cat, lattice, basis, p: int, ops: dict | None = None) -> sp.csr_matrix:
    """Hermitian projector B_p = D^-2 sum_s d_s B_p^s."""
    n = basis.dim
    out = sp.csr_matrix((n, n), dtype=complex)
    for s in range(cat.rank):
        bps = ops[s] if ops is not None else plaquette_operator(cat, lattice, basis, p, s)
        out = out + (cat.d(s) / cat.total_dim**2) * bps
    return out.tocsr()


def all_plaquette_projectors(cat, lattice, basis) -> list:
    return [plaquette_projector(cat, lattice, basis, p) for p in range(len(lattice.plaquettes))]


def build_hamiltonian(cat, lattice, basis) -> sp.csr_matrix:
    """H = -sum_I Q_I - sum_p B_p on the stable-labeling basis."""
    n = basis.dim
    H = sp.csr_matrix((n, n), dtype=complex)
    nv = len(basis.vertex_list)
    H = H - nv * sp.identity(n, dtype=complex, format="csr")
    for p in range(len(lattice.plaquettes)):
        H = H - plaquette_projector(cat, lattice, basis, p)
    return H.tocsr()


def ground_space(cat, lattice, basis, method: str = "projector-product", seed: int = 0,
                 projectors: list | None = None, tol: float = _GROUND_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the common +1 eigenspace of all Q_I and B_p."""
    n = basis.dim
    if projectors is None:
        projectors = all_plaquette_projectors(cat, lattice, basis)
    if method == "projector-product":
        rng = np.random.default_rng(seed)
        k = min(n, 8)
        while True:
            X = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
            for B in projectors:
                X = B @ X
            u, sv, _ = np.linalg.svd(X, full_matrices=False)
            rank = int(np.sum(sv > _RANK_TOL * (sv[0] if len(sv) else 1.0)))
            if rank < k or k == n:
                vecs = [u[:, j] for j in range(rank)]
                break
            k = min(n, 2 * k)
        # one clean re-projection pass
        Y = np.stack(vecs, axis=1) if vecs else np.zeros((n, 0))
        for B in projectors:
            Y = B @ Y
        if Y.shape[1]:
            q, r = np.linalg.qr(Y)
            keep = np.abs(np.diag(r)) > _RANK_TOL
            vecs = [q[:, j] for j in range(Y.shape[1]) if keep[j]]
    elif method == "sparse-eigensolve":
        H = build_hamiltonian(cat, lattice, basis)
        target = -(len(basis.vertex_list) + len(lattice.plaquettes))
        if n < 400:
            w, v = np.linalg.eigh(H.toarray())
        else:
            k = min(n - 2, 16)
            w, v = spla.eigsh(H, k=k, which="SA")
        sel = np.where(np.abs(w - target) < 1e-8 * max(1, abs(target)))[0]
        vecs = [v[:, j] for j in sel]
    else:
        raise ValueError(f"unknown method {method!r}")

    for v in vecs:
        for B in projectors:
            resid = np.linalg.norm(B @ v - v)
            if resid > tol:
                raise OperatorError(f"ground-space residual {resid:.3e} exceeds {tol:.1e}")
    return vecs


def verify_plaquette_algebra(cat, lattice, basis, p: int, tol: float = 1e-9) -> dict:
    """Check B_p^s B_p^t = sum_u N_st^u B_p^u and (B_p^s)^dag = B_p^{sbar}."""
    ops = {s: plaquette_operator(cat, lattice, basis, p, s) for s in range(cat.rank)}
    worst_fusion = 0.0
    for s in range(cat.rank):
        for t in range(cat.rank):
            lhs = ops[s] @ ops[t]
            rhs = sp.csr_matrix(lhs.shape, dtype=complex)
            for u in range(cat.rank):
                nst = cat.n(s, t, u)
                if nst:
                    rhs = rhs + nst * ops[u]
            diff = (lhs - rhs).toarray() if lhs.shape[0] < 3000 else None
            resid = (
                float(np.max(np.abs(diff)))
                if diff is not None
                else float(spla.norm(lhs - rhs, np.inf))
            )
            worst_fusion = max(worst_fusion, resid)
    worst_adj = 0.0
    for s in range(cat.rank):
        d = ops[s].getH() - ops[cat.bar(s)]
        resid = float(np.max(np.abs(d.toarray()))) if d.shape[0] < 3000 else float(spla.norm(d, np.inf))
        worst_adj = max(worst_adj, resid)
    Bp = plaquette_projector(cat, lattice, basis, p, ops=ops)
    herm = float(np.max(np.abs((Bp - Bp.getH()).toarray()))) if Bp.shape[0] < 3000 else float(spla.norm(Bp - Bp.getH(), np.inf))
    idem = (
        float(np.max(np.abs((Bp @ Bp - Bp).toarray())))
        if Bp.shape[0] < 3000
        else float(spla.norm(Bp @ Bp - Bp, np.inf))
    )
    return {
        "fusion_algebra": worst_fusion,
        "adjoint": worst_adj,
        "hermitian": herm,
        "idempotent": idem,
        "pass": max(worst_fusion, worst_adj) < tol and max(herm, idem) < _HERMITICITY_TOL,
        "ops": ops,
    }


# ---------------------------------------------------------------------------
# LTQO


def restricted_ground_projector(cat, lattice, region: Region) -> tuple:
    """Ground projector of the Hamiltonian terms strictly inside a region.

    Returns (region_basis, P) with P a dense matrix on the region's
    stable-labeling space.
    """
    rb = enumerate_basis(cat, lattice, region.vertices)
    P = np.eye(rb.dim, dtype=complex)
    for p, brick in enumerate(lattice.plaquettes):
        if set(brick.verts) <= region.vertices:
            B = plaquette_projector(cat, lattice, rb, p)
            P = B.toarray() @ P
    return rb, P


def check_ltqo(cat, lattice, plaquette: int, ell: int = 1, samples: int = 20, seed: int = 0,
               tol: float = 1e-9) -> dict:
    """Probe P_{A(ell)} O_A P_{A(ell)} = c(O_A) P_{A(ell)} with random O_A."""
    A = lattice.plaquette_region(plaquette, "A")
    Aell = lattice.ball(set(A.vertices), ell, "A(ell)")
    rb, P = restricted_ground_projector(cat, lattice, Aell)
    keysA = rb.restriction_keys(A.vertices)
    # keys of the complement factor inside A(ell)
    rest = Aell.vertices - A.vertices
    keysR = rb.restriction_keys(rest) if rest else np.zeros(rb.dim, dtype=int)
    kA = int(keysA.max()) + 1
    rng = np.random.default_rng(seed)
    trP = float(np.trace(P).real)
    results = []
    same_rest = keysR[:, None] == keysR[None, :]
    for _ in range(samples):
        G = rng.normal(size=(kA, kA)) + 1j * rng.normal(size=(kA, kA))
        O = (G + G.conj().T) / 2.0
        M = O[keysA[:, None], keysA[None, :]] * same_rest
        c = np.trace(P @ M) / trP
        resid = float(np.max(np.abs(P @ M @ P - c * P)))
        results.append({"c": complex(c), "residual": resid})
    worst = max(r["residual"] for r in results)
    return {
        "region": sorted(A.vertices),
        "thickened": sorted(Aell.vertices),
        "dim": rb.dim,
        "rank_P": int(round(trP)),
        "samples": samples,
        "max_residual": worst,
        "pass": worst < tol,
        "whole_lattice": len(Aell.vertices) == lattice.n_vertices,
    }


# ---------------------------------------------------------------------------
# state and operator files


def basis_hash(basis: StringNetBasis) -> bytes:
    h = hashlib.sha256()
    h.update(np.asarray(basis.edge_vars, dtype=np.int64).tobytes())
    h.update(basis.labels.tobytes())
    h.update(basis.mults.tobytes())
    return h.digest()[:16]


def save_state(path: str, basis: StringNetBasis, vec: np.ndarray) -> None:
    """Binary layout: magic, basis hash, dim, little-endian complex doubles."""
    vec = np.asarray(vec, dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(basis_hash(basis))
        fh.write(struct.pack("<q", vec.shape[0]))
        fh.write(vec.astype("<c16").tobytes())


def load_state(path: str, basis: StringNetBasis) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise OperatorError(f"bad state file magic {magic!r}")
        hsh = fh.read(16)
        if hsh != basis_hash(basis):
            raise OperatorError("state file was written for a different basis")
        (dim,) = struct.unpack("<q", fh.read(8))
        data = np.frombuffer(fh.read(16 * dim), dtype="<c16")
    if data.shape[0] != dim or dim != basis.dim:
        raise OperatorError("truncated state file")
    return np.array(data)


def export_state_json(path: str, basis: StringNetBasis, vec: np.ndarray, limit: int = 4096) -> None:
    if basis.dim > limit:
        raise OperatorError(f"dimension {basis.dim} too large for JSON export")
    doc = {
        "dim": basis.dim,
        "amplitudes": [[float(v.real), float(v.imag)] for v in vec],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def export_operator_csv(path: str, op: sp.spmatrix) -> None:
    coo = op.tocoo()
    with open(path, "w") as fh:
        fh.write("row,col,re,im\n")
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            fh.write(f"{coo.row[k]},{coo.col[k]},{coo.data[k].real:.17g},{coo.data[k].imag:.17g}\n")


def load_operator_csv(path: str) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    with open(path) as fh:
        next(fh)
        for line in fh:
            r, c, re, im = line.strip().split(",")
            rows.append(int(r))
            cols.append(int(c))
            vals.append(complex(float(re), float(im)))
    n = max(max(rows), max(cols)) + 1 if rows else 0
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
