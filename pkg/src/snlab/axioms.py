"""Entanglement-bootstrap diagnostics on computed string-net states.

Covers the two entropic axioms (disk decoupling and annulus conditional
independence), the strict area-law fit, and the sector structure of
information convex sets obtained from restricted ground projectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from snlab.hamiltonian import restricted_ground_projector
from snlab.lattice import LatticeError, Region, make_axiom_partition
from snlab.qinfo import region_entropy


@dataclass
class AxiomRecord:
    kind: str
    anchor: int
    value: float
    passed: bool


@dataclass
class AxiomReport:
    tolerance: float
    records: list[AxiomRecord] = field(default_factory=list)

    @property
    def max_value(self) -> float:
        return max((abs(r.value) for r in self.records), default=0.0)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.records)

    def to_json(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "max_value": self.max_value,
            "pass": self.ok,
            "records": [
                {"kind": r.kind, "anchor": r.anchor, "value": r.value, "pass": r.passed}
                for r in self.records
            ],
        }


def axiom_value(basis, psi, partition) -> float:
    """The entropic combination of one axiom placement.

    A0: S(BC) + S(C) - S(B).  A1: S(BC) + S(CD) - S(B) - S(D).
    """
    regs = partition.regions
    B, C = regs["B"], regs["C"]
    s_b = region_entropy(basis, psi, B)
    s_bc = region_entropy(basis, psi, B | C)
    if "D" not in regs:
        s_c = region_entropy(basis, psi, C)
        return s_bc + s_c - s_b
    D = regs["D"]
    s_cd = region_entropy(basis, psi, C | D)
    s_d = region_entropy(basis, psi, D)
    return s_bc + s_cd - s_b - s_d


def verify_axioms(basis, psi, lattice, width: int = 1, tol: float = 1e-8,
                  kinds: tuple = ("A0", "A1")) -> AxiomReport:
    """Evaluate both axioms on every valid placement at the given width."""
    suffix = "bulk" if lattice.topology == "torus" else "boundary"
    report = AxiomReport(tol)
    placed = 0
    for kind in kinds:
        for anchor in range(len(lattice.plaquettes)):
            try:
                part = make_axiom_partition(lattice, f"{kind}-{suffix}", anchor, width)
            except LatticeError:
                continue
            val = axiom_value(basis, psi, part)
            report.records.append(AxiomRecord(kind, anchor, float(val), abs(val) < tol))
            placed += 1
    if placed == 0:
        raise LatticeError("no valid axiom placement on this lattice")
    return report


# ---------------------------------------------------------------------------
# area law


def boundary_size(lattice, region) -> int:
    """Number of lattice edges crossed by the region boundary."""
    verts = region.vertices if hasattr(region, "vertices") else frozenset(region)
    count = 0
    for e in lattice.edges:
        if (e.tail in verts) != (e.head in verts):
            count += 1
    return count


def default_disks(lattice) -> list[Region]:
    """A family of small plaquette disks with at least two boundary sizes."""
    disks = [lattice.plaquette_region(0, "disk1")]
    # two adjacent plaquettes: pick the neighbor sharing a vertical edge
    p0 = lattice.plaquettes[0]
    for q in range(1, len(lattice.plaquettes)):
        shared = set(p0.verts) & set(lattice.plaquettes[q].verts)
        if shared:
            disks.append(
                Region(frozenset(p0.verts) | frozenset(lattice.plaquettes[q].verts), "disk2")
            )
            break
    return disks


def area_law_fit(basis, psi, lattice, disks: list | None = None) -> dict:
    """Least-squares fit of S(X) = alpha |dX| - gamma over disk regions."""
    if disks is None:
        disks = default_disks(lattice)
    if len(disks) < 2:
        raise ValueError("need at least two disk sizes")
    sizes = np.array([boundary_size(lattice, r) for r in disks], dtype=float)
    if len(set(sizes)) < 2:
        raise ValueError("disks must realize at least two boundary sizes")
    ents = np.array([region_entropy(basis, psi, r) for r in disks])
    A = np.stack([sizes, -np.ones_like(sizes)], axis=1)
    (alpha, gamma), *_ = np.linalg.lstsq(A, ents, rcond=None)
    resid = float(np.max(np.abs(A @ np.array([alpha, gamma]) - ents)))
    return {
        "alpha": float(alpha),
        "gamma": float(gamma),
        "residual": resid,
        "sizes": sizes.tolist(),
        "entropies": ents.tolist(),
    }


# ---------------------------------------------------------------------------
# information convex sectors


@dataclass
class SectorBlock:
    rank: int
    entropy: float
    weight: float


@dataclass
class SectorDecomposition:
    region: list
    thickening: int
    blocks: list[SectorBlock]
    stable: bool
    vacuum_block: int | None = None

    @property
    def count(self) -> int:
        return len(self.blocks)

    def to_json(self) -> dict:
        return {
            "sector_count": self.count,
            "thickening": self.thickening,
            "stable": self.stable,
            "vacuum_block": self.vacuum_block,
            "blocks": [
                {"rank": b.rank, "entropy": b.entropy, "weight": b.weight}
                for b in self.blocks
            ],
        }


def _region_ground_family(cat, lattice, omega_plus, seed=0, cap=800):
    """Orthonormal spanning family of zero-energy states on a region."""
    import scipy.sparse as sp

    from snlab.hamiltonian import plaquette_projector
    from snlab.lattice import enumerate_basis

    rb = enumerate_basis(cat, lattice, omega_plus.vertices)
    projs = [
        plaquette_projector(cat, lattice, rb, p)
        for p, brick in enumerate(lattice.plaquettes)
        if set(brick.verts) <= omega_plus.vertices
    ]
    n = rb.dim
    rng = np.random.default_rng(seed)
    k = min(n, 64)
    while True:
        X = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
        for B in projs:
            X = B @ X
        u, sv, _ = np.linalg.svd(X, full_matrices=False)
        rank = int(np.sum(sv > 1e-8 * (sv[0] if len(sv) else 1.0)))
        if rank < k or k >= n:
            break
        if 2 * k > cap:
            raise RuntimeError(
                f"restricted ground space exceeds {cap} states; "
                "the thickening leaves the region under-constrained"
            )
        k = min(n, 2 * k)
    G = u[:, :rank]
    for B in projs:
        G = B @ G
    q, r = np.linalg.qr(G)
    keep = np.abs(np.diag(r)) > 1e-10
    return rb, q[:, keep]


def _sector_projectors(cat, lattice, region_verts, thickening, seed=0):
    """Orthogonal sector blocks of the reduced restricted-ground states.

    All density matrices are handled inside the joint column space of the
    ground-family reductions (rank is tiny at desk scale), so nothing
    dense of region-pattern size is ever materialized.
    """
    import scipy.sparse as sp

    omega_plus = lattice.ball(set(region_verts), thickening)
    rb, ground = _region_ground_family(cat, lattice, omega_plus, seed)
    k = ground.shape[1]
    if k == 0:
        raise RuntimeError("restricted Hamiltonian has no zero-energy state")
    keys_r = rb.restriction_keys(frozenset(region_verts))
    keys_c = rb.restriction_keys(rb.vertex_set - frozenset(region_verts))
    nr, nc = int(keys_r.max()) + 1, int(keys_c.max()) + 1

    Ys = [
        sp.coo_matrix((ground[:, a], (keys_r, keys_c)), shape=(nr, nc)).tocsr()
        for a in range(k)
    ]
    Q = _joint_column_space(Ys, nr, seed)
    r = Q.shape[1]
    QYs = [np.asarray((Y.getH() @ Q.conj()).conj().T) for Y in Ys]  # r x nc each

    def reduce_vecs(M):
        """Reduced state of the M-weighted ground mixture, in Q coordinates."""
        ww, vv = np.linalg.eigh(M)
        rho = np.zeros((r, r), dtype=complex)
        for p_i, col in zip(ww, vv.T):
            if abs(p_i) < 1e-14:
                continue
            Z = np.tensordot(col, QYs, axes=(0, 0))
            rho += p_i * (Z @ Z.conj().T)
        return rho

    rng = np.random.default_rng(seed)

    def rand_herm():
        G = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        H = (G + G.conj().T) / 2.0
        w, v = np.linalg.eigh(H)
        w = w - w.min() + 0.1
        return (v * (w / w.sum())) @ v.conj().T

    rho_avg = reduce_vecs(np.eye(k) / k)
    ws, vs = np.linalg.eigh(rho_avg)
    supp = vs[:, ws > 1e-12]
    m = supp.shape[1]
    nsamp = 6
    samples = [supp.conj().T @ reduce_vecs(rand_herm()) @ supp for _ in range(nsamp)]
    avg_s = supp.conj().T @ rho_avg @ supp

    # Every element of the convex set is a mixture sum_i c_i rho_i over the
    # fixed orthogonal sector states, so eigenvectors of a generic element
    # cluster by their weight profile (<v|rho_k|v> / <v|X|v>) across samples.
    eps = rng.normal(size=nsamp)
    X = avg_s + 0.2 * sum(e * S for e, S in zip(eps, samples)) / nsamp
    X = (X + X.conj().T) / 2.0
    wx, vx = np.linalg.eigh(X)
    profiles = np.zeros((m, nsamp))
    for j in range(m):
        v = vx[:, j]
        denom = float(np.real(v.conj() @ avg_s @ v))
        for s_i, S in enumerate(samples):
            profiles[j, s_i] = float(np.real(v.conj() @ S @ v)) / max(denom, 1e-30)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        parent[find(i)] = find(j)

    for i in range(m):
        for j in range(i + 1, m):
            if np.max(np.abs(profiles[i] - profiles[j])) < 1e-6:
                union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    projs = []
    for members in groups.values():
        block = supp @ vx[:, members]
        projs.append(block @ block.conj().T)
    # cross-check: the linear span of the samples must match the count
    span = np.stack([S.reshape(-1) for S in samples + [avg_s]])
    span_rank = int(np.linalg.matrix_rank(span, tol=1e-8))
    if span_rank != len(projs):
        raise RuntimeError(
            f"sector clustering found {len(projs)} blocks but the reduction "
            f"span has dimension {span_rank}; placement is ill-conditioned"
        )
    projs.sort(key=lambda P_: -float(np.trace(P_ @ rho_avg).real))
    return rb, omega_plus, rho_avg, projs, (keys_r, keys_c), Q


def _joint_column_space(Ys, nr, seed, tol=1e-9):
    """Orthonormal basis of the joint column space of sparse matrices."""
    rng = np.random.default_rng(seed + 101)
    k = len(Ys)
    m = 16
    while True:
        probes = []
        for Y in Ys:
            R = rng.normal(size=(Y.shape[1], m)) + 1j * rng.normal(size=(Y.shape[1], m))
            probes.append(np.asarray(Y @ R))
        Z = np.concatenate(probes, axis=1)
        q, rr = np.linalg.qr(Z)
        keep = np.abs(np.diag(rr)) > tol * max(1.0, float(np.abs(rr).max()))
        Q = q[:, keep]
        # completeness check with fresh probes
        ok = True
        for Y in Ys:
            R = rng.normal(size=(Y.shape[1], 4))
            Z2 = np.asarray(Y @ R)
            resid = np.linalg.norm(Z2 - Q @ (Q.conj().T @ Z2))
            if resid > 1e-8 * max(1.0, np.linalg.norm(Z2)):
                ok = False
                break
        if ok or Q.shape[1] >= nr:
            return Q
        m *= 2


def information_convex_sectors(cat, lattice, region, thickening: int = 1, seed: int = 0,
                               global_state=None, global_basis=None) -> SectorDecomposition:
    """Sector structure of the information convex set of a region.

    The restricted ground projector on the thickened region is computed,
    a spanning family of its states is reduced to the region, and the
    orthogonal block decomposition is extracted by joint diagonalization.
    Sector stability is probed by re-running at thickening + 1.
    """
    verts = region.vertices if hasattr(region, "vertices") else frozenset(region)
    rb, om_plus, rho_avg, projs, _, Q = _sector_projectors(cat, lattice, verts, thickening, seed)
    blocks = []
    for P_ in projs:
        wgt = float(np.trace(P_ @ rho_avg).real)
        sub = P_ @ rho_avg @ P_
        if wgt > 1e-12:
            sub = sub / wgt
        evals = np.linalg.eigvalsh(sub)
        evals = evals[evals > 1e-12]
        ent = float(-np.sum(evals * np.log(evals)))
        blocks.append(SectorBlock(int(round(np.trace(P_).real)), ent, wgt))

    stable = True
    if lattice.ball(set(verts), thickening + 1).vertices != om_plus.vertices:
        try:
            _, _, _, projs2, _, _ = _sector_projectors(cat, lattice, verts, thickening + 1, seed)
            stable = len(projs2) == len(projs)
        except Exception:
            stable = False

    vac = None
    if global_state is not None and global_basis is not None:
        # identify the block carrying the global state's reduction
        weights = _reference_weights(global_basis, global_state, rb, verts, projs, Q)
        order = np.argsort(weights)[::-1]
        if weights[order[0]] > 1 - 1e-6:
            vac = int(order[0])
    return SectorDecomposition(sorted(verts), thickening, blocks, stable, vac)


def _reference_weights(global_basis, psi, rb, verts, projs, Q) -> np.ndarray:
    """Weight of the global-state reduction in each sector block.

    The region restriction keys of the global basis and of the thickened
    region basis are matched through the actual configuration content.
    """
    verts = frozenset(verts)
    cols_g = _restriction_columns(global_basis, verts)
    cols_r = _restriction_columns(rb, verts)
    mat_g, key_g = np.unique(cols_g, axis=0, return_inverse=True)
    mat_r, key_r = np.unique(cols_r, axis=0, return_inverse=True)
    # map region patterns between the two bases
    lookup = {row.tobytes(): i for i, row in enumerate(mat_r)}
    trans = np.array([lookup.get(row.tobytes(), -1) for row in mat_g])
    keys_c = global_basis.restriction_keys(global_basis.vertex_set - verts)
    nc = int(keys_c.max()) + 1
    nr = len(mat_r)
    ok = trans[key_g] >= 0
    if not np.all(ok):
        raise ValueError("global state populates region patterns missing from the thickened basis")
    import scipy.sparse as sp

    M = sp.coo_matrix((psi, (trans[key_g], keys_c)), shape=(nr, nc)).tocsr()
    Z = np.asarray((M.getH() @ Q.conj()).conj().T)  # r x nc
    rho_r = Z @ Z.conj().T
    return np.array([float(np.trace(P_ @ rho_r).real) for P_ in projs])


def _restriction_columns(basis, verts) -> np.ndarray:
    """Region pattern matrix with columns ordered by global edge/vertex ids,
    so patterns are comparable across bases built on different subsets."""
    eids = sorted(e for e in basis.evar_pos if basis._edge_touches(e, verts))
    cols = [basis.evar_pos[e] for e in eids]
    vids = sorted(v for v in verts if v in basis.vpos)
    vcols = [basis.vpos[v] for v in vids]
    return np.concatenate([basis.labels[:, cols], basis.mults[:, vcols]], axis=1)


def sector_entropy_differences(decomp: SectorDecomposition) -> list[float]:
    """S(rho_a) - S(rho_vacuum) per sector; needs an identified vacuum."""
    if decomp.count <= 1:
        return []
    if decomp.vacuum_block is None:
        raise ValueError("vacuum block not identifiable for this decomposition")
    s0 = decomp.blocks[decomp.vacuum_block].entropy
    return [b.entropy - s0 for i, b in enumerate(decomp.blocks) if i != decomp.vacuum_block]
