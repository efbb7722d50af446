"""Density-matrix utilities: entropies, conditional mutual information,
Petz-map merging, and Uhlmann disentangling unitaries.

Lattice states live on the vertex-factorized Hilbert space.  A ``FactorMap``
embeds the stable-labeling amplitudes into an explicit tensor product over
named subregions so that dense multi-factor computations (Petz recovery,
disentanglers) can run on small desk-scale regions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_CLIP = 1e-12


class HypothesisError(ValueError):
    """A stated precondition (decoupling, Markov condition) fails."""


@dataclass
class DensityMatrix:
    """Hermitian PSD unit-trace operator with an optional region tag."""

    matrix: np.ndarray
    region: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > 1e-10:
            raise ValueError(f"matrix is not Hermitian (defect {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-12:
            raise ValueError(f"trace is {tr}, expected 1")
        evals = np.linalg.eigvalsh(m)
        if evals.min() < -1e-10:
            raise ValueError(f"matrix has negative eigenvalue {evals.min():.3e}")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def entropy(rho) -> float:
    """Von Neumann entropy in nats, eigenvalues clipped below 1e-12."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    evals = np.linalg.eigvalsh(m)
    evals = evals[evals > _CLIP]
    return float(-np.sum(evals * np.log(evals)))


def entropy_from_schmidt(sv: np.ndarray) -> float:
    p = sv**2
    p = p[p > _CLIP]
    return float(-np.sum(p * np.log(p)))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(np.asarray(a) - np.asarray(b))
    return float(0.5 * np.sum(np.abs(evals)))


# ---------------------------------------------------------------------------
# lattice-state reductions


def region_entropy(basis, psi: np.ndarray, region) -> float:
    """Entanglement entropy of a vertex region via the Schmidt split."""
    verts = region.vertices if hasattr(region, "vertices") else frozenset(region)
    if not verts:
        return 0.0
    if verts >= basis.vertex_set:
        return 0.0
    keys_r = basis.restriction_keys(verts)
    keys_c = basis.restriction_keys(basis.vertex_set - verts)
    nr = int(keys_r.max()) + 1
    nc = int(keys_c.max()) + 1
    M = np.zeros((nr, nc), dtype=complex)
    np.add.at(M, (keys_r, keys_c), psi)
    # spectrum of the smaller Gram factor
    G = M @ M.conj().T if nr <= nc else M.conj().T @ M
    evals = np.linalg.eigvalsh(G)
    evals = evals[evals > _CLIP]
    return float(-np.sum(evals * np.log(evals)))


def reduced_density_matrix(basis, psi: np.ndarray, region) -> DensityMatrix:
    """RDM of a normalized state on a region, in the region's support basis."""
    verts = region.vertices if hasattr(region, "vertices") else frozenset(region)
    tag = getattr(region, "tag", "")
    if not verts:
        return DensityMatrix(np.array([[1.0 + 0j]]), tag)
    if verts >= basis.vertex_set:
        rho = np.outer(psi, psi.conj())
        return DensityMatrix(rho, tag)
    keys_r = basis.restriction_keys(verts)
    keys_c = basis.restriction_keys(basis.vertex_set - verts)
    nr = int(keys_r.max()) + 1
    nc = int(keys_c.max()) + 1
    M = np.zeros((nr, nc), dtype=complex)
    np.add.at(M, (keys_r, keys_c), psi)
    return DensityMatrix(M @ M.conj().T, tag)


def mutual_information(basis, psi, A, C) -> float:
    """I(A:C) = S(A) + S(C) - S(AC) for disjoint vertex regions."""
    _check_disjoint(A, C)
    return (
        region_entropy(basis, psi, A)
        + region_entropy(basis, psi, C)
        - region_entropy(basis, psi, _union(A, C))
    )


def cmi(basis, psi, A, B, C) -> float:
    """I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC)."""
    _check_disjoint(A, B)
    _check_disjoint(B, C)
    _check_disjoint(A, C)
    return (
        region_entropy(basis, psi, _union(A, B))
        + region_entropy(basis, psi, _union(B, C))
        - region_entropy(basis, psi, B)
        - region_entropy(basis, psi, _union(A, B, C))
    )


def _verts(r):
    return r.vertices if hasattr(r, "vertices") else frozenset(r)


def _union(*regions):
    out = frozenset()
    for r in regions:
        out = out | _verts(r)
    return out


def _check_disjoint(a, b):
    if _verts(a) & _verts(b):
        raise ValueError("regions overlap")


class FactorMap:
    """Embedding of lattice amplitudes into a tensor product of subregions.

    The subregions must be disjoint; together with the complement they
    cover the lattice.  Each subregion factor is spanned by the distinct
    restrictions of the basis configurations to that subregion.
    """

    def __init__(self, basis, regions: list):
        self.basis = basis
        self.regions = [(_verts(r), getattr(r, "tag", str(i))) for i, r in enumerate(regions)]
        for i in range(len(self.regions)):
            for j in range(i + 1, len(self.regions)):
                if self.regions[i][0] & self.regions[j][0]:
                    raise ValueError("FactorMap subregions must be disjoint")
        covered = frozenset().union(*(v for v, _ in self.regions))
        self.complement = basis.vertex_set - covered
        self.keys = [basis.restriction_keys(v) for v, _ in self.regions]
        self.dims = [int(k.max()) + 1 for k in self.keys]
        if self.complement:
            self.ckeys = basis.restriction_keys(self.complement)
            self.cdim = int(self.ckeys.max()) + 1
        else:
            self.ckeys = np.zeros(basis.dim, dtype=int)
            self.cdim = 1

    def joint_rdm(self, psi: np.ndarray) -> np.ndarray:
        """Dense RDM on the product of the named subregions."""
        d = int(np.prod(self.dims))
        flat = np.zeros(self.basis.dim, dtype=int)
        for k, dim in zip(self.keys, self.dims):
            flat = flat * dim + k
        M = np.zeros((d, self.cdim), dtype=complex)
        np.add.at(M, (flat, self.ckeys), psi)
        return M @ M.conj().T


def ptrace(rho: np.ndarray, dims: list, keep: list) -> np.ndarray:
    """Partial trace over the factors not in ``keep`` (indices into dims)."""
    n = len(dims)
    rho = np.asarray(rho).reshape(dims + dims)
    drop = [i for i in range(n) if i not in keep]
    for c, i in enumerate(sorted(drop)):
        ax = i - c
        rho = np.trace(rho, axis1=ax, axis2=ax + rho.ndim // 2)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return rho.reshape(d, d)


def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def _invsqrt_psd(m: np.ndarray, clip: float = _CLIP) -> tuple[np.ndarray, bool]:
    w, v = np.linalg.eigh(m)
    flagged = bool(np.any((w > 0) & (w < clip)))
    inv = np.where(w > clip, 1.0 / np.sqrt(np.clip(w, clip, None)), 0.0)
    return (v * inv) @ v.conj().T, flagged


def petz_merge(rho_abc: np.ndarray, lam_bcd: np.ndarray, dims_abc: tuple, dims_bcd: tuple,
               tol: float = 1e-7) -> dict:
    """Merge overlapping density matrices with the Petz recovery map.

    ``rho_abc`` lives on factors (A, B, C) and ``lam_bcd`` on (B, C, D)
    with matching (B, C).  Requires rho_BC = lam_BC, I(A:C|B)_rho ~ 0 and
    I(B:D|C)_lam ~ 0; returns tau on (A, B, C, D) obtained by recovering D
    from C with the Petz map of lam.
    """
    dA, dB, dC = dims_abc
    dB2, dC2, dD = dims_bcd
    if (dB, dC) != (dB2, dC2):
        raise ValueError("overlap factors disagree between the two inputs")
    rho_bc = ptrace(rho_abc, [dA, dB, dC], [1, 2])
    lam_bc = ptrace(lam_bcd, [dB, dC, dD], [0, 1])
    overlap = trace_distance(rho_bc, lam_bc)
    if overlap > tol:
        raise HypothesisError(f"inputs disagree on BC (trace distance {overlap:.3e})")
    i_acb = _cmi_dense(rho_abc, [dA, dB, dC], 0, 1, 2)
    i_bdc = _cmi_dense(lam_bcd, [dB, dC, dD], 0, 1, 2)
    if i_acb > tol:
        raise HypothesisError(f"I(A:C|B)_rho = {i_acb:.3e} exceeds tol")
    if i_bdc > tol:
        raise HypothesisError(f"I(B:D|C)_lam = {i_bdc:.3e} exceeds tol")

    lam_c = ptrace(lam_bcd, [dB, dC, dD], [1])
    lam_cd = ptrace(lam_bcd, [dB, dC, dD], [1, 2])
    inv_c, flagged = _invsqrt_psd(lam_c)
    M = _sqrt_psd(lam_cd) @ np.kron(inv_c, np.eye(dD))  # map C (x) D -> C (x) D
    # tau = (id_AB (x) R)(rho), Kraus K_d |x>_C = M |x, d>
    rho_t = rho_abc.reshape(dA * dB, dC, dA * dB, dC)
    Mt = M.reshape(dC * dD, dC, dD)
    tau = np.einsum("pxqy,sxd,tyd->psqt", rho_t, Mt, np.conj(Mt), optimize=True)
    tau = tau.reshape(dA * dB * dC * dD, dA * dB * dC * dD)
    tau = (tau + tau.conj().T) / 2.0
    tau /= np.trace(tau).real
    out = {
        "tau": tau,
        "dims": (dA, dB, dC, dD),
        "regularized": flagged,
        "marginal_abc": trace_distance(ptrace(tau, [dA, dB, dC, dD], [0, 1, 2]), rho_abc),
        "marginal_bcd": trace_distance(ptrace(tau, [dA, dB, dC, dD], [1, 2, 3]), lam_bcd),
        "cmi_a_cd_b": _cmi_dense(tau, [dA, dB, dC * dD], 0, 1, 2),
        "cmi_ab_d_c": _cmi_dense(tau, [dA * dB, dC, dD], 0, 1, 2),
    }
    return out


def _cmi_dense(rho: np.ndarray, dims: list, ia: int, ib: int, ic: int) -> float:
    s_ab = entropy(ptrace(rho, dims, [ia, ib]))
    s_bc = entropy(ptrace(rho, dims, [ib, ic]))
    s_b = entropy(ptrace(rho, dims, [ib]))
    s_abc = entropy(rho)
    return s_ab + s_bc - s_b - s_abc


# ---------------------------------------------------------------------------
# Uhlmann disentangler


def _operator_algebra(generators: list, dim: int, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (stacked) of the *-algebra generated by the inputs."""
    mats = [np.eye(dim, dtype=complex)]
    for g in generators:
        mats.append(g)
        mats.append(g.conj().T)
    basis: list[np.ndarray] = []

    def absorb(m):
        v = m.reshape(-1)
        for b in basis:
            v = v - (b.reshape(-1).conj() @ v) * b.reshape(-1)
        nrm = np.linalg.norm(v)
        if nrm > tol:
            basis.append((v / nrm).reshape(dim, dim))
            return True
        return False

    for m in mats:
        absorb(m)
    changed = True
    while changed:
        changed = False
        snapshot = list(basis)
        for x in snapshot:
            for y in snapshot:
                if absorb(x @ y):
                    changed = True
    return np.stack(basis)


def _commutant(algebra: np.ndarray, dim: int, tol: float = 1e-10) -> np.ndarray:
    """Basis of {Y: [Y, A_i] = 0 for all i} as stacked matrices."""
    blocks = []
    eye = np.eye(dim)
    for a in algebra:
        blocks.append(np.kron(eye, a) - np.kron(a.T, eye))
    M = np.concatenate(blocks, axis=0)
    _, sv, vh = np.linalg.svd(M)
    null = vh[np.sum(sv > tol * max(1.0, sv[0])):].conj()
    return null.reshape(-1, dim, dim)


def uhlmann_disentangler(rho_abc: np.ndarray, sigma_abc: np.ndarray, dims: tuple,
                         tol: float = 1e-9) -> dict:
    """Unitary on BC mapping sigma to rho when both decouple C.

    Preconditions: rho_AB = sigma_AB and (S(BC) + S(C) - S(B)) = 0 for both
    states.  The construction finds the factorization B = B_L (x) B_R with
    rho = rho_{A B_L} (x) |phi_rho><phi_rho|_{B_R C} (and likewise sigma),
    then rotates phi_sigma onto phi_rho inside B_R C.
    """
    dA, dB, dC = dims
    rho_ab = ptrace(rho_abc, [dA, dB, dC], [0, 1])
    sig_ab = ptrace(sigma_abc, [dA, dB, dC], [0, 1])
    dev_ab = trace_distance(rho_ab, sig_ab)
    if dev_ab > tol:
        raise HypothesisError(f"rho_AB != sigma_AB (trace distance {dev_ab:.3e})")
    htol = max(tol, 1e-8)
    for name, m in (("rho", rho_abc), ("sigma", sigma_abc)):
        s_bc = entropy(ptrace(m, [dA, dB, dC], [1, 2]))
        s_c = entropy(ptrace(m, [dA, dB, dC], [2]))
        s_b = entropy(ptrace(m, [dA, dB, dC], [1]))
        dec = s_bc + s_c - s_b
        if abs(dec) > htol:
            raise HypothesisError(f"decoupling fails for {name}: S(BC)+S(C)-S(B) = {dec:.3e}")

    omega_b = ptrace(rho_abc, [dA, dB, dC], [1])
    inv_b, _ = _invsqrt_psd(omega_b, clip=1e-12)
    wb, vb = np.linalg.eigh(omega_b)
    supp = vb[:, wb > 1e-12]
    ds = supp.shape[1]

    gens = []
    for state in (rho_abc, sigma_abc):
        rho_bc = ptrace(state, [dA, dB, dC], [1, 2]).reshape(dB, dC, dB, dC)
        for x in range(dC):
            for y in range(dC):
                w = rho_bc[:, x, :, y]  # Tr_C[(I (x) |y><x|) rho_BC]
                gens.append(supp.conj().T @ (inv_b @ w @ inv_b) @ supp)
    alg = _operator_algebra(gens, ds)
    comm = _commutant(alg, ds)
    # center must be trivial for a clean B_L (x) B_R factorization
    center_dim = _center_dimension(alg, comm, ds)
    if center_dim != 1:
        raise HypothesisError(
            f"recovered operator algebra has a {center_dim}-dimensional center; "
            "no common tensor factorization"
        )
    n_r = int(round(np.sqrt(alg.shape[0])))
    n_l = int(round(np.sqrt(comm.shape[0])))
    if n_l * n_r != ds:
        raise HypothesisError("algebra dimensions do not factor the support")

    V = _factorization_isometry(comm, ds, n_l, n_r)  # columns: |l, r> in supp coords
    W = supp @ V  # dB x (n_l n_r)

    def pure_part(state):
        rho_bc = ptrace(state, [dA, dB, dC], [1, 2])
        big = np.kron(W, np.eye(dC))
        red = big.conj().T @ rho_bc.reshape(dB * dC, dB * dC) @ big
        red = red.reshape(n_l, n_r * dC, n_l, n_r * dC)
        phi = np.trace(red, axis1=0, axis2=2)
        phi /= np.trace(phi).real
        w, v = np.linalg.eigh(phi)
        if w[-1] < 1.0 - 1e-7:
            raise HypothesisError(f"B_R C part is not pure (largest weight {w[-1]:.6f})")
        return v[:, -1]

    phi_rho = pure_part(rho_abc)
    phi_sig = pure_part(sigma_abc)
    u_rc = _rotation_between(phi_sig, phi_rho)

    big = np.kron(W, np.eye(dC))  # (dB dC) x (n_l n_r dC)
    inner = np.kron(np.eye(n_l), u_rc)
    U = big @ inner @ big.conj().T
    # complete to a unitary on BC: identity off the support
    proj = big @ big.conj().T
    U = U + (np.eye(dB * dC) - proj)
    # apply U on the BC factor of sigma
    sig_t = sigma_abc.reshape(dA, dB * dC, dA, dB * dC)
    out = np.einsum("pq,aqbr,sr->apbs", U, sig_t, np.conj(U), optimize=True)
    out = out.reshape(dA * dB * dC, dA * dB * dC)
    dist = trace_distance(out, rho_abc)
    return {"unitary_bc": U, "moved_sigma": out, "trace_distance": dist, "b_split": (n_l, n_r)}


def _center_dimension(alg, comm, dim) -> int:
    both = []
    for a in alg:
        va = a.reshape(-1)
        coeffs = comm.reshape(comm.shape[0], -1).conj() @ va
        back = np.tensordot(coeffs, comm, axes=(0, 0))
        if np.linalg.norm(back - a) < 1e-8:
            both.append(a)
    if not both:
        return 0
    m = np.stack([b.reshape(-1) for b in both])
    return int(np.linalg.matrix_rank(m, tol=1e-8))


def _factorization_isometry(comm: np.ndarray, ds: int, n_l: int, n_r: int) -> np.ndarray:
    """Orthonormal basis |l, r> of the support realizing A' = B(B_L) (x) I."""
    rng = np.random.default_rng(7)
    herm = None
    for _ in range(20):
        c = rng.normal(size=comm.shape[0]) @ comm.reshape(comm.shape[0], -1)
        G = c.reshape(ds, ds)
        G = (G + G.conj().T) / 2.0
        w, v = np.linalg.eigh(G)
        # group eigenvalues: need n_l distinct groups of size n_r
        groups = _group_eigs(w, n_r)
        if groups is not None and len(groups) == n_l:
            herm = (w, v, groups)
            break
    if herm is None:
        raise HypothesisError("failed to find a generic commutant element")
    w, v, groups = herm
    spaces = [v[:, g] for g in groups]
    # align the fibers with a second generic commutant element
    c2 = rng.normal(size=comm.shape[0]) @ comm.reshape(comm.shape[0], -1)
    G2 = c2.reshape(ds, ds)
    cols = []
    base = spaces[0]
    for k, Ek in enumerate(spaces):
        if k == 0:
            cols.append(base)
            continue
        T = Ek.conj().T @ G2 @ base  # n_r x n_r, proportional to a unitary fiber map
        uu, _, vvh = np.linalg.svd(T)
        cols.append(Ek @ (uu @ vvh))
    return np.concatenate(cols, axis=1)


def _group_eigs(w: np.ndarray, size: int, gap: float = 1e-8):
    groups = []
    cur = [0]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] < gap:
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    if all(len(g) == size for g in groups):
        return groups
    return None


def _rotation_between(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Unitary equal to the identity off span{src, dst} mapping src -> dst."""
    n = src.shape[0]
    s = src / np.linalg.norm(src)
    d = dst / np.linalg.norm(dst)
    ov = np.vdot(s, d)
    if abs(abs(ov) - 1.0) < 1e-14:
        # same ray: a phase on the source line suffices
        return np.eye(n, dtype=complex) + (ov - 1.0) * np.outer(s, s.conj())
    e1 = s
    e2 = d - ov * s
    e2 /= np.linalg.norm(e2)
    # in basis (e1, e2): s = (1, 0), d = (ov, |e2 part|)
    beta = np.vdot(e2, d)
    block = np.array([[ov, -np.conj(beta)], [beta, np.conj(ov)]])
    U = np.eye(n, dtype=complex)
    P = np.stack([e1, e2], axis=1)
    U = U - P @ P.conj().T + P @ block @ P.conj().T
    return U
