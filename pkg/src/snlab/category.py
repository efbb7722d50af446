"""Skeletal unitary fusion categories and their consistency validators.

A category is stored as plain arrays: a fusion tensor N[a,b,c], a dual
involution, quantum dimensions, Frobenius-Schur signs, and a table of
F-blocks.  Labels are small integers; index 0 is always the vacuum.

The F-block for (a, b, c, d) is the unitary change of basis between the
two bracketings of a three-fold splitting d -> a (x) b (x) c.  Rows are
indexed by (e, mu, nu) with mu in V_ab^e and nu in V_ec^d; columns by
(f, alpha, beta) with alpha in V_bc^f and beta in V_af^d.
"""

from __future__ import annotations

import ast
import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

Label = int

_PENTAGON_TOL = 1e-9
_UNITARITY_TOL = 1e-9


@dataclass
class FBlock:
    """One F-matrix together with its row/column index lists."""

    matrix: np.ndarray
    rows: list[tuple[int, int, int]]  # (e, mu, nu)
    cols: list[tuple[int, int, int]]  # (f, alpha, beta)

    def row_pos(self, e: int, mu: int, nu: int) -> int:
        return self.rows.index((e, mu, nu))

    def col_pos(self, f: int, alpha: int, beta: int) -> int:
        return self.cols.index((f, alpha, beta))


@dataclass
class ValidationReport:
    """Outcome of a consistency check: a list of violations, empty if valid."""

    check: str
    violations: list[tuple] = field(default_factory=list)
    max_residual: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, detail: tuple, residual: float = 0.0) -> None:
        self.violations.append(detail)
        self.max_residual = max(self.max_residual, residual)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        state = "ok" if self.ok else f"{len(self.violations)} violation(s)"
        return f"ValidationReport({self.check}: {state}, max_residual={self.max_residual:.3e})"


class CategoryError(ValueError):
    """Structural problem with category data (wrong shapes, bad indices)."""


class FusionCategory:
    """Skeletal UFC: labels, duals, fusion multiplicities, qdims, F-symbols."""

    def __init__(
        self,
        name: str,
        label_names: list[str],
        dual: list[int],
        fusion: np.ndarray,
        f_blocks: dict[tuple[int, int, int, int], FBlock],
        qdim: np.ndarray | None = None,
        kappa: list[int] | None = None,
    ):
        self.name = name
        self.label_names = list(label_names)
        self.rank = len(label_names)
        self.dual = list(dual)
        self.fusion = np.asarray(fusion, dtype=np.int64)
        if self.fusion.shape != (self.rank,) * 3:
            raise CategoryError(
                f"fusion tensor has shape {self.fusion.shape}, expected {(self.rank,) * 3}"
            )
        self.f_blocks = f_blocks
        if qdim is None:
            qdim, total = compute_quantum_dimensions(self.fusion)
        else:
            qdim = np.asarray(qdim, dtype=float)
            total = math.sqrt(float(np.sum(qdim**2)))
        self.qdim = qdim
        self.total_dim = total
        if kappa is None:
            kappa = [self._kappa_from_f(a) for a in range(self.rank)]
        self.fs = list(kappa)

    # -- basic accessors -------------------------------------------------

    def n(self, a: int, b: int, c: int) -> int:
        """Fusion multiplicity N_ab^c."""
        return int(self.fusion[a, b, c])

    def d(self, a: int) -> float:
        return float(self.qdim[a])

    def bar(self, a: int) -> int:
        return self.dual[a]

    def fusion_outcomes(self, a: int, b: int) -> list[int]:
        return [c for c in range(self.rank) if self.fusion[a, b, c] > 0]

    def admissible_f(self, a: int, b: int, c: int, d: int) -> bool:
        return any(
            self.n(a, b, e) and self.n(e, c, d) for e in range(self.rank)
        )

    def f_block(self, a: int, b: int, c: int, d: int) -> FBlock:
        key = (a, b, c, d)
        blk = self.f_blocks.get(key)
        if blk is None:
            if not self.admissible_f(a, b, c, d):
                raise CategoryError(f"F-block requested for inadmissible labels {key}")
            raise CategoryError(f"missing F-block for admissible labels {key}")
        return blk

    def f_entry(self, a, b, c, d, e, f, mu=0, nu=0, alpha=0, beta=0) -> complex:
        blk = self.f_block(a, b, c, d)
        return complex(blk.matrix[blk.row_pos(e, mu, nu), blk.col_pos(f, alpha, beta)])

    def _kappa_from_f(self, a: int) -> int:
        """kappa_a = d_a * (F^{a abar a}_a)_{11}; +1 by convention for a != abar."""
        abar = self.dual[a]
        if a == 0:
            return 1
        if a != abar:
            return 1
        val = self.d(a) * self.f_entry(a, abar, a, a, 0, 0)
        if abs(val.imag) > 1e-9 or abs(abs(val.real) - 1.0) > 1e-9:
            raise CategoryError(
                f"Frobenius-Schur indicator of label {a} is {val}, expected +-1"
            )
        return 1 if val.real > 0 else -1

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"FusionCategory({self.name!r}, rank={self.rank})"


# ---------------------------------------------------------------------------
# validators


def validate_fusion_ring(cat: FusionCategory) -> ValidationReport:
    """Check the integer fusion-ring identities (unit, duals, associativity)."""
    rep = ValidationReport("fusion_ring")
    N = cat.fusion
    r = cat.rank
    if N.shape != (r, r, r):
        rep.add(("structure", "fusion tensor shape", N.shape))
        return rep
    if np.any(N < 0):
        rep.add(("structure", "negative multiplicity"))
        return rep
    for a in range(r):
        for b in range(r):
            if N[0, a, b] != (1 if a == b else 0):
                rep.add(("unit law", "N_1a^b != delta_ab", (a, b)))
            if N[a, 0, b] != (1 if a == b else 0):
                rep.add(("unit law", "N_a1^b != delta_ab", (a, b)))
    if sorted(cat.dual) != list(range(r)):
        rep.add(("dual", "dual is not a permutation"))
        return rep
    for a in range(r):
        if cat.dual[cat.dual[a]] != a:
            rep.add(("dual", "dual not an involution", a))
        for b in range(r):
            want = 1 if b == cat.dual[a] else 0
            if N[a, b, 0] != want:
                rep.add(("dual", "N_ab^1 != delta_{b,abar}", (a, b)))
    for a in range(r):
        for b in range(r):
            for c in range(r):
                if N[a, b, c] != N[cat.dual[b], cat.dual[a], cat.dual[c]]:
                    rep.add(("dual", "N_ab^c != N_{bbar abar}^{cbar}", (a, b, c)))
    # associativity: sum_e N_ab^e N_ec^d == sum_f N_af^d N_bc^f
    lhs = np.einsum("abe,ecd->abcd", N, N)
    rhs = np.einsum("afd,bcf->abcd", N, N)
    bad = np.argwhere(lhs != rhs)
    for idx in bad:
        rep.add(("associativity", tuple(int(i) for i in idx)))
    return rep


def compute_quantum_dimensions(fusion: np.ndarray) -> tuple[np.ndarray, float]:
    """Quantum dimensions as Perron-Frobenius eigenvalues of the fusion matrices."""
    fusion = np.asarray(fusion, dtype=float)
    r = fusion.shape[0]
    d = np.empty(r)
    for a in range(r):
        Na = fusion[a]
        evals = np.linalg.eigvals(Na)
        d[a] = float(np.max(evals.real))
    if abs(d[0] - 1.0) > 1e-12:
        raise CategoryError(f"vacuum quantum dimension is {d[0]}, expected 1")
    total = math.sqrt(float(np.sum(d**2)))
    # Perron-Frobenius consistency: d_a d_b = sum_c N_ab^c d_c
    resid = np.max(np.abs(np.outer(d, d) - np.einsum("abc,c->ab", fusion, d)))
    if resid > 1e-10:
        raise CategoryError(f"quantum dimensions ill-conditioned, residual {resid:.3e}")
    return d, total


def check_unitarity(cat: FusionCategory, tol: float = _UNITARITY_TOL) -> ValidationReport:
    """Every F-block must be unitary (and square for admissible labels)."""
    rep = ValidationReport("unitarity")
    for (a, b, c, d), blk in sorted(cat.f_blocks.items()):
        m = blk.matrix
        if m.shape[0] != m.shape[1]:
            rep.add(("structure", "non-square F-block", (a, b, c, d), m.shape))
            continue
        resid = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
        if resid > tol:
            rep.add(("unitarity", (a, b, c, d)), resid)
        rep.max_residual = max(rep.max_residual, resid)
    return rep


def check_vacuum_f(cat: FusionCategory, tol: float = _UNITARITY_TOL) -> ValidationReport:
    """F must be the identity whenever a, b or c is the vacuum."""
    rep = ValidationReport("vacuum_f")
    r = cat.rank
    for a in range(r):
        for b in range(r):
            for c in range(r):
                if a != 0 and b != 0 and c != 0:
                    continue
                for dd in range(r):
                    if not cat.admissible_f(a, b, c, dd):
                        continue
                    blk = cat.f_block(a, b, c, dd)
                    resid = float(
                        np.max(np.abs(blk.matrix - np.eye(blk.matrix.shape[0])))
                    )
                    if resid > tol:
                        rep.add(("vacuum", (a, b, c, dd)), resid)
    return rep


def _f_completeness(cat: FusionCategory) -> ValidationReport:
    """All admissible (a,b,c,d) must carry an F-block with consistent indices."""
    rep = ValidationReport("f_completeness")
    r = cat.rank
    for a in range(r):
        for b in range(r):
            for c in range(r):
                for d in range(r):
                    rows = [
                        (e, mu, nu)
                        for e in range(r)
                        for mu in range(cat.n(a, b, e))
                        for nu in range(cat.n(e, c, d))
                    ]
                    cols = [
                        (f, al, be)
                        for f in range(r)
                        for al in range(cat.n(b, c, f))
                        for be in range(cat.n(a, f, d))
                    ]
                    key = (a, b, c, d)
                    if not rows:
                        if key in cat.f_blocks:
                            rep.add(("spurious F-block", key))
                        continue
                    if key not in cat.f_blocks:
                        rep.add(("missing F-block", key))
                        continue
                    blk = cat.f_blocks[key]
                    if blk.rows != rows or blk.cols != cols:
                        rep.add(("index mismatch", key))
                    if len(rows) != len(cols):
                        rep.add(("non-square Hom dimensions", key, len(rows), len(cols)))
    return rep


def check_pentagon(cat: FusionCategory, tol: float = _PENTAGON_TOL) -> ValidationReport:
    """Verify the pentagon identity for every admissible (a, b, c, d, u).

    Both re-association paths from (((ab)c)d) to (a(b(cd))) are composed
    entrywise; the report lists index tuples whose residual exceeds tol.
    """
    rep = ValidationReport("pentagon")
    comp = _f_completeness(cat)
    if not comp.ok:
        rep.violations.extend(comp.violations)
        return rep
    r = cat.rank
    for a in range(r):
        for b in range(r):
            for c in range(r):
                for d in range(r):
                    for u in range(r):
                        resid = _pentagon_residual(cat, a, b, c, d, u)
                        if resid is None:
                            continue
                        rep.max_residual = max(rep.max_residual, resid)
                        if resid > tol:
                            rep.add(("pentagon", (a, b, c, d, u)), resid)
    return rep


def _pentagon_residual(cat, a, b, c, d, u):
    """Max entrywise defect of the pentagon for one label choice, or None."""
    r = cat.rank
    # basis of tree1: (e, f) chains with mults mu1 in V_ab^e, mu2 in V_ec^f, mu3 in V_fd^u
    tree1 = [
        (e, f, m1, m2, m3)
        for e in range(r)
        for f in range(r)
        for m1 in range(cat.n(a, b, e))
        for m2 in range(cat.n(e, c, f))
        for m3 in range(cat.n(f, d, u))
    ]
    tree3 = [
        (g, h, n1, r1, r2)
        for g in range(r)
        for h in range(r)
        for n1 in range(cat.n(c, d, g))
        for r1 in range(cat.n(b, g, h))
        for r2 in range(cat.n(a, h, u))
    ]
    if not tree1 or not tree3:
        return None
    worst = 0.0
    for (e, f, m1, m2, m3) in tree1:
        for (g, h, n1, r1, r2) in tree3:
            # path 1: F^{ecd}_u then F^{abg}_u, summed over the V_eg^u index
            lhs = 0.0 + 0.0j
            for n2 in range(cat.n(e, g, u)):
                lhs += cat.f_entry(e, c, d, u, f, g, m2, m3, n1, n2) * cat.f_entry(
                    a, b, g, u, e, h, m1, n2, r1, r2
                )
            # path 2: F^{abc}_f, F^{aid}_u, F^{bcd}_h
            rhs = 0.0 + 0.0j
            for i in range(r):
                for s1 in range(cat.n(b, c, i)):
                    for s2 in range(cat.n(a, i, f)):
                        for t1 in range(cat.n(i, d, h)):
                            rhs += (
                                cat.f_entry(a, b, c, f, e, i, m1, m2, s1, s2)
                                * cat.f_entry(a, i, d, u, f, h, s2, m3, t1, r2)
                                * cat.f_entry(b, c, d, h, i, g, s1, t1, n1, r1)
                            )
            worst = max(worst, abs(lhs - rhs))
    return worst


def frobenius_schur(cat: FusionCategory, a: int) -> int:
    """Frobenius-Schur sign of label a, read from the F-datum F^{a abar a}_a."""
    return cat._kappa_from_f(a)


def gauge_transform(cat: FusionCategory, u: dict[tuple[int, int, int], np.ndarray]) -> FusionCategory:
    """Apply a unitary change of basis on the fusion multiplicity spaces.

    ``u[(a, b, c)]`` must be unitary of dimension N_ab^c; missing entries
    default to the identity, and any entry touching the vacuum must be 1.
    """
    def gm(a, b, c):
        m = u.get((a, b, c))
        n = cat.n(a, b, c)
        if m is None:
            return np.eye(n)
        m = np.asarray(m, dtype=complex)
        if m.shape != (n, n):
            raise CategoryError(f"gauge matrix for {(a, b, c)} has shape {m.shape}")
        if np.max(np.abs(m.conj().T @ m - np.eye(n))) > 1e-12:
            raise CategoryError(f"gauge matrix for {(a, b, c)} is not unitary")
        if (a == 0 or b == 0) and abs(m[0, 0] - 1.0) > 1e-12:
            raise CategoryError("gauge must be trivial on vacuum vertices")
        return m

    new_blocks = {}
    for (a, b, c, d), blk in cat.f_blocks.items():
        m = np.array(blk.matrix)
        out = np.zeros_like(m)
        for ri, (e, mu, nu) in enumerate(blk.rows):
            for ci, (f, al, be) in enumerate(blk.cols):
                acc = 0.0 + 0.0j
                for rj, (e2, mu2, nu2) in enumerate(blk.rows):
                    if e2 != e:
                        continue
                    for cj, (f2, al2, be2) in enumerate(blk.cols):
                        if f2 != f:
                            continue
                        acc += (
                            gm(a, b, e)[mu, mu2]
                            * gm(e, c, d)[nu, nu2]
                            * m[rj, cj]
                            * np.conj(gm(b, c, f)[al, al2])
                            * np.conj(gm(a, f, d)[be, be2])
                        )
                out[ri, ci] = acc
        new_blocks[(a, b, c, d)] = FBlock(out, list(blk.rows), list(blk.cols))
    return FusionCategory(
        cat.name + "+gauge",
        cat.label_names,
        cat.dual,
        cat.fusion,
        new_blocks,
        qdim=cat.qdim,
        kappa=cat.fs,
    )


def validate_all(cat: FusionCategory, tol: float = _PENTAGON_TOL) -> list[ValidationReport]:
    return [
        validate_fusion_ring(cat),
        _f_completeness(cat),
        check_unitarity(cat, tol),
        check_vacuum_f(cat, tol),
        check_pentagon(cat, tol),
    ]


# ---------------------------------------------------------------------------
# builtin categories


def _blocks_from_scalar(fusion: np.ndarray, fval) -> dict:
    """Build F-blocks for a multiplicity-free category from a scalar rule.

    ``fval(a, b, c, d, e, f)`` returns the matrix entry; indices are only
    queried for admissible chains, and the result must be unitary.
    """
    r = fusion.shape[0]

    def n(a, b, c):
        return int(fusion[a, b, c])

    blocks = {}
    for a in range(r):
        for b in range(r):
            for c in range(r):
                for d in range(r):
                    rows = [
                        (e, 0, 0) for e in range(r) if n(a, b, e) and n(e, c, d)
                    ]
                    cols = [
                        (f, 0, 0) for f in range(r) if n(b, c, f) and n(a, f, d)
                    ]
                    if not rows:
                        continue
                    m = np.zeros((len(rows), len(cols)), dtype=complex)
                    for i, (e, _, _) in enumerate(rows):
                        for j, (f, _, _) in enumerate(cols):
                            m[i, j] = fval(a, b, c, d, e, f)
                    blocks[(a, b, c, d)] = FBlock(m, rows, cols)
    return blocks


def _group_category(name: str, order: int, twist: bool = False) -> FusionCategory:
    """Pointed Z_N category; ``twist`` flips the sign of F^{sss}_s for Z_2."""
    r = order
    fusion = np.zeros((r, r, r), dtype=np.int64)
    for a in range(r):
        for b in range(r):
            fusion[a, b, (a + b) % r] = 1
    dual = [(-a) % r for a in range(r)]

    def fval(a, b, c, d, e, f):
        if twist and a == b == c == 1:
            return -1.0
        return 1.0

    blocks = _blocks_from_scalar(fusion, fval)
    names = ["1"] + [f"g{k}" for k in range(1, r)]
    if r == 2:
        names = ["1", "s"]
    return FusionCategory(name, names, dual, fusion, blocks)


def _fibonacci() -> FusionCategory:
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    fusion = np.zeros((2, 2, 2), dtype=np.int64)
    fusion[0, 0, 0] = 1
    fusion[0, 1, 1] = fusion[1, 0, 1] = 1
    fusion[1, 1, 0] = fusion[1, 1, 1] = 1

    fmat = {  # e, f indices of F^{tau tau tau}_tau
        (0, 0): 1.0 / phi,
        (0, 1): 1.0 / math.sqrt(phi),
        (1, 0): 1.0 / math.sqrt(phi),
        (1, 1): -1.0 / phi,
    }

    def fval(a, b, c, d, e, f):
        if (a, b, c, d) == (1, 1, 1, 1):
            return fmat[(e, f)]
        return 1.0

    blocks = _blocks_from_scalar(fusion, fval)
    return FusionCategory("fibonacci", ["1", "tau"], [0, 1], fusion, blocks)


def _ising() -> FusionCategory:
    # labels: 0 = 1, 1 = psi, 2 = sigma  (Tambara-Yamagami over Z_2)
    fusion = np.zeros((3, 3, 3), dtype=np.int64)
    for a in range(2):
        for b in range(2):
            fusion[a, b, (a + b) % 2] = 1
    for a in range(2):
        fusion[a, 2, 2] = fusion[2, a, 2] = 1
    fusion[2, 2, 0] = fusion[2, 2, 1] = 1

    def chi(a, b):
        return -1.0 if (a == 1 and b == 1) else 1.0

    s = 1.0 / math.sqrt(2.0)

    def fval(a, b, c, d, e, f):
        trio = (a, b, c)
        if trio == (2, 2, 2):
            return s * chi(e, f)
        if a == 2 and c == 2 and b in (0, 1):
            return chi(b, d)
        if a in (0, 1) and c in (0, 1) and b == 2:
            return chi(a, c)
        return 1.0

    blocks = _blocks_from_scalar(fusion, fval)
    return FusionCategory("ising", ["1", "psi", "sigma"], [0, 1, 2], fusion, blocks)


_BUILTINS = {
    "vec_z2": lambda: _group_category("vec_z2", 2),
    "semion": lambda: _group_category("semion", 2, twist=True),
    "vec_z3": lambda: _group_category("vec_z3", 3),
    "vec_z4": lambda: _group_category("vec_z4", 4),
    "fibonacci": _fibonacci,
    "ising": _ising,
}


def builtin(name: str) -> FusionCategory:
    """Return one of the shipped categories by name."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise CategoryError(
            f"unknown builtin category {name!r}; available: {sorted(_BUILTINS)}"
        ) from None
    return factory()


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


# ---------------------------------------------------------------------------
# file format

_EVAL_NAMES = {
    "sqrt": math.sqrt,
    "pi": math.pi,
    "phi": (1.0 + math.sqrt(5.0)) / 2.0,
    "cos": math.cos,
    "sin": math.sin,
    "exp": math.exp,
}


def _eval_number(val) -> float:
    """Evaluate a numeric literal or a restricted arithmetic string."""
    if isinstance(val, (int, float)):
        return float(val)
    node = ast.parse(str(val), mode="eval")
    allowed = (
        ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name,
        ast.Call, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd,
        ast.Load,
    )
    for sub in ast.walk(node):
        if not isinstance(sub, allowed):
            raise CategoryError(f"disallowed expression in category file: {val!r}")
        if isinstance(sub, ast.Name) and sub.id not in _EVAL_NAMES:
            raise CategoryError(f"unknown symbol {sub.id!r} in category file")
        if isinstance(sub, ast.Call) and (
            not isinstance(sub.func, ast.Name) or sub.func.id not in _EVAL_NAMES
        ):
            raise CategoryError(f"disallowed call in category file: {val!r}")
    return float(eval(compile(node, "<category>", "eval"), {"__builtins__": {}}, _EVAL_NAMES))


def save_category(cat: FusionCategory, path: str) -> None:
    recs = []
    for (a, b, c, d), blk in sorted(cat.f_blocks.items()):
        for i, (e, mu, nu) in enumerate(blk.rows):
            for j, (f, al, be) in enumerate(blk.cols):
                v = blk.matrix[i, j]
                recs.append(
                    {
                        "a": a, "b": b, "c": c, "d": d, "e": e, "f": f,
                        "mu": mu, "nu": nu, "alpha": al, "beta": be,
                        "re": v.real, "im": v.imag,
                    }
                )
    doc = {
        "name": cat.name,
        "labels": cat.label_names,
        "dual": cat.dual,
        "fusion": [
            [a, b, c, int(cat.fusion[a, b, c])]
            for a in range(cat.rank)
            for b in range(cat.rank)
            for c in range(cat.rank)
            if cat.fusion[a, b, c]
        ],
        "F": recs,
        "qdim": [float(x) for x in cat.qdim],
        "kappa": cat.fs,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_category(path: str, force: bool = False, tol: float = _PENTAGON_TOL) -> FusionCategory:
    """Load a category file, run all validators, and refuse invalid data.

    With ``force`` the validators still run but failures only warn via the
    returned object's ``load_reports`` attribute.
    """
    with open(path) as fh:
        doc = json.load(fh)
    labels = doc["labels"]
    rank = len(labels)
    dual = [int(x) for x in doc["dual"]]
    if sorted(dual) != list(range(rank)):
        raise CategoryError("dual is not a permutation of the labels")
    fusion = np.zeros((rank, rank, rank), dtype=np.int64)
    for a, b, c, mult in doc["fusion"]:
        fusion[int(a), int(b), int(c)] = int(mult)

    def n(a, b, c):
        return int(fusion[a, b, c])

    staged: dict[tuple, dict[tuple, complex]] = {}
    for rec in doc["F"]:
        key = (int(rec["a"]), int(rec["b"]), int(rec["c"]), int(rec["d"]))
        ent = (
            int(rec["e"]), int(rec.get("mu", 0)), int(rec.get("nu", 0)),
            int(rec["f"]), int(rec.get("alpha", 0)), int(rec.get("beta", 0)),
        )
        val = complex(_eval_number(rec.get("re", 0.0)), _eval_number(rec.get("im", 0.0)))
        staged.setdefault(key, {})[ent] = val

    blocks = {}
    for (a, b, c, d), entries in staged.items():
        rows = [
            (e, mu, nu)
            for e in range(rank)
            for mu in range(n(a, b, e))
            for nu in range(n(e, c, d))
        ]
        cols = [
            (f, al, be)
            for f in range(rank)
            for al in range(n(b, c, f))
            for be in range(n(a, f, d))
        ]
        if not rows:
            raise CategoryError(f"F-records present for inadmissible labels {(a, b, c, d)}")
        m = np.zeros((len(rows), len(cols)), dtype=complex)
        for (e, mu, nu, f, al, be), val in entries.items():
            try:
                i = rows.index((e, mu, nu))
                j = cols.index((f, al, be))
            except ValueError:
                raise CategoryError(
                    f"F-record {(a, b, c, d, e, f)} addresses inadmissible indices"
                ) from None
            m[i, j] = val
        blocks[(a, b, c, d)] = FBlock(m, rows, cols)

    qdim = np.array([_eval_number(x) for x in doc["qdim"]]) if "qdim" in doc else None
    kappa = [int(x) for x in doc["kappa"]] if "kappa" in doc else None
    cat = FusionCategory(doc.get("name", "file"), labels, dual, fusion, blocks, qdim=qdim, kappa=kappa)
    reports = validate_all(cat, tol)
    cat.load_reports = reports
    bad = [r for r in reports if not r.ok]
    if bad and not force:
        raise CategoryError(
            "category file failed validation: "
            + "; ".join(f"{r.check} ({len(r.violations)})" for r in bad)
        )
    return cat
