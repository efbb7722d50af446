"""Command-line front end.

Subcommand style: ``snlab category ...``, ``snlab gs ...``,
``snlab check ...``.  Every run writes machine-readable reports (JSON or
CSV) plus rendered figures into the output directory.  Exit codes:
0 pass, 1 I/O or usage error, 2 check failure, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from snlab import axioms as ax
from snlab import hamiltonian as ham
from snlab import reports as rep
from snlab.category import (
    CategoryError,
    builtin,
    builtin_names,
    load_category,
    save_category,
    validate_all,
)
from snlab.lattice import (
    BasisCapExceeded,
    DEFAULT_BASIS_CAP,
    LatticeError,
    Region,
    build_open_patch,
    build_torus,
    enumerate_basis,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_CHECK = 2
EXIT_CAP = 3


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--category", default="builtin:vec_z2",
                   help="builtin:<name> or a category JSON file path")
    p.add_argument("--lx", type=int, default=2)
    p.add_argument("--ly", type=int, default=3)
    p.add_argument("--topology", choices=("torus", "open"), default="torus")
    p.add_argument("--tol-alg", type=float, default=1e-9)
    p.add_argument("--tol-ent", type=float, default=1e-7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="snlab_out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=1,
                   help="library-level parallelism (informational)")
    p.add_argument("--basis-cap", type=int, default=DEFAULT_BASIS_CAP)


def _resolve_category(spec: str):
    if spec.startswith("builtin:"):
        return builtin(spec.split(":", 1)[1])
    return load_category(spec)


def _lattice(args):
    if args.topology == "torus":
        return build_torus(args.lx, args.ly)
    return build_open_patch(args.lx, args.ly)


def _config_echo(args) -> dict:
    return {
        "category": args.category,
        "lx": args.lx,
        "ly": args.ly,
        "topology": args.topology,
        "tol_alg": args.tol_alg,
        "tol_ent": args.tol_ent,
        "seed": args.seed,
        "basis_cap": args.basis_cap,
    }


# ---------------------------------------------------------------------------
# category


def cmd_category(args) -> int:
    try:
        cat = _resolve_category(args.category)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except CategoryError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHECK if args.action == "validate" else EXIT_IO
    if args.action == "validate":
        reps = validate_all(cat)
        payload = {
            "category": cat.name,
            "rank": cat.rank,
            "checks": {
                r.check: {"pass": r.ok, "max_residual": r.max_residual,
                          "violations": len(r.violations)}
                for r in reps
            },
            "pass": all(r.ok for r in reps),
        }
        rep.write_json(os.path.join(args.out, "category_validate.json"), payload)
        rep.figure_residuals(
            {r.check: r.max_residual for r in reps},
            os.path.join(args.out, "category_validate.png"),
        )
        print(f"category {cat.name}: {'pass' if payload['pass'] else 'FAIL'}")
        return EXIT_OK if payload["pass"] else EXIT_CHECK
    if args.action == "show":
        payload = {
            "category": cat.name,
            "rank": cat.rank,
            "labels": cat.label_names,
            "dual": cat.dual,
            "qdim": [float(d) for d in cat.qdim],
            "total_dim": cat.total_dim,
            "kappa": cat.fs,
            "f_blocks": len(cat.f_blocks),
        }
        rep.write_json(os.path.join(args.out, "category_show.json"), payload)
        print(f"{cat.name}: rank {cat.rank}, D = {cat.total_dim:.10g}, "
              f"d = {[round(float(x), 10) for x in cat.qdim]}, kappa = {cat.fs}")
        return EXIT_OK
    if args.action == "convert":
        if not args.out_file:
            print("error: convert needs --out-file", file=sys.stderr)
            return EXIT_IO
        save_category(cat, args.out_file)
        print(f"wrote {args.out_file}")
        return EXIT_OK
    return EXIT_IO


# ---------------------------------------------------------------------------
# ground space


def cmd_gs(args) -> int:
    cat = _resolve_category(args.category)
    lat = _lattice(args)
    try:
        basis = enumerate_basis(cat, lat, cap=args.basis_cap)
    except BasisCapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    projs = _projectors(cat, lat, basis)
    vecs = ham.ground_space(cat, lat, basis, seed=args.seed, projectors=projs)
    os.makedirs(args.out, exist_ok=True)
    residuals = []
    for i, v in enumerate(vecs):
        ham.save_state(os.path.join(args.out, f"ground_{i}.state"), basis, v)
        residuals.append(max(float(np.linalg.norm(B @ v - v)) for B in projs))
    energy = -(len(basis.vertex_list) + len(lat.plaquettes))
    payload = {
        "config": _config_echo(args),
        "basis_dim": basis.dim,
        "degeneracy": len(vecs),
        "ground_energy": energy,
        "max_residual": max(residuals) if residuals else 0.0,
        "residuals": residuals,
        "states": [f"ground_{i}.state" for i in range(len(vecs))],
    }
    rep.write_json(os.path.join(args.out, "gs_summary.json"), payload)
    rep.figure_residuals(
        {f"g{i}": r for i, r in enumerate(residuals)},
        os.path.join(args.out, "gs_residuals.png"),
        ylabel="projector residual",
    )
    print(f"ground space: dimension {len(vecs)}, energy {energy}, "
          f"max residual {payload['max_residual']:.2e}")
    return EXIT_OK


def _projectors(cat, lat, basis):
    cache_dir = os.environ.get("SNLAB_CACHE_DIR")
    if not cache_dir:
        return ham.all_plaquette_projectors(cat, lat, basis)
    import scipy.sparse as sp

    os.makedirs(cache_dir, exist_ok=True)
    tag = ham.basis_hash(basis).hex()[:12]
    out = []
    for p in range(len(lat.plaquettes)):
        path = os.path.join(cache_dir, f"{cat.name}_{lat.topology}{lat.Lx}x{lat.Ly}_{tag}_B{p}.npz")
        if os.path.exists(path):
            out.append(sp.load_npz(path))
        else:
            B = ham.plaquette_projector(cat, lat, basis, p)
            sp.save_npz(path, B.tocsr())
            out.append(B)
    return out


# ---------------------------------------------------------------------------
# checks


def cmd_check(args) -> int:
    cat = _resolve_category(args.category)
    try:
        if args.what == "ops":
            return _check_ops(args, cat)
        if args.what == "ltqo":
            return _check_ltqo(args, cat)
        if args.what == "axioms":
            return _check_axioms(args, cat)
        if args.what == "tee":
            return _check_tee(args, cat)
        if args.what == "convex":
            return _check_convex(args, cat)
        if args.what == "merge-demo":
            return _check_merge(args, cat)
    except BasisCapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except LatticeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    print(f"error: unknown check {args.what}", file=sys.stderr)
    return EXIT_IO


def _check_ops(args, cat) -> int:
    lat = _lattice(args)
    basis = enumerate_basis(cat, lat, cap=args.basis_cap)
    alg = ham.verify_plaquette_algebra(cat, lat, basis, 0, tol=args.tol_alg)
    projs = _projectors(cat, lat, basis)
    comm = 0.0
    for a in range(len(projs)):
        for b in range(a + 1, len(projs)):
            d = projs[a] @ projs[b] - projs[b] @ projs[a]
            comm = max(comm, float(abs(d).max()))
    payload = {
        "config": _config_echo(args),
        "basis_dim": basis.dim,
        "fusion_algebra_residual": alg["fusion_algebra"],
        "adjoint_residual": alg["adjoint"],
        "hermiticity_residual": alg["hermitian"],
        "idempotency_residual": alg["idempotent"],
        "commutator_residual": comm,
        "pass": bool(alg["pass"] and comm < args.tol_alg),
    }
    _emit(args, "check_ops", payload,
          csv_rows=[(k, v) for k, v in payload.items() if isinstance(v, float)])
    rep.figure_residuals(
        {k: v for k, v in payload.items() if isinstance(v, float) and k.endswith("residual")},
        os.path.join(args.out, "check_ops.png"),
    )
    print(f"ops: {'pass' if payload['pass'] else 'FAIL'} "
          f"(algebra {alg['fusion_algebra']:.2e}, commutators {comm:.2e})")
    return EXIT_OK if payload["pass"] else EXIT_CHECK


def _check_ltqo(args, cat) -> int:
    lat = _lattice(args)
    report = ham.check_ltqo(cat, lat, args.plaquette, ell=args.ell,
                            samples=args.samples, seed=args.seed, tol=args.tol_alg)
    payload = {"config": _config_echo(args), **{k: v for k, v in report.items()}}
    _emit(args, "check_ltqo", payload,
          csv_rows=[("max_residual", report["max_residual"])])
    rep.figure_residuals(
        {"max_residual": report["max_residual"], "tolerance": args.tol_alg},
        os.path.join(args.out, "check_ltqo.png"),
    )
    print(f"ltqo: {'pass' if report['pass'] else 'FAIL'} "
          f"(max residual {report['max_residual']:.2e}, rank P = {report['rank_P']})")
    return EXIT_OK if report["pass"] else EXIT_CHECK


def _ground_state(args, cat, lat, basis):
    projs = _projectors(cat, lat, basis)
    vecs = ham.ground_space(cat, lat, basis, seed=args.seed, projectors=projs)
    return vecs, projs


def _check_axioms(args, cat) -> int:
    lat = _lattice(args)
    basis = enumerate_basis(cat, lat, cap=args.basis_cap)
    vecs, _ = _ground_state(args, cat, lat, basis)
    report = ax.verify_axioms(basis, vecs[0], lat, width=1, tol=args.tol_ent)
    payload = {"config": _config_echo(args), **report.to_json()}
    _emit(args, "check_axioms", payload,
          csv_rows=[(r.kind, r.anchor, r.value, r.passed) for r in report.records],
          csv_header=["kind", "anchor", "value", "pass"])
    rep.figure_axioms(report.to_json(), os.path.join(args.out, "check_axioms.png"))
    print(f"axioms: {'pass' if report.ok else 'FAIL'} (max |value| {report.max_value:.2e})")
    return EXIT_OK if report.ok else EXIT_CHECK


def _check_tee(args, cat) -> int:
    lat = _lattice(args)
    basis = enumerate_basis(cat, lat, cap=args.basis_cap)
    vecs, _ = _ground_state(args, cat, lat, basis)
    fit = ax.area_law_fit(basis, vecs[0], lat)
    gamma_expected = 2.0 * float(np.log(cat.total_dim))
    payload = {
        "config": _config_echo(args),
        **fit,
        "gamma_expected_lnD2": gamma_expected,
        "gamma_deviation": abs(fit["gamma"] - gamma_expected),
        "pass": bool(fit["residual"] < args.tol_ent),
    }
    _emit(args, "check_tee", payload,
          csv_rows=list(zip(fit["sizes"], fit["entropies"])),
          csv_header=["boundary_edges", "entropy"])
    rep.figure_area_law(fit, os.path.join(args.out, "check_tee.png"))
    print(f"tee: gamma = {fit['gamma']:.8f} (ln D^2 = {gamma_expected:.8f}), "
          f"alpha = {fit['alpha']:.8f}, residual {fit['residual']:.2e}")
    return EXIT_OK if payload["pass"] else EXIT_CHECK


def _convex_region(args, cat, lat):
    spec = args.region
    if spec == "disk":
        if lat.topology == "open":
            mids = [i for i, b in enumerate(lat.plaquettes)]
            return lat.plaquette_region(mids[len(mids) // 2], "disk")
        return lat.plaquette_region(0, "disk")
    if spec == "annulus":
        if lat.topology != "torus":
            raise LatticeError("the annulus region wraps a torus")
        return Region(
            frozenset(v for v in range(lat.n_vertices) if lat.coords[v][0] in (0, 1)),
            "annulus",
        )
    if spec == "boundary":
        if lat.topology != "open":
            raise LatticeError("the boundary half-annulus needs an open patch")
        ys = sorted({c[1] for c in lat.coords})
        xs = sorted({c[0] for c in lat.coords})
        midx = xs[len(xs) // 2]
        bricks = [
            i for i, b in enumerate(lat.plaquettes)
            if abs(lat.coords[b.verts[0]][0] - midx) <= 1
        ]
        verts = frozenset(v for i in bricks for v in lat.plaquettes[i].verts)
        return Region(verts, "boundary-strip")
    # plaquette-id list, e.g. "0,1,5"
    ids = [int(x) for x in spec.split(",")]
    verts = frozenset(v for i in ids for v in lat.plaquettes[i].verts)
    return Region(verts, f"plaquettes-{spec}")


def _check_convex(args, cat) -> int:
    lat = _lattice(args)
    region = _convex_region(args, cat, lat)
    dec = ax.information_convex_sectors(cat, lat, region, thickening=args.thickening,
                                        seed=args.seed)
    payload = {"config": _config_echo(args), "region": region.tag, **dec.to_json()}
    _emit(args, "check_convex", payload,
          csv_rows=[(i, b.rank, b.entropy, b.weight) for i, b in enumerate(dec.blocks)],
          csv_header=["sector", "rank", "entropy", "weight"])
    rep.figure_sectors(dec.to_json(), os.path.join(args.out, "check_convex.png"))
    print(f"convex[{region.tag}]: {dec.count} sector(s), stable = {dec.stable}")
    return EXIT_OK if dec.stable else EXIT_CHECK


def _check_merge(args, cat) -> int:
    from snlab.merges import annulus_closure_merge, markov_strip_merge

    strip = markov_strip_merge(cat, seed=args.seed)
    closure = annulus_closure_merge(cat, seed=args.seed)
    payload = {
        "config": _config_echo(args),
        "markov_strip": strip,
        "annulus_closure": {k: v for k, v in closure.items()},
        "pass": bool(strip["pass"] and closure["pass"]),
    }
    _emit(args, "check_merge", payload,
          csv_rows=[("markov_distance", strip["distance_to_global"]),
                    ("closure_weight_error", closure["weight_error"]),
                    ("closure_leakage", closure["leakage"])])
    rep.figure_residuals(
        {
            "markov_distance": strip["distance_to_global"],
            "weight_error": closure["weight_error"],
            "leakage": abs(closure["leakage"]),
        },
        os.path.join(args.out, "check_merge.png"),
    )
    print(f"merge-demo: {'pass' if payload['pass'] else 'FAIL'} "
          f"(strip {strip['distance_to_global']:.2e}, "
          f"closure weight err {closure['weight_error']:.2e})")
    return EXIT_OK if payload["pass"] else EXIT_CHECK


def _emit(args, name, payload, csv_rows=None, csv_header=None) -> None:
    if args.format == "json":
        rep.write_json(os.path.join(args.out, f"{name}.json"), payload)
    else:
        rep.write_csv(
            os.path.join(args.out, f"{name}.csv"),
            csv_header or ["key", "value"],
            csv_rows or [],
        )
        rep.write_json(os.path.join(args.out, f"{name}.json"), payload)


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="snlab", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_cat = sub.add_parser("category", help="validate / show / convert a category")
    p_cat.add_argument("action", choices=("validate", "show", "convert"))
    p_cat.add_argument("--out-file", default=None)
    _common_flags(p_cat)

    p_gs = sub.add_parser("gs", help="compute and store the exact ground space")
    _common_flags(p_gs)

    p_chk = sub.add_parser("check", help="run a verification suite")
    p_chk.add_argument("what", choices=("ops", "ltqo", "axioms", "tee", "convex", "merge-demo"))
    p_chk.add_argument("--plaquette", type=int, default=0)
    p_chk.add_argument("--ell", type=int, default=1)
    p_chk.add_argument("--samples", type=int, default=20)
    p_chk.add_argument("--region", default="disk")
    p_chk.add_argument("--thickening", type=int, default=2)
    _common_flags(p_chk)

    args = parser.parse_args(argv)
    try:
        if args.cmd == "category":
            return cmd_category(args)
        if args.cmd == "gs":
            return cmd_gs(args)
        if args.cmd == "check":
            return cmd_check(args)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
