"""Command-line interface.

Commands: gen, estimate, oracle, transfer, parent-gap, bench-scaling.
Exit codes: 0 success, 1 usage or input error, 2 resource/budget error,
3 numerical failure. When an output path is given, errors are also written
into the result document with a machine-readable code.
"""

from __future__ import annotations

import os

# Optional thread-count override; must land before numpy is imported.
_threads = os.environ.get("PEPSKIT_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import __version__
from .errors import ArgumentError, NumericalError, PepskitError, SizeBudgetError
from .fileio import (
    read_observable,
    read_peps,
    result_document,
    write_document,
    write_peps,
)
from .generators import aklt_chain, product_peps, random_injective_peps
from .lattice import LatticeSpec
from .observables import Observable, preset_matrix
from .oracle import exact_expectation
from .parent import uniform_gap_scan
from .patch import adaptive_estimate, patch_expectation
from .peps import PepsState
from .transfer import (
    decay_fit,
    dressed_transfer,
    site_transfer_operator,
    spectrum,
    strip_transfer_operator,
    transfer_correlation,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BUDGET = 2
EXIT_NUMERICAL = 3


def _parse_lattice(text: str) -> LatticeSpec:
    parts = text.lower().split("x")
    try:
        extents = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ArgumentError(f"cannot parse lattice size {text!r}") from exc
    return LatticeSpec(dimension=len(extents), extents=extents)


def _parse_site(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(c) for c in text.split(","))
    except ValueError as exc:
        raise ArgumentError(f"cannot parse site {text!r}") from exc


def _parse_range(text: str) -> range:
    try:
        lo, hi = (int(p) for p in text.split(":"))
    except ValueError as exc:
        raise ArgumentError(f"cannot parse range {text!r}, expected lo:hi") from exc
    if hi < lo:
        raise ArgumentError(f"empty range {text!r}")
    return range(lo, hi + 1)


def _load_observable(spec: str, site: str | None) -> Observable:
    """Preset name plus --site, or a path to an observable file."""
    if os.path.exists(spec):
        return read_observable(spec)
    matrix = preset_matrix(spec)
    if site is None:
        raise ArgumentError(f"preset observable {spec!r} needs --site")
    return Observable(sites=(_parse_site(site),), matrix=matrix)


def _emit(doc: dict, out_path: str | None):
    if out_path:
        write_document(doc, out_path)
    else:
        json.dump(doc, sys.stdout, indent=1, sort_keys=True)
        sys.stdout.write("\n")


def _cmd_gen(args) -> dict:
    if args.kind == "product":
        peps = product_peps(_parse_lattice(args.lattice), args.bond_dim, args.phys_dim)
    elif args.kind == "perturbed":
        peps = random_injective_peps(
            _parse_lattice(args.lattice), args.bond_dim, args.phys_dim, args.eta, args.seed
        )
    else:
        peps = aklt_chain(args.n)
    write_peps(peps, args.out)
    return {"written": args.out, "sites": peps.lattice.n_sites}


def _estimate_payload(est) -> dict:
    payload = {
        "value": est.value,
        "radius_used": est.radius_used,
        "bound": est.bound,
        "patch_size": est.patch_size,
        "wall_time_ms": est.wall_time * 1e3,
        "mode": est.mode,
    }
    if est.ladder is not None:
        payload["ladder"] = list(est.ladder)
    return payload


def _cmd_estimate(args) -> dict:
    peps = read_peps(args.peps)
    obs = _load_observable(args.obs, args.site)
    if (args.ell is None) == (args.epsilon is None):
        raise ArgumentError("pass exactly one of --ell or --epsilon")
    kwargs = dict(gap=args.gap, kappa_star=args.kappa_star, clustering_c=args.constant)
    if args.ell is not None:
        est = patch_expectation(peps, obs, args.ell, **kwargs)
    else:
        est = adaptive_estimate(peps, obs, args.epsilon, **kwargs)
    return {"estimate": _estimate_payload(est)}


def _cmd_oracle(args) -> dict:
    peps = read_peps(args.peps)
    obs = _load_observable(args.obs, args.site)
    res = exact_expectation(peps, obs)
    return {
        "oracle": {
            "value": res.value,
            "norm_sq": res.norm_sq,
            "sites_used": res.sites_used,
            "wall_time_ms": res.wall_time * 1e3,
        }
    }


def _spectrum_payload(rep) -> dict:
    return {
        "lambda1": rep.lambda1,
        "lambda2": rep.lambda2,
        "ratio": rep.ratio,
        "delta_bound": rep.delta_bound,
        "unique_top": rep.unique_top,
    }


def _cmd_transfer(args) -> dict:
    peps = read_peps(args.peps)
    results: dict = {}
    if peps.lattice.dimension == 1:
        n = peps.lattice.n_sites
        site = args.site_index if args.site_index is not None else n // 2
        if not 0 < site < n - 1:
            raise ArgumentError(f"transfer site {site} must be an interior site of the chain")
        t = peps.tensors[(site,)]
        op = site_transfer_operator(t)
        results["spectrum"] = _spectrum_payload(spectrum(op))
        if args.obs_a and args.obs_b:
            oa = preset_matrix(args.obs_a) if not os.path.exists(args.obs_a) else read_observable(args.obs_a).matrix
            ob = preset_matrix(args.obs_b) if not os.path.exists(args.obs_b) else read_observable(args.obs_b).matrix
            e_oa, e_ob = dressed_transfer(t, oa), dressed_transfer(t, ob)
            xs = list(_parse_range(args.x_range))
            results["correlations"] = [
                {"x": x, "value": transfer_correlation(op, e_oa, e_ob, x, args.length)} for x in xs
            ]
            if len(xs) >= 2:
                rate, r2 = decay_fit(op, e_oa, e_ob, xs, args.length)
                results["decay_fit"] = {"rate": rate, "r_squared": r2}
    else:
        n_rows, n_cols = peps.lattice.extents
        column = args.column if args.column is not None else n_cols // 2
        width = args.width if args.width is not None else min(4, n_rows)
        op = strip_transfer_operator(peps, column, width)
        results["spectrum"] = _spectrum_payload(spectrum(op))
        results["strip"] = {"column": column, "width": width, "d_eff": op.d_eff}
    return results


def _gap_payload(rep) -> dict:
    out = {
        "chain_length": rep.chain_length,
        "ground_energy": rep.ground_energy,
        "gap": rep.gap,
        "ground_fidelity": rep.ground_fidelity,
    }
    if rep.uniform_min_gap is not None:
        out["uniform_min_gap"] = rep.uniform_min_gap
    if rep.warning:
        out["warning"] = rep.warning
    # gap scans are numerical evidence for a uniform gap, not a proof
    out["note"] = "finite-size scan; evidence only"
    return out


def _cmd_parent_gap(args) -> dict:
    peps = read_peps(args.peps)
    max_n = args.max_n if args.max_n is not None else peps.lattice.n_sites
    rep = uniform_gap_scan(peps, max_n)
    return {"parent_gap": _gap_payload(rep)}


def _cmd_bench_scaling(args) -> dict:
    sizes = [s for s in args.lattice_sizes.split(",") if s]
    ells = [int(e) for e in args.ells.split(",") if e]
    rows = []
    for size in sizes:
        lattice = _parse_lattice(size)
        peps = random_injective_peps(lattice, args.bond_dim, args.phys_dim, args.eta, args.seed)
        center = tuple(e // 2 for e in lattice.extents)
        obs = Observable(sites=(center,), matrix=preset_matrix(args.obs))
        for ell in ells:
            row = {
                "N": lattice.n_sites,
                "ell": ell,
                "D": args.bond_dim,
                "d": args.phys_dim,
                "patch_size": "",
                "wall_time_ms": "",
                "value": "",
            }
            try:
                best = None
                for _ in range(args.repeats):
                    est = patch_expectation(peps, obs, ell)
                    best = est if best is None or est.wall_time < best.wall_time else best
                row["patch_size"] = best.patch_size
                row["wall_time_ms"] = format(best.wall_time * 1e3, ".6g")
                row["value"] = format(best.value.real, ".17g")
            except SizeBudgetError as exc:
                row["value"] = f"ERROR:budget:{exc.predicted_size}"
            rows.append(row)
    fields = ["N", "ell", "D", "d", "patch_size", "wall_time_ms", "value"]
    handle = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(handle, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            handle.close()
    return {"rows": len(rows), "written": args.out or "<stdout>"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pepskit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pepskit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a PEPS file")
    p.add_argument("kind", choices=["product", "perturbed", "aklt"])
    p.add_argument("--lattice", default="3x3", help="extents like 3x3 or 8 (1D)")
    p.add_argument("--phys-dim", type=int, default=2)
    p.add_argument("--bond-dim", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=8, help="chain length for aklt")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_gen, writes_doc=False)

    p = sub.add_parser("estimate", help="patch estimate of a local observable")
    p.add_argument("peps")
    p.add_argument("--obs", required=True, help="preset name or observable file")
    p.add_argument("--site", help="support site for preset observables, e.g. 2,2")
    p.add_argument("--ell", type=int, help="fixed patch radius")
    p.add_argument("--epsilon", type=float, help="adaptive target accuracy")
    p.add_argument("--gap", type=float, default=1.0, help="spectral gap for the bound report")
    p.add_argument("--kappa-star", type=float, default=1.0, help="condition bound for the bound report")
    p.add_argument("--constant", type=float, default=1.0, help="clustering-rate constant c")
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_estimate, writes_doc=True)

    p = sub.add_parser("oracle", help="exact expectation value (exponential cost)")
    p.add_argument("peps")
    p.add_argument("--obs", required=True)
    p.add_argument("--site")
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_oracle, writes_doc=True)

    p = sub.add_parser("transfer", help="transfer-operator spectrum and correlations")
    p.add_argument("peps")
    p.add_argument("--site-index", type=int, help="1D: chain site for the transfer operator")
    p.add_argument("--column", type=int, help="2D: strip column")
    p.add_argument("--width", type=int, help="2D: strip width (rows)")
    p.add_argument("--obs-a", help="dressing operator A (preset or file)")
    p.add_argument("--obs-b", help="dressing operator B (preset or file)")
    p.add_argument("--length", type=int, default=64, help="line length L")
    p.add_argument("--x-range", default="1:4", help="separations lo:hi")
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_transfer, writes_doc=True)

    p = sub.add_parser("parent-gap", help="parent-Hamiltonian uniform gap scan (1D)")
    p.add_argument("peps")
    p.add_argument("--max-n", type=int)
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_parent_gap, writes_doc=True)

    p = sub.add_parser("bench-scaling", help="patch cost vs lattice size benchmark (CSV)")
    p.add_argument("--lattice-sizes", required=True, help="comma list like 6x6,8x8")
    p.add_argument("--ells", required=True, help="comma list like 0,1,2")
    p.add_argument("--phys-dim", type=int, default=2)
    p.add_argument("--bond-dim", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--obs", default="pauli-z")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_bench_scaling, writes_doc=True)
    return parser


def _config_echo(args) -> dict:
    skip = {"func", "writes_doc", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    t0 = time.perf_counter()
    out_path = getattr(args, "out", None) if getattr(args, "writes_doc", False) else None
    try:
        results = args.func(args)
    except PepskitError as exc:
        code = EXIT_INPUT
        if isinstance(exc, SizeBudgetError):
            code = EXIT_BUDGET
        elif isinstance(exc, NumericalError):
            code = EXIT_NUMERICAL
        doc = result_document(
            args.command,
            _config_echo(args),
            {"error": {"code": exc.code, "message": str(exc)}},
        )
        if out_path:
            try:
                write_document(doc, out_path)
            except OSError:
                pass
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return code
    except np.linalg.LinAlgError as exc:
        print(f"error[numerical]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "writes_doc", False) and args.command != "bench-scaling":
        doc = result_document(
            args.command,
            _config_echo(args),
            results,
            timings={"total_ms": (time.perf_counter() - t0) * 1e3},
        )
        _emit(doc, getattr(args, "out", None))
    else:
        print(json.dumps(results), file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
