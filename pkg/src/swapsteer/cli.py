"""Command-line front end.

Exit codes: 0 success, 2 usage or parse error, 3 numeric verification failure.
Reports are deterministic for fixed inputs and seeds.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import SOHS_BOUND, quantum_gap_report, sohs_grid_oracle, trusted_cell_max, tsohs_value
from .errors import (
    HypothesisViolation,
    SwapSteerError,
    UnsupportedOracleError,
    UnsupportedStateError,
    UsageError,
    VerificationFailure,
)
from .network import MAX_NODES, bell_swap_residuals, joint_distribution, joint_distribution_swapchain
from .noise import VisibilityConfig, noisy_witness_value, triangle_closed_form, visibility_grid, visibility_threshold
from .selftest import (
    certify_realization,
    gauge_realization,
    ideal_realization,
    random_realization,
    verify_premises,
)
from .serialize import dumps_report, resolve_strategy, resolve_target_state, table_from_csv, table_to_csv
from .qcore import haar_unitary
from .universal import (
    build_universal_network,
    closed_form,
    closed_form_swapped,
    decompose,
    evaluate_universal,
    npt_witness,
    universal_sohs_check,
)
from .witness import evaluate, ring_witness, support_csv

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
SWAP_TOL = 1e-12
UNIVERSAL_TOL = 1e-9


def _n_arg(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--n: {text!r} is not an integer") from None
    if not 2 <= n <= MAX_NODES:
        raise argparse.ArgumentTypeError(f"--n must lie in 2..{MAX_NODES}")
    return n


def _levels_arg(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--levels: cannot parse {text!r}") from None


def _dims_arg(text: str) -> tuple[int, int]:
    try:
        d = tuple(int(x) for x in text.split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--dims: cannot parse {text!r}") from None
    if len(d) != 2:
        raise argparse.ArgumentTypeError("--dims takes two factors, e.g. 2x3")
    return d


def _read_table(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"--table: file {path} does not exist")
    return table_from_csv(p.read_text())


def cmd_simulate(args) -> tuple[str, int]:
    net = resolve_strategy(args.strategy, args.n)
    if args.method == "swapchain":
        table = joint_distribution_swapchain(net)
    else:
        table = joint_distribution(net, method=args.method)
    if args.format == "csv":
        return table_to_csv(table), EXIT_OK
    report = {
        "n": args.n,
        "strategy": args.strategy,
        "method": args.method,
        "probabilities": {"".join(map(str, k)): p for k, p in table.items()},
    }
    return dumps_report(report), EXIT_OK


def cmd_witness(args) -> tuple[str, int]:
    w = ring_witness(args.n)
    if args.list:
        return support_csv(w), EXIT_OK
    table = _read_table(args.table) if args.table else joint_distribution(resolve_strategy(args.strategy, args.n))
    report = {
        "n": args.n,
        "source": args.table or args.strategy,
        "support_size": w.support_size(),
        "value": evaluate(w, table),
    }
    return dumps_report(report), EXIT_OK


def cmd_bound(args) -> tuple[str, int]:
    w = ring_witness(args.n)
    res = tsohs_value(w, restarts=args.restarts, seed=args.seed)
    cell = trusted_cell_max(restarts=args.restarts, seed=args.seed)
    report = {
        "n": args.n,
        "tsohs": res.to_dict(),
        "trusted_cell_max": cell.to_dict(),
        "quantum_gap": quantum_gap_report(w, resolve_strategy("ideal", args.n),
                                          restarts=args.restarts, seed=args.seed).to_dict(),
    }
    status = EXIT_OK
    if args.grid:
        g = sohs_grid_oracle(args.grid)
        report["grid_oracle"] = {"resolution": args.grid, "value": g}
        if g > SOHS_BOUND + 1e-10:
            status = EXIT_NUMERIC
    return dumps_report(report), status


def cmd_noise_sweep(args) -> tuple[str, int]:
    n = args.n
    header = [f"v{i + 1}" for i in range(n)] + [f"w{j + 2}" for j in range(n - 1)] + ["value"]
    if n == 3:
        header.append("closed_form")
    lines = [",".join(header)]
    for cfg in visibility_grid(args.levels, n):
        row = [f"{x:.12g}" for x in cfg.source + cfg.measurement]
        row.append(f"{noisy_witness_value(n, cfg):.12g}")
        if n == 3:
            row.append(f"{triangle_closed_form(cfg):.12g}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_threshold(args) -> tuple[str, int]:
    res = visibility_threshold(args.n, target=args.target, tol=args.tol)
    report = res.to_dict()
    report["target"] = args.target
    report["tolerance"] = args.tol
    report["value_at_threshold"] = res.value_at_threshold
    return dumps_report(report), EXIT_OK


def cmd_universal(args) -> tuple[str, int]:
    rng = np.random.default_rng(args.seed)
    rho = resolve_target_state(args.state, args.dims, rng)
    w = npt_witness(rho)
    unet = build_universal_network(rho, args.n)
    dec = decompose(w, unet.basis_a, unet.basis_b)
    s = evaluate_universal(unet, dec)
    sohs = universal_sohs_check(dec, samples=args.samples, seed=args.seed)
    cf = closed_form(w, rho, args.n)
    cf_branch = closed_form_swapped(w, rho, args.n)
    report = {
        "n": args.n,
        "state": args.state,
        "dims": list(rho.dims),
        "S_value": s,
        "closed_form": cf,
        "closed_form_matches": abs(s - cf) <= UNIVERSAL_TOL,
        "closed_form_branch_weight": cf_branch,
        "branch_weight": unet.branch_weight,
        "witness_trace": float(np.trace(w.matrix @ rho.matrix).real),
        "decomposition_residual": dec.residual(),
        "sohs_check_max": sohs,
        "sohs_samples": args.samples,
    }
    ok = s > 0 and sohs <= UNIVERSAL_TOL and abs(s - cf_branch) <= UNIVERSAL_TOL
    return dumps_report(report), EXIT_OK if ok else EXIT_NUMERIC


def cmd_selftest(args) -> tuple[str, int]:
    if args.table:
        premises = verify_premises(_read_table(args.table), args.profile)
        report = {"source": args.table, "premises": premises.to_dict()}
        ok = premises.passed
    else:
        rng = np.random.default_rng(args.seed)
        if args.strategy == "ideal":
            real = ideal_realization()
        elif args.strategy == "gauge":
            real = gauge_realization(haar_unitary(2, rng))
        else:
            real = random_realization(rng)
        cert = certify_realization(real, args.profile)
        report = {"source": args.strategy, "seed": args.seed, "certification": cert.to_dict()}
        ok = cert.certified
    status = EXIT_NUMERIC if args.require_pass and not ok else EXIT_OK
    return dumps_report(report), status


def cmd_swap_check(args) -> tuple[str, int]:
    res = bell_swap_residuals()
    report = {"residuals": res, "tolerance": SWAP_TOL, "passed": max(res) <= SWAP_TOL}
    return dumps_report(report), EXIT_OK if report["passed"] else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swapsteer", description="Swap-steering network toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="write the report to this file instead of stdout")
        sp.set_defaults(func=func)
        return sp

    sp = add("simulate", cmd_simulate, "joint outcome distribution of a ring network")
    sp.add_argument("--n", type=_n_arg, default=3)
    sp.add_argument("--strategy", default="ideal", help="ideal, werner:V or a scenario JSON file")
    sp.add_argument("--method", choices=("transfer", "dense", "swapchain"), default="transfer")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = add("witness", cmd_witness, "evaluate the ring witness W_n")
    sp.add_argument("--n", type=_n_arg, default=3)
    sp.add_argument("--strategy", default="ideal")
    sp.add_argument("--table", help="correlation CSV to evaluate instead of a strategy")
    sp.add_argument("--list", action="store_true", help="print the supported outcome strings")

    sp = add("bound", cmd_bound, "classical bound of W_n by multi-start optimization")
    sp.add_argument("--n", type=_n_arg, default=3)
    sp.add_argument("--restarts", type=int, default=32)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--grid", type=int, default=0, help="also run the grid oracle at this resolution")

    sp = add("noise-sweep", cmd_noise_sweep, "W_n over a grid of visibilities")
    sp.add_argument("--n", type=_n_arg, default=3)
    sp.add_argument("--levels", type=_levels_arg, default=[0.0, 0.5, 1.0])

    sp = add("threshold", cmd_threshold, "combined visibility at which W_n reaches the target")
    sp.add_argument("--n", type=_n_arg, default=3)
    sp.add_argument("--target", type=float, default=SOHS_BOUND)
    sp.add_argument("--tol", type=float, default=1e-6)

    sp = add("universal", cmd_universal, "swap-steering functional for an NPT target state")
    sp.add_argument("--n", type=_n_arg, default=3)
    sp.add_argument("--state", default="phi+", help="phi+, werner:V, random-npt:AxB or a matrix file")
    sp.add_argument("--dims", type=_dims_arg, help="factor dimensions for a matrix file, e.g. 2x3")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("selftest", cmd_selftest, "check premises and certify a triangle realization")
    sp.add_argument("--table", help="correlation CSV to check against the premises")
    sp.add_argument("--strategy", choices=("ideal", "gauge", "random"), default="ideal")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--profile", choices=("exact", "experimental"), default="exact")
    sp.add_argument("--require-pass", action="store_true", help="exit 3 unless the check passes")

    add("swap-check", cmd_swap_check, "verify the four Bell-swap identities")
    return p


_NUMERIC_ERRORS = (UnsupportedStateError, UnsupportedOracleError, HypothesisViolation, VerificationFailure)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text, status = args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(f"swapsteer {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SwapSteerError, ValueError) as exc:
        print(f"swapsteer {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
