"""Command-line front end.

    dirac-lab resonances --builtin square:A=1,gamma=1 --region -30,30,-5,0
    dirac-lab verify --potential pot.json --out results/
    dirac-lab scatter --builtin two_bump:A=1,w=0.25,gap=0.5 --lam -10,10,201
    dirac-lab counting --builtin square:A=1,gamma=1 --rmax 200 --region -210,210,-20,0
    dirac-lab potential-info --potential pot.csv

Exit codes: 0 ok, 2 bad input, 3 evaluation range, 4 boundary zero,
5 a guaranteed inequality failed.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from dirac_lab import estimates
from dirac_lab.errors import BoundaryZeroError, DiracLabError, EvaluationRangeError, InvalidPotentialError, TruncationError
from dirac_lab.jost.api import smatrix
from dirac_lab.jost.transfer import transfer
from dirac_lab.output import dumps_csv, dumps_json, write_atomic
from dirac_lab.potential import Potential, l1_norm, load, parse_builtin_spec
from dirac_lab.rootfinder import DEPTH_GUARD, Rectangle, RootConfig, counting_function, find_resonances

log = logging.getLogger("dirac_lab")

DEFAULT_REGION = "-50,50,-20,-1e-12"
EXIT_PARSE, EXIT_RANGE, EXIT_BOUNDARY, EXIT_DEFECT = 2, 3, 4, 5


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirac-lab", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--potential", metavar="FILE", help="JSON {cells:[{h,re,im}]} or CSV rows h,re,im")
    src.add_argument("--builtin", metavar="SPEC", help="name:key=val,... e.g. square:A=1,gamma=1")
    common.add_argument("--seed", type=int, default=0, help="seed for random_cells when the spec omits one")
    common.add_argument("--out", metavar="DIR", help="write result files here instead of stdout")

    roots = argparse.ArgumentParser(add_help=False)
    roots.add_argument("--region", default=DEFAULT_REGION, help="re_min,re_max,im_min,im_max")
    roots.add_argument("--tol", type=float, default=1e-12, help="Newton step tolerance")
    roots.add_argument("--residual-tol", type=float, default=1e-9)
    roots.add_argument("--cluster-factor", type=float, default=1e-8)
    roots.add_argument("--max-depth", type=int, default=40)
    roots.add_argument("--jitter-tries", type=int, default=8)
    roots.add_argument("--allow-deep", action="store_true", help="search below Im = -40/gamma")

    p = sub.add_parser("resonances", parents=[common, roots], help="find zeros of a in a region")
    p.set_defaults(func=cmd_resonances)

    p = sub.add_parser("verify", parents=[common, roots], help="run every bound check")
    p.add_argument("--p", default="1.1,1.5,2,3", help="exponents for the resonance sum bound")
    p.add_argument("--rmax", type=float, help="largest r for counting checks (default: disk covered by region)")
    p.add_argument("--jensen-r", default="5,10,20", help="radii for the Jensen identity")
    p.add_argument("--drop-resonance", type=int, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scatter", parents=[common], help="sample a, b and S-matrix unitarity on the real line")
    p.add_argument("--lam", default="-10,10,201", help="lam_min,lam_max,n_points")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("counting", parents=[common, roots], help="N(r), N(r)/r and the counting bound")
    p.add_argument("--rmax", type=float, help="largest r (default: disk covered by region)")
    p.add_argument("--rstep", type=float, default=1.0)
    p.set_defaults(func=cmd_counting)

    p = sub.add_parser("potential-info", parents=[common], help="summary of a potential")
    p.set_defaults(func=cmd_potential_info)
    return parser


def load_potential(args) -> Potential:
    if args.potential:
        return load(args.potential)
    spec = args.builtin
    if spec.startswith("random_cells") and "seed=" not in spec:
        spec += ("," if ":" in spec else ":") + f"seed={args.seed}"
    return parse_builtin_spec(spec)


def root_config(args) -> RootConfig:
    return RootConfig(
        newton_tol=args.tol,
        residual_tol=args.residual_tol,
        cluster_factor=args.cluster_factor,
        max_depth=args.max_depth,
        jitter_tries=args.jitter_tries,
        allow_deep=args.allow_deep,
    )


def region(args, pot: Potential) -> Rectangle:
    try:
        rect = Rectangle.parse(args.region)
    except ValueError as exc:
        raise InvalidPotentialError(f"bad --region: {exc}") from exc
    gamma = pot.tight_gamma
    if args.region == DEFAULT_REGION and gamma > 0 and rect.im_min < -DEPTH_GUARD / gamma:
        # keep the default inside the validated depth for wide supports
        rect = Rectangle(rect.re_min, rect.re_max, -DEPTH_GUARD / gamma, rect.im_max)
    return rect


def covered_radius(rect: Rectangle) -> float:
    """Largest r whose lower half-disk about 0 lies inside the region."""
    return max(0.0, min(-rect.re_min, rect.re_max, -rect.im_min))


def emit(args, files: dict[str, str], stdout_key: str) -> None:
    if args.out:
        for name, text in files.items():
            write_atomic(Path(args.out) / name, text)
    else:
        sys.stdout.write(files[stdout_key])


def resonance_rows(res):
    return [(r.location.real, r.location.imag, r.multiplicity) for r in res]


def cmd_resonances(args) -> int:
    pot = load_potential(args)
    res = find_resonances(pot, region(args, pot), root_config(args))
    emit(
        args,
        {
            "resonances.json": dumps_json([r.to_dict() for r in res]),
            "resonances.csv": dumps_csv(["re", "im", "multiplicity"], resonance_rows(res)),
        },
        "resonances.json",
    )
    return 0


def cmd_verify(args) -> int:
    pot = load_potential(args)
    rect = region(args, pot)
    cfg = root_config(args)
    res = find_resonances(pot, rect, cfg)
    p_values = _floats(args.p)
    if any(p <= 1 for p in p_values):
        raise InvalidPotentialError("--p values must all exceed 1")
    rcov = covered_radius(rect)
    rmax = min(args.rmax, rcov) if args.rmax else rcov

    reports = []
    lam_grid = _envelope_grid(rect)
    reports.append(estimates.envelope_report(pot, lam_grid))
    for pv in p_values:
        reports.append(estimates.sum_bound_report(pv, pot, res))
    r_grid = _r_grid(rmax)
    counting = [estimates.counting_bound_report(pot, res, r) for r in r_grid]
    worst = min(counting, key=lambda rep: rep.margin) if counting else None
    if worst is not None:
        worst.params["n_radii"] = len(counting)
        worst.params["all_pass"] = all(rep.passed for rep in counting)
        worst.passed = worst.params["all_pass"]
        reports.append(worst)

    jensen_res = list(res)
    if args.drop_resonance is not None and jensen_res:
        jensen_res.pop(args.drop_resonance % len(jensen_res))
    for r in _floats(args.jensen_r):
        # radii beyond the searched disk get their own zero search
        covered = r <= rcov * (1 - 1e-2)
        rep = estimates.jensen_check(pot, r, jensen_res if covered else None, cfg)
        reports.append(rep)
        reports.append(
            estimates.BoundReport(
                "jensen_majorant",
                rep.rhs,
                rep.params.get("majorant", math.nan),
                {"r": rep.params.get("r", r)},
                passed=bool(rep.params.get("majorant_holds", False)),
            )
        )

    t_max = max(0.0, min(-rect.re_min, rect.re_max) - 10.0)
    t_grid = np.arange(-math.floor(t_max / 5) * 5, t_max + 1e-9, 5.0) if t_max > 0 else np.array([0.0])
    r_probe = [r for r in (0.5, 0.9, 2.0, 5.0, 10.0) if r - 1 <= -rect.im_min]
    probes, carl = estimates.carleson_sweep(pot, res, t_grid, r_probe)
    reports.append(carl)

    records = [rep.to_dict() for rep in reports]
    files = {
        "reports.json": dumps_json(records),
        "resonances.json": dumps_json([r.to_dict() for r in res]),
        "resonances.csv": dumps_csv(["re", "im", "multiplicity"], resonance_rows(res)),
        "counting.csv": dumps_csv(
            ["r", "N", "N_over_r", "bound"],
            [(r, counting_function(res, r), counting_function(res, r) / r, estimates.counting_rhs(pot, r)) for r in r_grid],
        ),
        "carleson.csv": dumps_csv(["t", "r", "mass"], [(pr.t, pr.r, pr.mass) for pr in probes]),
    }
    emit(args, files, "reports.json")
    failed = [rep.name for rep in reports if not rep.passed]
    if failed:
        print(f"dirac-lab verify: guaranteed inequality failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_DEFECT
    return 0


def _envelope_grid(rect: Rectangle) -> np.ndarray:
    re = np.linspace(rect.re_min, rect.re_max, 41)
    im = np.linspace(rect.im_min, -rect.im_min, 21)
    grid = (re[:, None] + 1j * im[None, :]).ravel()
    return np.concatenate((grid, np.linspace(rect.re_min, rect.re_max, 1000).astype(complex)))


def _r_grid(rmax: float, step: float = 1.0) -> list[float]:
    if rmax <= 0:
        return []
    n = int(math.floor(rmax / step + 1e-9))
    return [step * (k + 1) for k in range(n)]


def cmd_scatter(args) -> int:
    pot = load_potential(args)
    try:
        lo, hi, n = _floats(args.lam)
    except ValueError:
        raise InvalidPotentialError("--lam must be lam_min,lam_max,n") from None
    n = int(n)
    if n < 1:
        raise InvalidPotentialError("--lam needs at least one point")
    lams = np.array([lo]) if n == 1 else np.linspace(lo, hi, n)
    r = transfer(pot, lams)
    a = r.true_a()
    b = r.b * np.exp(r.log_scale)
    rows = []
    for lam, av, bv in zip(lams, a, b):
        s = smatrix(pot, float(lam))
        defect = float(np.max(np.abs(s.conj().T @ s - np.eye(2))))
        rows.append((float(lam), av.real, av.imag, bv.real, bv.imag, defect))
    emit(args, {"scatter.csv": dumps_csv(["lam", "re_a", "im_a", "re_b", "im_b", "unitarity_defect"], rows)}, "scatter.csv")
    return 0


def cmd_counting(args) -> int:
    pot = load_potential(args)
    rect = region(args, pot)
    res = find_resonances(pot, rect, root_config(args))
    rcov = covered_radius(rect)
    rmax = min(args.rmax, rcov) if args.rmax else rcov
    rows = []
    for r in _r_grid(rmax, args.rstep):
        n = counting_function(res, r)
        rows.append((r, n, n / r, estimates.counting_rhs(pot, r)))
    emit(args, {"counting.csv": dumps_csv(["r", "N", "N_over_r", "bound"], rows)}, "counting.csv")
    return 0


def cmd_potential_info(args) -> int:
    pot = load_potential(args)
    info = {
        "n_cells": len(pot.cells),
        "gamma": pot.gamma,
        "tight_gamma": pot.tight_gamma,
        "l1_norm": l1_norm(pot),
        "exclusion_depth": estimates.exclusion_depth(pot),
        "cells": pot.to_dict()["cells"],
    }
    emit(args, {"potential.json": dumps_json(info)}, "potential.json")
    return 0


def _glue_values(argv: list[str]) -> list[str]:
    """Let ``--region -30,30,-5,0`` through argparse, which reads it as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _LIST_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


_LIST_FLAGS = {"--region", "--lam", "--p", "--jensen-r"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_values(list(sys.argv[1:] if argv is None else argv)))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvalidPotentialError as exc:
        print(f"dirac-lab {args.command}: input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (EvaluationRangeError, TruncationError) as exc:
        print(f"dirac-lab {args.command}: evaluation: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except BoundaryZeroError as exc:
        print(f"dirac-lab {args.command}: root finding: {exc}", file=sys.stderr)
        return EXIT_BOUNDARY
    except DiracLabError as exc:
        print(f"dirac-lab {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
