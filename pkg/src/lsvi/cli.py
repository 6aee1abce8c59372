"""Command-line entry point.

Subcommands:

* ``lsvi sweep <config>``          run a (method, rho) sweep from a config file
* ``lsvi verify [--seed N]``       run every certificate on the built-in zoo
* ``lsvi grid build <path>``       precompute the logistic lookup table
* ``lsvi grid inspect <path>``     print a table's header and spot values
* ``lsvi synth <spec> --out FILE`` write a synthetic dataset CSV

Exit codes: 0 success, 2 configuration error, 3 data error, 4 certificate
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import grid as grid_mod
from .data import synth_dataset, write_dataset_csv
from .energy import (
    LinearRegressionEnergy,
    LogisticRegressionEnergy,
    QuadraticEnergy,
    gaussian_target,
)
from .exceptions import ConfigError, DataError, LsviError
from .locscale import standard_gaussian
from .optimize import OptimizerConfig, run_proximal
from .sweep import parse_config, run_sweep
from .verify import (
    CertificateReport,
    certify_convexity,
    certify_diag_grad_bound,
    certify_elbo_smooth_on_region,
    certify_smoothness,
    certify_solution_region,
    certify_strong_solution,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CERTIFICATE = 4


def verify_all(seed: int = 0, negative_control: bool = False) -> list[CertificateReport]:
    """Run every certificate on the built-in model zoo.

    The zoo: an isotropic quadratic (exact smoothness/convexity witness), an
    isotropic Gaussian target optimized to stationarity, and synthetic linear
    and logistic instances.  With ``negative_control`` the witness thresholds
    are tightened by a factor of two; those certificates are expected to fail,
    which demonstrates the checks have teeth.
    """
    reports: list[CertificateReport] = []

    # exact witness target: worst smoothness ratio equals the curvature
    a = 2.0
    quad = QuadraticEnergy(a, np.array([1.0, -2.0, 0.5, 3.0]))
    base_q = standard_gaussian(quad.dim)
    reports.append(
        certify_smoothness(quad, base_q, trials=1000, seed=seed, claim="smoothness-quadratic")
    )
    reports.append(
        certify_convexity(
            quad, base_q, trials=500, seed=seed, c=a, claim="strong-convexity-quadratic"
        )
    )
    reports.append(
        certify_elbo_smooth_on_region(
            quad, base_q, trials=500, seed=seed, claim="objective-smooth-on-region-quadratic"
        )
    )
    reports.append(
        certify_diag_grad_bound(quad, base_q, trials=200, seed=seed, claim="diag-bound-quadratic")
    )

    # isotropic Gaussian target optimized to stationarity
    variance = 0.25
    z_star = np.array([1.0, -0.5, 2.0])
    target = gaussian_target(variance, z_star)
    base_t = standard_gaussian(target.dim)
    opt = OptimizerConfig(method="proximal", gamma=1.0 / target.smoothness_M, max_iters=5000)
    trace = run_proximal(target, base_t, opt)
    w_star = trace.final_params
    reports.append(
        certify_solution_region(
            w_star, target.smoothness_M, claim="solution-in-region-gaussian"
        )
    )
    reports.append(
        certify_strong_solution(
            w_star,
            target.strong_convexity_c,
            z_star,
            target.dim,
            claim="solution-norm-bound-gaussian",
        )
    )

    # synthetic GLM instances
    rng_seed = seed + 1
    lin = LinearRegressionEnergy(_synth("linear", rng_seed))
    base_lin = standard_gaussian(lin.dim)
    reports.append(
        certify_smoothness(lin, base_lin, trials=1000, seed=seed, claim="smoothness-linear")
    )
    reports.append(
        certify_convexity(
            lin, base_lin, trials=300, seed=seed, c=1.0, claim="strong-convexity-linear"
        )
    )
    reports.append(
        certify_diag_grad_bound(lin, base_lin, trials=200, seed=seed, claim="diag-bound-linear")
    )

    logi = LogisticRegressionEnergy(_synth("logistic", rng_seed))
    base_log = standard_gaussian(logi.dim)
    reports.append(
        certify_smoothness(logi, base_log, trials=1000, seed=seed, claim="smoothness-logistic")
    )
    reports.append(
        certify_convexity(
            logi, base_log, trials=300, seed=seed, c=1.0, claim="strong-convexity-logistic"
        )
    )
    reports.append(
        certify_diag_grad_bound(logi, base_log, trials=200, seed=seed, claim="diag-bound-logistic")
    )

    if negative_control:
        reports.append(
            certify_smoothness(
                quad,
                base_q,
                trials=1000,
                seed=seed,
                M=a / 2.0,
                claim="negative-control-smoothness-halved",
            )
        )
        reports.append(
            certify_convexity(
                quad,
                base_q,
                trials=500,
                seed=seed,
                c=2.0 * a,
                claim="negative-control-convexity-doubled",
            )
        )
    return reports


def _synth(kind: str, seed: int):
    from .data import synth_dataset as make

    return make(kind, 40, 4, seed)


def _cmd_sweep(args) -> int:
    cfg = parse_config(args.config)
    if args.workers is not None:
        from dataclasses import replace

        cfg = replace(cfg, workers=args.workers)
    result = run_sweep(cfg)
    print(f"dataset: {result.dataset}")
    print(f"best -ELBO: {result.best_neg_elbo!r}")
    print(f"trace:   {result.trace_path}")
    print(f"summary: {result.summary_path}")
    print(f"report:  {result.json_path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    reports = verify_all(seed=args.seed, negative_control=args.negative_control)
    all_pass = all(r.passed for r in reports)
    for r in reports:
        flag = "PASS" if r.passed else "FAIL"
        print(f"[{flag}] {r.claim}: worst={r.worst!r} threshold={r.threshold!r} ({r.detail})")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        payload = {
            "format": "lsvi-verify-v1",
            "seed": args.seed,
            "negative_control": args.negative_control,
            "all_pass": all_pass,
            "reports": [r.to_dict() for r in reports],
        }
        (out / "verify_report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"report: {out / 'verify_report.json'}")
    return EXIT_OK if all_pass else EXIT_CERTIFICATE


def _cmd_grid_build(args) -> int:
    table = grid_mod.build_grid(
        a_range=(args.a_lo, args.a_hi),
        b_range=(0.0, args.b_hi),
        resolution=(args.n_a, args.n_b),
        quad_nodes=args.nodes,
    )
    table.save(args.path)
    print(f"wrote {args.path}: {json.dumps(table.header())}")
    return EXIT_OK


def _cmd_grid_inspect(args) -> int:
    table = grid_mod.GridTable.load(args.path)
    print(json.dumps(table.header(), indent=2, sort_keys=True))
    g, ga, gb = table.eval(0.0, min(1.0, table.b_hi))
    print(f"g(0, {min(1.0, table.b_hi)!r}) = {float(g)!r} (dg/da={float(ga)!r}, dg/db={float(gb)!r})")
    return EXIT_OK


def _cmd_synth(args) -> int:
    spec = args.spec
    try:
        kind, _, rest = spec.partition(":")
        fields = dict(part.split("=", 1) for part in rest.split(",") if part)
        n = int(fields.pop("N", fields.pop("n", 100)))
        d = int(fields.pop("d", 5))
        seed = int(fields.pop("seed", 0))
        if fields:
            raise ValueError(f"unknown spec fields {sorted(fields)}")
    except ValueError as exc:
        raise ConfigError(f"bad synth spec {spec!r}: {exc} (expected kind:N=..,d=..,seed=..)") from exc
    data = synth_dataset(kind, n, d, seed)
    write_dataset_csv(data, args.out)
    print(f"wrote {args.out}: {kind} N={n} d={d} seed={seed}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsvi", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a (method, rho) sweep from a config file")
    p_sweep.add_argument("config", help="key=value config file")
    p_sweep.add_argument("--workers", type=int, default=None, help="override the worker count")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the certificate suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--out", default="", help="directory for verify_report.json")
    p_verify.add_argument(
        "--negative-control",
        action="store_true",
        help="tighten witness thresholds; the run must fail",
    )
    p_verify.set_defaults(func=_cmd_verify)

    p_grid = sub.add_parser("grid", help="build or inspect a lookup table")
    grid_sub = p_grid.add_subparsers(dest="grid_command", required=True)
    p_build = grid_sub.add_parser("build")
    p_build.add_argument("path")
    p_build.add_argument("--a-lo", type=float, default=grid_mod.DEFAULT_A_RANGE[0])
    p_build.add_argument("--a-hi", type=float, default=grid_mod.DEFAULT_A_RANGE[1])
    p_build.add_argument("--b-hi", type=float, default=grid_mod.DEFAULT_B_RANGE[1])
    p_build.add_argument("--n-a", type=int, default=grid_mod.DEFAULT_RESOLUTION[0])
    p_build.add_argument("--n-b", type=int, default=grid_mod.DEFAULT_RESOLUTION[1])
    p_build.add_argument("--nodes", type=int, default=grid_mod.DEFAULT_QUAD_NODES)
    p_build.set_defaults(func=_cmd_grid_build)
    p_inspect = grid_sub.add_parser("inspect")
    p_inspect.add_argument("path")
    p_inspect.set_defaults(func=_cmd_grid_inspect)

    p_synth = sub.add_parser("synth", help="write a synthetic dataset CSV")
    p_synth.add_argument("spec", help="kind:N=..,d=..,seed=.. (kind: linear|logistic)")
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except LsviError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
