"""Command-line front end.

Subcommands: analyze (closed-form waits), simulate (seeded replicated
estimates), map (scheme parameter transformations), region (achievable
segment sweep), tables (embedded benchmark instances), optimize (control
solvers).  Every artifact embeds a run manifest so deterministic commands
can be reproduced byte for byte; pass --timestamp to pin the recorded
time.

Exit codes: 0 success, 2 invalid configuration, 3 unstable system,
4 invalid discipline or scheme parameters, 5 table check failure,
6 infeasible control problem.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from typing import Optional

from . import __version__
from .core import (
    SystemModel,
    conservation_residual,
    gfcfs_wait,
    segment_point,
    strict_priority_waits_2class,
    wait_bounds,
)
from .analytic import ddp_waits, ddp2_waits, edd2_waits_from_integral, pp2_waits_approx, rp_waits, rp2_waits
from .control import (
    CloudConfig,
    HpcConfig,
    JointPricingConfig,
    NetworkUtilityConfig,
    approx_utility_gfcfs,
    cloud_revenue_opt,
    cmu_rule_2class,
    hpc_revenue_constrained,
    hpc_utility_opt,
    joint_pricing_T1,
    minmax_fair_point,
    network_optimal_utility,
    pp_param_for_utility_approx,
    rp_param_for_utility,
)
from .errors import (
    InfeasibleError,
    InvalidParameterError,
    QueueingError,
    UnstableSystemError,
)
from .mappings import (
    SCHEMES,
    beta_from_p1,
    integral_from_beta,
    p1_from_beta,
    beta_from_integral,
)
from .sim import DDP, EDD, GFCFS, HOLPJ, PP, RP, SimConfig, Strict, run_sim
from .tables import check_table, table_csv
from . import tables as _tables

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_PARAMS = 4
EXIT_CHECK = 5
EXIT_INFEASIBLE = 6


def _manifest(args: argparse.Namespace) -> dict:
    ts = args.timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat()
    return {
        "command": args.command,
        "config": args.config,
        "seed": getattr(args, "seed", None),
        "out": args.out,
        "format": args.format,
        "tool_version": __version__,
        "timestamp": ts,
    }


def _emit(args: argparse.Namespace, payload: dict, csv_text: Optional[str] = None) -> None:
    manifest = _manifest(args)
    if args.format == "csv" and csv_text is not None:
        text = "# manifest: " + json.dumps(manifest, sort_keys=True) + "\n" + csv_text
    else:
        text = json.dumps({"manifest": manifest, **payload}, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_model(args: argparse.Namespace) -> SystemModel:
    if not args.config:
        raise InvalidParameterError("--config with a model document is required")
    with open(args.config) as fh:
        doc = json.load(fh)
    return SystemModel.from_json(doc["model"] if "model" in doc else doc)


def _load_config_doc(args: argparse.Namespace) -> dict:
    if not args.config:
        raise InvalidParameterError("--config is required")
    with open(args.config) as fh:
        return json.load(fh)


def _float(x: str) -> float:
    v = float(x)
    return v


def _discipline_from_args(model: SystemModel, args: argparse.Namespace):
    name = args.discipline
    if name == "gfcfs":
        return GFCFS()
    if name == "strict":
        order = tuple(int(x) for x in args.order.split(","))
        return Strict(order)
    if name == "ddp":
        if args.beta is not None:
            return ("ddp2", _float(args.beta))
        return DDP(tuple(_float(x) for x in args.b.split(",")))
    if name == "rp":
        if args.p1 is not None:
            return RP((args.p1, 1.0 - args.p1))
        return RP(tuple(_float(x) for x in args.p.split(",")))
    if name == "pp":
        return PP((args.omega1, 1.0))
    if name == "edd":
        return EDD(tuple(_float(x) for x in args.u.split(",")))
    if name == "holpj":
        return HOLPJ(tuple(_float(x) for x in args.u.split(",")), dispatch=args.dispatch)
    raise InvalidParameterError(f"unknown discipline {name!r}")


def cmd_analyze(args: argparse.Namespace) -> int:
    model = _load_model(args)
    name = args.discipline
    if name == "gfcfs":
        w = gfcfs_wait(model)
        waits = tuple([w] * model.n_classes)
    elif name == "strict":
        first = int(args.order.split(",")[0])
        waits = tuple(strict_priority_waits_2class(model, first))
    elif name == "ddp" and args.beta is not None:
        waits = tuple(ddp2_waits(model, _float(args.beta)))
    elif name == "ddp":
        waits = tuple(ddp_waits(model, tuple(_float(x) for x in args.b.split(","))))
    elif name == "rp" and args.p1 is not None:
        waits = tuple(rp2_waits(model, args.p1))
    elif name == "rp":
        waits = tuple(rp_waits(model, tuple(_float(x) for x in args.p.split(","))))
    elif name == "pp":
        waits = tuple(pp2_waits_approx(model, args.omega1))
    elif name == "edd":
        waits = tuple(edd2_waits_from_integral(model, args.integral, args.sign))
    else:
        raise InvalidParameterError(f"unknown discipline {name!r}")
    from .core import WaitVector

    payload = {
        "waits": list(waits),
        "conservation_residual": conservation_residual(model, WaitVector(waits)),
    }
    csv_text = "class,wait\n" + "".join(f"{i + 1},{w!r}\n" for i, w in enumerate(waits))
    _emit(args, payload, csv_text)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    model = _load_model(args)
    disc = _discipline_from_args(model, args)
    if isinstance(disc, tuple) and disc[0] == "ddp2":
        # beta shorthand: rates (1, beta)
        beta = disc[1]
        disc = Strict((1, 0)) if math.isinf(beta) else DDP((1.0, beta))
    cfg = SimConfig(
        seed=args.seed,
        measured_jobs=args.jobs,
        warmup_jobs=args.warmup,
        replications=args.replications,
    )
    est = run_sim(model, disc, cfg)
    if args.trace:
        from .sim import service_start_sequence

        records = service_start_sequence(model, disc, args.jobs, args.seed)
        with open(args.trace, "w") as fh:
            fh.write("time,class,arrival_time,wait\n")
            for t, c, a, w in records:
                fh.write(f"{t!r},{c + 1},{a!r},{w!r}\n")
    payload = {
        "mean": list(est.mean),
        "ci_halfwidth_95": list(est.ci_halfwidth_95),
        "sample_count": list(est.sample_count),
        "conservation_residual": est.residual,
    }
    csv_text = "class,mean,ci_halfwidth_95,samples\n" + "".join(
        f"{i + 1},{m!r},{c!r},{n}\n"
        for i, (m, c, n) in enumerate(zip(est.mean, est.ci_halfwidth_95, est.sample_count))
    )
    _emit(args, payload, csv_text)
    return EXIT_OK


def cmd_map(args: argparse.Namespace) -> int:
    model = _load_model(args)
    try:
        src, raw = args.source.split(":", 1)
        value = _float(raw)
    except ValueError as exc:
        raise InvalidParameterError(f"--from must look like scheme:value, got {args.source!r}") from exc
    dst = args.to
    if src not in SCHEMES or dst not in SCHEMES:
        raise InvalidParameterError(f"schemes must be one of {SCHEMES}")
    rho = model.rho
    # normalize the source to beta, the exchange currency
    if src == "ddp":
        beta = value
    elif src == "rp":
        beta = beta_from_p1(rho, value)
    elif src == "edd":
        branch = "ubar_nonneg" if args.sign == "nonneg" else "ubar_neg"
        beta = beta_from_integral(model, value, branch)
    else:
        raise InvalidParameterError(f"mapping from {src!r} is not analytic; simulate instead")
    if dst == "ddp":
        out = beta
    elif dst == "rp":
        out = p1_from_beta(rho, beta)
    elif dst == "edd":
        out = integral_from_beta(model, beta)[0]
    else:
        raise InvalidParameterError(f"mapping to {dst!r} is not analytic; use achieve_target")
    waits = ddp2_waits(model, beta)
    payload = {
        "from": {"scheme": src, "value": value},
        "to": {"scheme": dst, "value": out},
        "beta": beta,
        "waits": list(waits),
    }
    _emit(args, payload, f"scheme,value\n{dst},{out!r}\n")
    return EXIT_OK


def cmd_region(args: argparse.Namespace) -> int:
    model = _load_model(args)
    (lo1, hi1), (lo2, hi2) = wait_bounds(model)
    rows = []
    n = args.points
    for i in range(n):
        alpha = i / (n - 1)
        w = segment_point(model, alpha)
        rows.append((alpha, w[0], w[1]))
    payload = {
        "w1_bounds": [lo1, hi1],
        "w2_bounds": [lo2, hi2],
        "sweep": [list(r) for r in rows],
    }
    csv_text = "alpha,w1,w2\n" + "".join(f"{a!r},{x!r},{y!r}\n" for a, x, y in rows)
    _emit(args, payload, csv_text)
    return EXIT_OK


def cmd_tables(args: argparse.Namespace) -> int:
    if args.check:
        problems = check_table(args.which)
        if problems:
            for p in problems:
                print(p, file=sys.stderr)
            return EXIT_CHECK
    csv_text = table_csv(args.which)
    rows = _tables.compute_table1() if args.which == "table1" else _tables.compute_table2()
    _emit(args, {"table": args.which, "rows": [list(r) for r in rows]}, csv_text)
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    doc = _load_config_doc(args)
    problem = args.problem
    if problem == "fairness":
        model = SystemModel.from_json(doc["model"])
        a1, a2, w = minmax_fair_point(model)
        payload = {"solution": {"alpha1": a1, "alpha2": a2, "wait": w}}
    elif problem == "cmu":
        model = SystemModel.from_json(doc["model"])
        sol = cmu_rule_2class(model, float(doc["c1"]), float(doc["c2"]))
        payload = {"solution": json.loads(sol.to_json())}
    elif problem == "network":
        model = SystemModel.from_json(doc["model"])
        cfg = NetworkUtilityConfig(
            model, float(doc["d"]), float(doc["b"]),
            float(doc["v1"]), float(doc["v2"]), float(doc["v3"]), float(doc["v4"]),
        )
        payload = {
            "solution": {
                "p_rp": rp_param_for_utility(cfg).params["p1"],
                "omega_pp": pp_param_for_utility_approx(cfg).params["omega1"],
                "utility_opt": network_optimal_utility(cfg).objective,
                "utility_gfcfs": approx_utility_gfcfs(cfg),
            }
        }
    elif problem == "hpc":
        from .core import ServiceDistribution

        cfg = HpcConfig(
            lambda_P=float(doc["lambda_P"]),
            lambda_R=float(doc["lambda_R"]),
            service=ServiceDistribution.from_json(doc["service"]),
            a=float(doc["a"]),
            b=float(doc["b"]),
            w1=float(doc["w1"]),
            w2=float(doc["w2"]),
            S_R=float(doc["S_R"]) if "S_R" in doc else None,
        )
        sol = hpc_revenue_constrained(cfg) if cfg.S_R is not None else hpc_utility_opt(cfg)
        payload = {"solution": json.loads(sol.to_json())}
    elif problem == "cloud":
        cfg = CloudConfig(
            mu=float(doc["mu"]),
            scv=float(doc["scv"]),
            a=tuple(doc["a"]),
            b=tuple(doc["b"]),
            c=tuple(doc["c"]),
            T=tuple(doc.get("T", (math.inf, math.inf))),
        )
        payload = {"solution": json.loads(cloud_revenue_opt(cfg).to_json())}
    elif problem == "pricing":
        cfg = JointPricingConfig(
            lambda_p=float(doc["lambda_p"]),
            mu=float(doc["mu"]),
            sigma2=float(doc["sigma2"]),
            S_p=float(doc.get("S_p", math.inf)),
            a=float(doc["a"]),
            b=float(doc["b"]),
            c=float(doc["c"]),
        )
        payload = {"solution": json.loads(joint_pricing_T1(cfg).to_json())}
    else:
        raise InvalidParameterError(f"unknown problem {problem!r}")
    _emit(args, payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mg1lab",
        description="Multi-class M/G/1 dynamic-priority laboratory",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a JSON configuration document")
        p.add_argument("--seed", type=int, default=12345)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--timestamp", help="pin the manifest timestamp (reproducible output)")

    def discipline_flags(p):
        p.add_argument("--discipline", required=True,
                       choices=("gfcfs", "strict", "ddp", "rp", "pp", "edd", "holpj"))
        p.add_argument("--order", default="0,1", help="strict-priority order, e.g. 0,1")
        p.add_argument("--beta", help="2-class rate ratio for ddp")
        p.add_argument("--b", help="comma-separated accumulation rates for ddp")
        p.add_argument("--p1", type=float, help="2-class weight for rp")
        p.add_argument("--p", help="comma-separated weights for rp")
        p.add_argument("--omega1", type=float, help="polling probability for pp")
        p.add_argument("--u", help="comma-separated urgencies (edd) or deadlines (holpj)")
        p.add_argument("--dispatch", default="jump", choices=("jump", "order"))
        p.add_argument("--integral", type=float, help="busy-period integral value for edd analysis")
        p.add_argument("--sign", default="nonneg", choices=("nonneg", "neg"))

    p = sub.add_parser("analyze", help="closed-form mean waits")
    common(p)
    discipline_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="seeded replicated simulation estimate")
    common(p)
    discipline_flags(p)
    p.add_argument("--jobs", type=int, default=100_000)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--replications", type=int, default=10)
    p.add_argument("--trace", help="also write a per-service-start CSV trace to this path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("map", help="transform a scheme parameter")
    common(p)
    p.add_argument("--from", dest="source", required=True, help="scheme:value, e.g. rp:0.5")
    p.add_argument("--to", required=True)
    p.add_argument("--sign", default="nonneg", choices=("nonneg", "neg"))
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("region", help="achievable segment endpoints and sweep")
    common(p)
    p.add_argument("--points", type=int, default=11)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("tables", help="embedded benchmark tables")
    common(p)
    p.add_argument("which", choices=("table1", "table2"))
    p.add_argument("--check", action="store_true",
                   help="compare against embedded expected values")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("optimize", help="control-problem solvers")
    common(p)
    p.add_argument("problem", choices=("cmu", "hpc", "cloud", "pricing", "network", "fairness"))
    p.set_defaults(func=cmd_optimize)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnstableSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QueueingError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
