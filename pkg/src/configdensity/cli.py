"""Command-line entry point: ``configdensity <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 configuration or input error.
"""

import argparse
import json
import logging
import os
import sys

from ._validation import ConfigDensityError

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG = 0, 1, 2


def _json_arg(text, what):
    """Inline JSON, ``@path`` or a path to a JSON file."""
    try:
        if text.startswith("@"):
            text = open(text[1:]).read()
        elif not text.lstrip().startswith(("{", "[")):
            text = open(text).read()
        return json.loads(text)
    except OSError as exc:
        raise ConfigDensityError("config_error", f"{what}: cannot read ({exc})")
    except json.JSONDecodeError as exc:
        raise ConfigDensityError("config_error", f"{what}: invalid JSON ({exc})")


def _floats(text, what):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigDensityError("config_error", f"{what}: expected a list of numbers, got {text!r}")


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True, default=float))


def _load_field(path):
    from .field import load

    return load(path)


def _result_dict(r):
    return {"name": r.name, "value": r.value, "method": r.method, "t": r.t, "alpha": r.alpha,
            "grid": r.grid, "quadrature": r.quadrature, "elapsed_ns": r.elapsed_ns}


def cmd_gen(args):
    from .field import GeneratorSpec, Grid, generate, save

    spec = _json_arg(args.spec, "--spec")
    if not isinstance(spec, dict) or "generator" not in spec or "grid" not in spec:
        raise ConfigDensityError("config_error", "--spec: needs 'generator' and 'grid' objects")
    try:
        grid = Grid.from_dict(spec["grid"])
    except (KeyError, TypeError) as exc:
        raise ConfigDensityError("config_error", f"grid: {exc}")
    f = generate(GeneratorSpec.from_json(spec["generator"]), grid, allow_clip=args.allow_clip)
    save(f, args.out)
    _emit({"path": args.out, "shape": list(f.shape), "mass": f.mass, "support_measure": f.support_measure})
    return EXIT_OK


def cmd_pair(args):
    from .functionals import pair_correlation

    r = pair_correlation(_load_field(args.field), args.t, method=args.method, n_circle=args.circle)
    _emit(_result_dict(r))
    return EXIT_OK


def cmd_triangle(args):
    from .functionals import triangle_d1, triangle_d4
    from .measures import circle_quadrature, ray_quadrature

    f = _load_field(args.field)
    if args.lambda2 is not None:
        r = triangle_d4(f, args.lambda2, t=args.t, cq=args.circle)
    else:
        r = triangle_d1(f, args.alpha, t=args.t, cq=circle_quadrature(args.circle), rq=ray_quadrature(args.ray))
    _emit(_result_dict(r))
    return EXIT_OK


def cmd_colinear(args):
    from .functionals import colinear_triple

    _emit(_result_dict(colinear_triple(_load_field(args.field), args.t, n_dirs=args.n_dirs)))
    return EXIT_OK


def cmd_sweep(args):
    from .sweep import SweepConfig, find_onset, run_sweep

    cfg = SweepConfig.from_dict(_json_arg(args.config, "--config"))
    if args.output:
        cfg.output = args.output
    rows, eps = run_sweep(cfg)
    _emit({"rows": len(rows), "eps_num": eps, "onset": find_onset(rows), "output": cfg.output})
    return EXIT_OK


def cmd_banach(args):
    from .density import banach_density

    env = banach_density(_load_field(args.field), _floats(args.t, "--t"), stride=args.stride, tail=args.tail,
                         centers=args.centers)
    _emit({"t_values": env.t_values, "sup_averages": env.sup_averages, "estimate": env.estimate})
    return EXIT_OK


def cmd_ergodic(args):
    from .stationary import StationaryModel, ergodic_average_experiment

    m = _json_arg(args.model, "--model")
    try:
        model = StationaryModel(m["kind"], m.get("params", {}), int(m.get("seed", 0)))
    except (KeyError, TypeError) as exc:
        raise ConfigDensityError("config_error", f"--model: {exc}")
    table = ergodic_average_experiment(model, _floats(args.t, "--t"), args.seeds, spacing=args.spacing)
    if args.output:
        table.to_csv(args.output)
    _emit({"rows": table.rows(), "model_mean": table.model_mean, "paired_decrease": table.paired_decrease()})
    return EXIT_OK


def cmd_verify(args):
    from .verify import inject_fault, verify_suite

    faults = args.inject_fault or []

    def show(rep):
        print(rep.line(), flush=True)

    with inject_fault(*faults):
        reports, code = verify_suite(args.level, progress=None if args.json else show)
    if args.json:
        _emit([{"name": r.name, "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin, "passed": r.passed,
                "relation": r.relation} for r in reports])
    failed = [r.name for r in reports if not r.passed]
    print(f"{len(reports)} checks, {len(failed)} failed" + (f": {', '.join(failed)}" if failed else ""),
          file=sys.stderr)
    return EXIT_OK if code == 0 else EXIT_VERIFY


def cmd_plot(args):
    from .sweep import read_csv, svg_plot

    rows = read_csv(args.csv)
    with open(args.out, "w") as fh:
        fh.write(svg_plot(rows, eps_num=args.eps, title=args.title or os.path.basename(args.csv)))
    _emit({"path": args.out, "rows": len(rows)})
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="configdensity", description="Configuration functionals of density fields.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="generate a field and save it as .dfield")
    s.add_argument("--spec", required=True, help="JSON with 'generator' and 'grid' (inline, @file or path)")
    s.add_argument("--out", required=True)
    s.add_argument("--allow-clip", action="store_true")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("pair", help="pair correlation at scale t")
    s.add_argument("--field", required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--method", choices=("spatial", "spectral"), default="spatial")
    s.add_argument("--circle", type=int, default=None, help="circle nodes (spatial)")
    s.set_defaults(func=cmd_pair)

    s = sub.add_parser("triangle", help="triangle functional D1 (or D4 with --lambda2)")
    s.add_argument("--field", required=True)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--circle", type=int, default=64)
    s.add_argument("--ray", type=int, default=64)
    s.add_argument("--lambda2", type=float, default=None)
    s.set_defaults(func=cmd_triangle)

    s = sub.add_parser("colinear", help="evenly spaced colinear triples")
    s.add_argument("--field", required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--n-dirs", type=int, default=None)
    s.set_defaults(func=cmd_colinear)

    s = sub.add_parser("sweep", help="run a sweep from a JSON config and write CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--output", default=None, help="CSV path (overrides the config)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("banach", help="upper Banach density envelope")
    s.add_argument("--field", required=True)
    s.add_argument("--t", required=True, help="window sides, e.g. '2,4,8,16'")
    s.add_argument("--stride", type=float, default=None)
    s.add_argument("--tail", type=int, default=3)
    s.add_argument("--centers", choices=("all", "origin"), default="all")
    s.set_defaults(func=cmd_banach)

    s = sub.add_parser("ergodic-check", help="window-average concentration for a stationary model")
    s.add_argument("--model", required=True, help="JSON with kind, params, seed")
    s.add_argument("--t", required=True)
    s.add_argument("--seeds", type=int, default=100)
    s.add_argument("--spacing", type=float, default=None)
    s.add_argument("--output", default=None)
    s.set_defaults(func=cmd_ergodic)

    s = sub.add_parser("verify", help="run the identity and inequality suite")
    s.add_argument("--level", choices=("fast", "full"), default="fast")
    s.add_argument("--json", action="store_true")
    s.add_argument("--inject-fault", action="append", help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("plot", help="SVG plot of a sweep CSV")
    s.add_argument("--csv", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("--title", default=None)
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigDensityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        if args.command == "verify":
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise


if __name__ == "__main__":
    sys.exit(main())
