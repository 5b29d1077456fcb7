"""Command-line interface: ``scanopt {rate,avar,optimize,simulate,validate,two-phase}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validation tolerance breached.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import batch_means_avar, gaussian_h, trace_values, tv_ratio_check
from .discrete import (
    DiscreteJointModel,
    assemble_scan_matrix,
    build_binomial_model,
    build_custom_model,
    discrete_scan_rate,
    function_on_states,
    peskun_avar,
)
from .errors import ConfigError, InputError, NumericalError, UnsupportedCombination
from .gaussian import (
    BivariateGaussianSpec,
    GaussianTarget,
    as_alpha,
    bivariate_avar_sum,
    equal_alpha,
    exchangeable_sigma,
    gaussian_scan_rate,
)
from .io import fmt, read_matrix, read_pmf, read_state_values, write_table, write_trace
from .optimize import optimize_1d, optimize_simplex, relative_gain
from .sampler import RNG_ALGORITHM, RngStream, run_chain, two_phase_run

EXIT_CONFIG, EXIT_NUMERIC, EXIT_BREACH = 2, 3, 4
MODEL_FLAGS = ("gaussian_file", "gaussian_exchangeable", "gaussian_biv", "discrete", "pmf_file")
DEFAULT_SEED = 20080601


class ValidationBreach(Exception):
    pass


def _floats(text, n=None, flag="value"):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--{flag}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise ConfigError(f"--{flag}: expected {n} numbers, got {len(vals)}")
    return vals


def build_model(args):
    given = [f for f in MODEL_FLAGS if getattr(args, f, None) is not None]
    if len(given) != 1:
        names = ", ".join("--" + f.replace("_", "-") for f in MODEL_FLAGS)
        raise ConfigError(f"exactly one model must be given ({names}); got {len(given)}")
    flag = given[0]
    value = getattr(args, flag)
    if flag == "discrete":
        n1, n2, p = _floats(value, 3, "discrete")
        if n1 != int(n1) or n2 != int(n2):
            raise ConfigError("--discrete: n1 and n2 must be integers")
        return build_binomial_model(int(n1), int(n2), p)
    if flag == "pmf_file":
        return build_custom_model(read_pmf(value), label=f"pmf({Path(value).name})")
    if flag == "gaussian_biv":
        s1, s2, rho = _floats(value, 3, "gaussian-biv")
        return BivariateGaussianSpec(s1, s2, rho).target()
    if flag == "gaussian_exchangeable":
        sig = _floats(value, flag="gaussian-exchangeable")
        label = "gaussian-exchangeable(" + ",".join(f"{v:g}" for v in sig) + ")"
        return GaussianTarget.from_sigma(exchangeable_sigma(sig), label)
    return GaussianTarget.from_sigma(read_matrix(value), f"gaussian-file({Path(value).name})")


def model_dim(model):
    return 2 if isinstance(model, DiscreteJointModel) else model.dimension


def resolve_alpha(args, model, required=True):
    d = model_dim(model)
    if getattr(args, "alpha1", None) is not None:
        if d != 2:
            raise ConfigError("--alpha1 only applies to two-coordinate models")
        return as_alpha([args.alpha1, 1.0 - args.alpha1], 2)
    if args.alpha is None or args.alpha == "equal":
        if args.alpha is None and required:
            raise ConfigError("selection probabilities required: --alpha LIST|equal or --alpha1 VALUE")
        return equal_alpha(d)
    return as_alpha(_floats(args.alpha, flag="alpha"), d)


def resolve_h(args, model):
    spec = args.h
    if isinstance(model, DiscreteJointModel):
        if spec.endswith(".csv") or os.path.isfile(spec):
            return function_on_states(model, read_state_values(spec, model))
        return function_on_states(model, spec)
    gaussian_h(spec, model.dimension)  # raises on an unsupported h
    return spec


def bivariate_spec(target):
    s = target.sigma
    sd = np.sqrt(np.diag(s))
    return BivariateGaussianSpec(sd[0], sd[1], s[0, 1] / (sd[0] * sd[1]))


def resolved_seed(args):
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("SCANOPT_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"SCANOPT_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def meta(args, **extra):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    out = {"command": args.command, "config": cfg, "rng": RNG_ALGORITHM}
    out.update(extra)
    return out


def out_path(args, name):
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def criterion_fn(args, model, criterion, h=None):
    """The requested criterion as a function of the full alpha vector."""
    if isinstance(model, DiscreteJointModel):
        if criterion == "rate":
            return lambda a: discrete_scan_rate(assemble_scan_matrix(model, a[0]))
        return lambda a: peskun_avar(assemble_scan_matrix(model, a[0]), h)
    if criterion == "rate":
        return lambda a: gaussian_scan_rate(model, a)
    if model.dimension == 2 and h == "sum":
        spec = bivariate_spec(model)
        return lambda a: bivariate_avar_sum(spec, a[0])
    raise UnsupportedCombination(
        "no closed-form asymptotic variance for this Gaussian target and h; "
        "use `simulate` followed by `validate` (batch means) instead"
    )


def cmd_rate(args):
    model = build_model(args)
    alpha = resolve_alpha(args, model)
    if isinstance(model, DiscreteJointModel):
        rate = discrete_scan_rate(assemble_scan_matrix(model, alpha[0]))
    else:
        rate = gaussian_scan_rate(model, alpha)
    write_table(out_path(args, "rate.csv"), meta(args), ["model", "alpha", "rate"], [[model.label, alpha, rate]])
    print(f"model={model.label} alpha={fmt(alpha)} rate={fmt(rate)}")
    return 0


def cmd_avar(args):
    model = build_model(args)
    alpha = resolve_alpha(args, model)
    h = resolve_h(args, model)
    value = criterion_fn(args, model, "avar", h)(alpha)
    write_table(out_path(args, "avar.csv"), meta(args), ["model", "alpha", "h", "avar"],
                [[model.label, alpha, args.h, value]])
    print(f"model={model.label} alpha={fmt(alpha)} h={args.h} avar={fmt(value)}")
    return 0


def cmd_optimize(args):
    model = build_model(args)
    h = resolve_h(args, model) if args.criterion == "avar" else None
    crit = criterion_fn(args, model, args.criterion, h)
    d = model_dim(model)
    if d == 2:
        res = optimize_1d(lambda a: crit(np.array([a, 1.0 - a])), step=args.resolution, name=args.criterion)
    else:
        res = optimize_simplex(crit, d, args.resolution, name=args.criterion)
    at_equal = crit(equal_alpha(d))
    gain = relative_gain(res.value, at_equal)
    record = res.as_dict()
    record.update(model=model.label, value_at_equal_alpha=float(at_equal), relative_gain=float(gain))
    cols = ["model", "criterion", "method", "alpha_star", "value", "value_at_equal_alpha", "relative_gain",
            "evaluations"]
    write_table(out_path(args, "optimize.csv"), meta(args), cols, [[record[c] for c in cols]])
    with open(out_path(args, "optimize.json"), "w") as fh:
        json.dump({"meta": meta(args, version=__version__), "result": record}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"model={model.label} criterion={args.criterion} alpha_star={fmt(res.alpha_star)} "
          f"value={fmt(res.value)} value_at_equal={fmt(at_equal)} relative_gain={fmt(gain)}")
    return 0


def _trace_meta(args, trace, seed):
    return meta(args, seed=seed, stream_id=trace.stream_id, algorithm=trace.algorithm,
                alpha=trace.alpha, model=trace.label, burn_in=trace.burn_in)


def cmd_simulate(args):
    model = build_model(args)
    alpha = resolve_alpha(args, model, required=False)
    h = resolve_h(args, model)
    seed = resolved_seed(args)
    trace = run_chain(model, alpha, args.iterations, args.burn_in, RngStream(seed))
    write_trace(out_path(args, "trace.csv"), _trace_meta(args, trace, seed), trace)
    freq = trace.visit_frequencies()
    mean_h = float(np.mean(trace_values(trace, h, model)))
    print(f"model={model.label} alpha={fmt(alpha)} iterations={len(trace)} seed={seed}")
    print(f"visit_frequencies={fmt(freq)} mean_h={fmt(mean_h)}")
    return 0


def _print_table(headers, rows):
    cells = [[str(h) for h in headers]] + [[fmt(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))


def cmd_validate(args):
    model = build_model(args)
    alpha = resolve_alpha(args, model, required=False)
    h = resolve_h(args, model)
    seed = resolved_seed(args)
    tol = args.tolerance
    rows = []
    discrete = isinstance(model, DiscreteJointModel)
    if not discrete and not (model.dimension == 2 and h == "sum"):
        raise UnsupportedCombination("validate supports discrete models and bivariate Gaussians with h=sum")
    trace = run_chain(model, alpha, args.iterations, args.burn_in, RngStream(seed))
    est = batch_means_avar(trace, h, args.batches, model)
    if discrete:
        scan = assemble_scan_matrix(model, alpha[0])
        theory = peskun_avar(scan, h)
        rel = abs(est.point - theory) / abs(theory) if theory else abs(est.point)
        rows.append(["avar_peskun_vs_batch_means", theory, est.point, rel, tol, rel <= tol])
        rate = discrete_scan_rate(scan)
        worst, ratios = tv_ratio_check(model, scan, rate)
        ok = ratios.size > 0 and worst <= args.tv_tolerance
        rows.append(["tv_ratio_vs_rho2", rate, ratios[-1] if ratios.size else float("nan"), worst,
                     args.tv_tolerance, ok])
    else:
        theory = bivariate_avar_sum(bivariate_spec(model), alpha[0])
        rel = abs(est.point - theory) / abs(theory)
        rows.append(["avar_polynomial_vs_batch_means", theory, est.point, rel, tol, rel <= tol])
    cols = ["check", "theory", "empirical", "error", "tolerance", "pass"]
    write_table(out_path(args, "validate.csv"), _trace_meta(args, trace, seed), cols, rows)
    print(f"model={model.label} alpha={fmt(alpha)} h={args.h} iterations={len(trace)} seed={seed}")
    _print_table(cols, [r[:-1] + ["PASS" if r[-1] else "FAIL"] for r in rows])
    if not all(r[-1] for r in rows):
        raise ValidationBreach("validation tolerance exceeded")
    return 0


def cmd_two_phase(args):
    model = build_model(args)
    h = resolve_h(args, model)
    seed = resolved_seed(args)
    tr1, report, tr2 = two_phase_run(model, h, args.phase1, args.phase2, RngStream(seed), args.burn_in)
    write_trace(out_path(args, "phase1_trace.csv"), _trace_meta(args, tr1, seed), tr1)
    rep_rows = [["pilot_length", report.pilot_length], ["criterion", report.criterion],
                ["alpha_hat", report.alpha_hat], ["value", report.value]]
    if report.estimated_sigma is not None:
        rep_rows.append(["estimated_sigma", report.estimated_sigma.reshape(-1)])
    if report.reference_alpha is not None:
        rep_rows.append(["reference_alpha", report.reference_alpha])
    write_table(out_path(args, "tune_report.csv"), meta(args, seed=seed), ["field", "value"], rep_rows)
    phases = [("phase1", tr1)]
    if tr2 is not None:
        write_trace(out_path(args, "phase2_trace.csv"), _trace_meta(args, tr2, seed), tr2)
        phases.append(("phase2", tr2))
    cmp_rows = []
    for name, tr in phases:
        est = batch_means_avar(tr, h, None, model)
        cmp_rows.append([name, tr.alpha, len(tr), est.point, est.standard_error])
    cols = ["phase", "alpha", "iterations", "batch_means_avar", "standard_error"]
    write_table(out_path(args, "two_phase_compare.csv"), meta(args, seed=seed), cols, cmp_rows)
    print(f"model={model.label} h={args.h} seed={seed} alpha_hat={fmt(report.alpha_hat)}")
    _print_table(cols, cmp_rows)
    return 0


COMMANDS = {
    "rate": (cmd_rate, "convergence rate at given selection probabilities"),
    "avar": (cmd_avar, "exact asymptotic variance at given selection probabilities"),
    "optimize": (cmd_optimize, "selection probabilities minimising rate or asymptotic variance"),
    "simulate": (cmd_simulate, "run a random-scan Gibbs sampler and write its trace"),
    "validate": (cmd_validate, "compare theory with simulation"),
    "two-phase": (cmd_two_phase, "equal-alpha phase, tune, then variance-optimal phase"),
}


def _common():
    p = argparse.ArgumentParser(add_help=False)
    m = p.add_argument_group("model (exactly one)")
    m.add_argument("--gaussian-file", metavar="CSV", help="dispersion matrix, one row per line")
    m.add_argument("--gaussian-exchangeable", metavar="S1,S2,...",
                   help="diag(s_i^2) - J/(d+0.005)")
    m.add_argument("--gaussian-biv", metavar="S1,S2,RHO", help="bivariate Gaussian")
    m.add_argument("--discrete", metavar="N1,N2,P", help="binomial-hypergeometric model")
    m.add_argument("--pmf-file", metavar="CSV", help="joint pmf with columns x,theta,prob")
    p.add_argument("--alpha", help="comma-separated selection probabilities, or 'equal'")
    p.add_argument("--alpha1", type=float, help="alpha for coordinate 1 of a two-coordinate model")
    p.add_argument("--h", default="sum", help="sum | const | coord:x | coord:theta | coord:<i> | CSV path")
    p.add_argument("--criterion", choices=("rate", "avar"), default="rate")
    p.add_argument("--resolution", type=float, default=0.01, help="optimisation grid step")
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--batches", type=int, default=None, help="batch count (default floor(sqrt(m)))")
    p.add_argument("--phase1", type=int, default=100_000)
    p.add_argument("--phase2", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None, help="falls back to $SCANOPT_SEED")
    p.add_argument("--tolerance", type=float, default=0.10, help="relative avar tolerance for validate")
    p.add_argument("--tv-tolerance", type=float, default=0.01)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", help="key=value or JSON file; flags take precedence")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="scanopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"scanopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    for name, (func, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
    return parser


def load_config(path):
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
    else:
        data = {}
        for ln in text.splitlines():
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise ConfigError(f"{path}: line {ln!r} is not key=value")
            k, v = ln.split("=", 1)
            data[k.strip()] = v.strip()
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = load_config(args.config)
        sp = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sp._actions}
        for k in cfg:
            if k not in known or k in ("help", "config"):
                raise ConfigError(f"{args.config}: unknown key {k!r}")
        defaults = {}
        for k, v in cfg.items():
            act = known[k]
            defaults[k] = act.type(v) if (act.type and isinstance(v, str)) else v
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None):
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        return args.func(args)
    except ValidationBreach as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BREACH
    except (InputError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
