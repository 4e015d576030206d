"""Command-line harness: single runs, figure reproduction, verification.

Subcommands:
  run        one experiment -> trace CSV + summary line
  reproduce  a figure set (fig1a, fig1b, fig2a, fig2b) -> CSVs + SVG
  verify     the full check suite -> plain-text report, exit 0 iff clean

Exit statuses: 0 ok, 1 check violations, 2 usage or configuration error.
The LFSO_SEED environment variable supplies the default seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import _svg
from .core import (GradientOracle, Lfso, RPolicy, RunTrace, SolverConfig,
                   run_fixed_gd, run_lfso_gd)
from .errors import AssumptionUnmetError, LfsoError
from .oracles import ConstantLfsoParams, constant_lfso
from .problems import (CompositionProblem, LpRegressionProblem,
                       QuarticProblem, load_regression_data,
                       make_lp_regression, make_norm_power)
from . import verify as checks

TRACE_HEADER = "k,f,grad_norm,R,R_tilde,L,step_norm,grad_ratio"

PROBLEMS = ("norm2-pow", "lp-norm", "quartic", "regression-file")
FIGURES = ("fig1a", "fig1b", "fig2a", "fig2b")

# Largest power-of-ten stepsize that keeps the fixed-step baseline stable
# from x0 = ones(10) on f = ||x||_2^{2p}; overridable via fig1a_eta_p<p>.
FIG1A_DEFAULT_ETAS = {1: 1e-1, 2: 1e-2, 3: 1e-3, 4: 1e-4, 5: 1e-5}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problem: str = "norm2-pow"
    d: int = 10
    p: int = 1
    eta: float = 1.0
    max_iters: int = 10_000
    grad_tol: float = 0.0
    r_policy: str = "default"
    x0: str = "ones"
    seed: int = 0
    out_path: str = "trace.csv"
    solver: str = "lfso"
    data_path: Optional[str] = None

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if self.solver not in ("lfso", "fixed"):
            raise ConfigError(f"solver must be 'lfso' or 'fixed', got {self.solver!r}")
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if self.p < 1:
            raise ConfigError(f"p must be >= 1, got {self.p}")
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.grad_tol < 0:
            raise ConfigError(f"grad_tol must be >= 0, got {self.grad_tol}")
        if self.problem == "regression-file" and not self.data_path:
            raise ConfigError("regression-file needs data_path (--data)")


@dataclass
class ExperimentBundle:
    """Everything a run needs: objective, oracle, radius policy, and the
    structured problem behind them (when there is one)."""

    objective: GradientOracle
    lfso: Optional[Lfso]
    r_policy: RPolicy
    x0: np.ndarray
    use_grad_bound: bool = False
    composition: Optional[CompositionProblem] = None
    regression: Optional[LpRegressionProblem] = None


def _parse_scalar(text: str, caster, key: str):
    try:
        return caster(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def parse_config_file(path: str) -> dict:
    """Read ``key = value`` lines; '#' starts a comment; blank lines skipped."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


_CONFIG_CASTS = {
    "problem": str, "d": int, "p": int, "eta": float, "max_iters": int,
    "grad_tol": float, "r_policy": str, "x0": str, "seed": int,
    "out_path": str, "solver": str, "data_path": str,
}


def config_from_sources(file_values: dict, cli_values: dict) -> ExperimentConfig:
    """Build a config: defaults, then config-file keys, then CLI flags."""
    cfg = ExperimentConfig()
    known = {f.name for f in fields(ExperimentConfig)}
    for key, text in file_values.items():
        if key.startswith("fig1a_eta_p"):
            continue
        if key not in known:
            raise ConfigError(f"unknown config key: {key}")
        setattr(cfg, key, _parse_scalar(text, _CONFIG_CASTS[key], key))
    for key, value in cli_values.items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


def _fig1a_etas(file_values: dict) -> dict:
    etas = dict(FIG1A_DEFAULT_ETAS)
    for key, text in file_values.items():
        if key.startswith("fig1a_eta_p"):
            p = _parse_scalar(key[len("fig1a_eta_p"):], int, key)
            etas[p] = _parse_scalar(text, float, key)
    return etas


def _load_x0(spec: str, d: int) -> np.ndarray:
    if spec == "ones":
        return np.ones(d)
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            vals = [float(tok) for tok in fh.read().split()]
    except OSError as exc:
        raise ConfigError(f"cannot read x0 file {spec}: {exc}") from exc
    if len(vals) != d:
        raise ConfigError(f"x0 file has {len(vals)} values, expected {d}")
    return np.array(vals, dtype=np.float64)


def _policy_from_selector(selector: str, bundle_kind: str,
                          composition: Optional[CompositionProblem],
                          regression: Optional[LpRegressionProblem]) -> RPolicy:
    if selector == "default":
        selector = {"norm2-pow": "grad-g-norm",
                    "lp-norm": "residual-inf",
                    "regression-file": "residual-inf",
                    "quartic": "constant:0.1"}[bundle_kind]
    if selector.startswith("constant:"):
        return RPolicy.constant(_parse_scalar(selector.split(":", 1)[1],
                                              float, "r_policy"))
    if selector == "grad-g-norm":
        if composition is None:
            raise ConfigError("grad-g-norm radius policy needs a composition problem")
        return RPolicy.grad_g_norm(composition.g.grad)
    if selector == "residual-inf":
        if regression is None:
            raise ConfigError("residual-inf radius policy needs a regression problem")
        return RPolicy.residual_inf_norm(regression.a, regression.b)
    raise ConfigError(f"unknown r_policy selector: {selector!r}")


def build_experiment(cfg: ExperimentConfig) -> ExperimentBundle:
    composition = None
    regression = None
    use_grad_bound = False
    if cfg.problem == "norm2-pow":
        composition, lfso = make_norm_power(cfg.d, cfg.p)
        objective = composition.objective()
        d = cfg.d
    elif cfg.problem == "lp-norm":
        regression, lfso = make_lp_regression(np.eye(cfg.d), np.zeros(cfg.d), cfg.p)
        objective = regression.objective()
        use_grad_bound = True
        d = cfg.d
    elif cfg.problem == "regression-file":
        a, b = load_regression_data(cfg.data_path)
        regression, lfso = make_lp_regression(a, b, cfg.p)
        objective = regression.objective()
        use_grad_bound = True
        d = regression.d
    else:
        quartic = QuarticProblem()
        objective = quartic.objective()
        lfso = quartic.lfso()
        d = 1
    policy = _policy_from_selector(cfg.r_policy, cfg.problem,
                                   composition, regression)
    return ExperimentBundle(objective=objective, lfso=lfso, r_policy=policy,
                            x0=_load_x0(cfg.x0, d),
                            use_grad_bound=use_grad_bound,
                            composition=composition, regression=regression)


def execute(cfg: ExperimentConfig, bundle: ExperimentBundle,
            keep_iterates: bool = False) -> RunTrace:
    if cfg.solver == "fixed":
        return run_fixed_gd(bundle.objective, bundle.x0, cfg.eta,
                            max_iters=cfg.max_iters, grad_tol=cfg.grad_tol,
                            keep_iterates=keep_iterates)
    solver_cfg = SolverConfig(r_policy=bundle.r_policy, eta=cfg.eta,
                              max_iters=cfg.max_iters, grad_tol=cfg.grad_tol,
                              use_grad_bound=bundle.use_grad_bound)
    inner = bundle.composition.g.eval if bundle.composition is not None else None
    return run_lfso_gd(bundle.lfso, bundle.objective, bundle.x0, solver_cfg,
                       inner_value=inner, keep_iterates=keep_iterates)


def write_trace_csv(path: str, trace: RunTrace) -> None:
    """One row per iterate; the final row carries sentinel step fields."""
    ratios = trace.grad_ratios()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TRACE_HEADER + "\n")
        for rec, ratio in zip(trace.records, ratios):
            fh.write("%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n" % (
                rec.k, rec.f_val, rec.grad_norm, rec.r_k, rec.r_tilde_k,
                rec.l_k, rec.step_norm, ratio))
        fh.write("%d,%.17g,%.17g,0,0,0,0,%.17g\n" % (
            len(trace.records), trace.final_f, trace.final_grad_norm,
            ratios[-1]))


def read_trace_csv(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        columns = {name: [] for name in header.split(",")}
        names = header.split(",")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != len(names):
                raise ValueError(f"{path}: malformed row {line!r}")
            for name, tok in zip(names, parts):
                columns[name].append(float(tok))
    return columns


def summarize_trace(trace: RunTrace, label: str) -> str:
    ratios = trace.grad_ratios()
    final_ratio = ratios[-1]
    rate = checks.classify_rate(ratios)
    parts = [label,
             f"steps={trace.num_steps}",
             f"termination={trace.termination.value}",
             "final_grad_ratio=%.17g" % final_ratio,
             f"rate={rate}"]
    try:
        fit = checks.fit_linear_rate(ratios)
        parts.append("slope=%.12g" % fit.slope)
        parts.append("r2=%.12g" % fit.r_squared)
    except LfsoError:
        pass
    return " ".join(parts)


def cmd_run(args) -> int:
    file_values = parse_config_file(args.config) if args.config else {}
    cli_values = {key: getattr(args, key) for key in _CONFIG_CASTS}
    cfg = config_from_sources(file_values, cli_values)
    bundle = build_experiment(cfg)
    trace = execute(cfg, bundle)
    write_trace_csv(cfg.out_path, trace)
    label = (f"run problem={cfg.problem} p={cfg.p} d={cfg.d} "
             f"eta={cfg.eta:g} solver={cfg.solver}")
    print(summarize_trace(trace, label))
    print(f"trace written to {cfg.out_path}")
    return 0


def _figure_runs(figure: str, max_iters: int, etas_fig1a: dict):
    """Yield (p, config) pairs for one figure's five runs."""
    for p in range(1, 6):
        cfg = ExperimentConfig(p=p, d=10, max_iters=max_iters)
        if figure == "fig2a":
            cfg.problem, cfg.solver, cfg.eta = "norm2-pow", "lfso", 1.0
        elif figure == "fig2b":
            cfg.problem, cfg.solver, cfg.eta = "lp-norm", "lfso", 1.0
        elif figure == "fig1b":
            cfg.problem, cfg.solver, cfg.eta = "lp-norm", "fixed", 1e-2
        else:
            cfg.problem, cfg.solver = "norm2-pow", "fixed"
            cfg.eta = etas_fig1a[p]
        yield p, cfg


FIGURE_TITLES = {
    "fig1a": "fixed stepsize on f = |x|_2^2p (per-p stepsizes)",
    "fig1b": "fixed stepsize on f = |x|_2p^2p (eta = 1e-2)",
    "fig2a": "oracle stepsizes on f = |x|_2^2p (eta = 1)",
    "fig2b": "oracle stepsizes on f = |x|_2p^2p (eta = 1)",
}


def reproduce_figure(figure: str, out_dir: str, max_iters: int = 10_000,
                     etas_fig1a: Optional[dict] = None) -> list:
    """Run one figure's five experiments, write per-p CSVs and one SVG.

    Deterministic: repeated invocations produce byte-identical files.
    """
    if figure not in FIGURES:
        raise ConfigError(f"figure must be one of {FIGURES}, got {figure!r}")
    etas = etas_fig1a if etas_fig1a is not None else dict(FIG1A_DEFAULT_ETAS)
    os.makedirs(out_dir, exist_ok=True)
    written = []
    curves = []
    for p, cfg in _figure_runs(figure, max_iters, etas):
        bundle = build_experiment(cfg)
        trace = execute(cfg, bundle)
        path = os.path.join(out_dir, f"{figure}_p{p}.csv")
        write_trace_csv(path, trace)
        written.append(path)
        ratios = trace.grad_ratios()
        curves.append((f"p={p}", list(range(len(ratios))), ratios))
        print(summarize_trace(trace, f"{figure} p={p} eta={cfg.eta:g}"))
    svg_path = os.path.join(out_dir, f"{figure}.svg")
    _svg.write_log_plot(svg_path, curves, FIGURE_TITLES[figure],
                        "iteration k", "grad norm ratio")
    written.append(svg_path)
    return written


def cmd_reproduce(args) -> int:
    file_values = parse_config_file(args.config) if args.config else {}
    etas = _fig1a_etas(file_values)
    figures = FIGURES if args.figure == "all" else (args.figure,)
    for figure in figures:
        written = reproduce_figure(figure, args.out_dir,
                                   max_iters=args.max_iters, etas_fig1a=etas)
        for path in written:
            print(f"wrote {path}")
    return 0


def shipped_pairs():
    """Every (name, objective, oracle, dim) pair the suite verifies."""
    pairs = []
    quartic = QuarticProblem()
    pairs.append(("quartic", quartic.objective(), quartic.lfso(), 1))
    quad_problem, _ = make_norm_power(10, 1)
    pairs.append(("quadratic+constant", quad_problem.objective(),
                  constant_lfso(ConstantLfsoParams(l_f=2.0)), 10))
    for p in range(1, 6):
        problem, lfso = make_norm_power(10, p)
        pairs.append((f"norm2-pow p={p}", problem.objective(), lfso, 10))
    for p in range(1, 6):
        problem, lfso = make_lp_regression(np.eye(10), np.zeros(10), p)
        pairs.append((f"lp-norm p={p}", problem.objective(), lfso, 10))
    return pairs


def verify_all(seed: int, include_controls: bool = False,
               samples: int = 1000, run_iters: int = 500):
    """Run every check on every shipped pair plus short solver runs.

    Returns (report_text, total_violations).  With ``include_controls``
    the deliberately broken inputs join the suite, so violations are
    expected and the exit status is nonzero.
    """
    reports = []

    spec = checks.SampleSpec(num_points=samples, seed=seed)
    for name, objective, lfso, dim in shipped_pairs():
        reports.append(checks.check_lfso_validity(
            objective, lfso, spec, name=f"lfso-validity {name}"))
        reports.append(checks.check_monotone_in_R(
            lfso, checks.SampleSpec(num_points=32, seed=seed), dim,
            name=f"monotone-in-R {name}"))

    for p in range(1, 6):
        problem, lfso = make_norm_power(10, p)
        objective = problem.objective()
        config = SolverConfig(r_policy=RPolicy.grad_g_norm(problem.g.grad),
                              max_iters=run_iters)
        trace = run_lfso_gd(lfso, objective, np.ones(10), config,
                            inner_value=problem.g.eval)
        reports.append(checks.check_trace(trace, config.eta,
                                          name=f"trace norm2-pow p={p}"))
        reports.append(checks.check_composition_run(
            problem, trace, config.eta, name=f"composition norm2-pow p={p}"))

    for p in range(1, 6):
        problem, lfso = make_lp_regression(np.eye(10), np.zeros(10), p)
        objective = problem.objective()
        config = SolverConfig(
            r_policy=RPolicy.residual_inf_norm(problem.a, problem.b),
            max_iters=run_iters, use_grad_bound=True)
        trace = run_lfso_gd(lfso, objective, np.ones(10), config,
                            keep_iterates=True)
        reports.append(checks.check_trace(trace, config.eta,
                                          name=f"trace lp-norm p={p}"))
        try:
            reports.append(checks.check_regression_qlinear(
                problem, trace, name=f"qlinear lp-norm p={p}"))
        except AssumptionUnmetError as exc:
            reports.append(checks.CheckReport(
                name=f"qlinear lp-norm p={p}", violations=0,
                stats={"skipped": str(exc)}))

    quartic = QuarticProblem()
    config = SolverConfig(r_policy=RPolicy.constant(0.1), max_iters=200)
    trace = run_lfso_gd(quartic.lfso(), quartic.objective(),
                        np.array([1.0]), config)
    reports.append(checks.check_trace(trace, config.eta, name="trace quartic"))

    reports.append(checks.check_quartic_threshold())
    reports.append(checks.check_holder(
        checks.SampleSpec(num_points=200, seed=seed, x_box=(-3.0, 3.0)),
        t_values=[1.0, 1.5, 2.0, 3.0, 4.0]))

    if include_controls:
        quad_objective = shipped_pairs()[1][1]
        wrong = constant_lfso(ConstantLfsoParams(l_f=1.0))
        reports.append(checks.check_lfso_validity(
            quad_objective, wrong, spec, name="CONTROL wrong-oracle"))
        decreasing = Lfso(eval=lambda x, r: max(1.0, 2.0 - r))
        reports.append(checks.check_monotone_in_R(
            decreasing, checks.SampleSpec(num_points=8, seed=seed), 1,
            name="CONTROL decreasing-oracle"))

    total = sum(rep.violations for rep in reports)
    lines = [f"verification suite  seed={seed}  generator={checks.GENERATOR_ID}",
             ""]
    for rep in reports:
        lines.append(rep.render())
        lines.append("")
    lines.append(f"total_violations = {total}")
    lines.append(f"overall = {'ok' if total == 0 else 'FAIL'}")
    return "\n".join(lines) + "\n", total


def cmd_verify(args) -> int:
    text, total = verify_all(args.seed, include_controls=args.include_controls)
    print(text, end="")
    return 0 if total == 0 else 1


def _default_seed() -> int:
    try:
        return int(os.environ.get("LFSO_SEED", "0"))
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfso",
        description="Gradient descent with local smoothness-oracle stepsizes")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment, write a trace CSV")
    run.add_argument("--problem", choices=PROBLEMS, default=None)
    run.add_argument("--d", type=int, default=None)
    run.add_argument("--p", type=int, default=None)
    run.add_argument("--eta", type=float, default=None)
    run.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    run.add_argument("--grad-tol", dest="grad_tol", type=float, default=None)
    run.add_argument("--r-policy", dest="r_policy", default=None,
                     help="default | constant:<c> | grad-g-norm | residual-inf")
    run.add_argument("--x0", default=None, help="'ones' or a file of floats")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", dest="out_path", default=None)
    run.add_argument("--solver", choices=("lfso", "fixed"), default=None)
    run.add_argument("--data", dest="data_path", default=None,
                     help="matrix file for regression-file problems")
    run.add_argument("--config", default=None, help="key = value config file")
    run.set_defaults(handler=cmd_run)

    rep = sub.add_parser("reproduce", help="reproduce a figure's runs")
    rep.add_argument("--figure", choices=FIGURES + ("all",), required=True)
    rep.add_argument("--out-dir", default="figures")
    rep.add_argument("--max-iters", dest="max_iters", type=int, default=10_000)
    rep.add_argument("--config", default=None)
    rep.set_defaults(handler=cmd_reproduce)

    ver = sub.add_parser("verify", help="run the verification suite")
    ver.add_argument("--seed", type=int, default=_default_seed())
    ver.add_argument("--include-controls", action="store_true",
                     help="also run the deliberately broken control inputs")
    ver.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, LfsoError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
