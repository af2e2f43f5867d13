"""Experiment driver: `gdp <subcommand> --config <path> --out <dir> --seed <n>`.

Subcommands: moments | flex | consistency | posterior | simulate |
randmean | density.  A config holds one experiment object or
{"experiments": [...]} with unique names; every experiment derives its
own child seed from its name, so adding one never shifts another's
randomness.  Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._quad import QuadratureError
from .bases import (BaseMeasure, Cauchy, Discrete, GridFunction,
                    HeavyTailedBaseError, Identity, Indicator, Normal,
                    SymmetricStable, Uniform)
from .density import GridDeficiencyError, density_estimate
from .mixing import BetaMixing, GridMixing, UnitMass
from .moments import kurtosis_ratio_curve, skewness_ratio_curve, summary_moments
from .posterior import (Dataset, InternalConsistencyError, constants,
                        posterior_mean, posterior_second_moment, tie_doubleton,
                        weight_asymptotics)
from .randmean import cf_identity_residual, sample_scale_mixture
from .reporting import metadata_comments, write_csv, write_json
from .rng import child_seed
from .stickprior import sample_process, sample_sticks
from .posterior import sample_posterior_process

SUBCOMMANDS = ("moments", "flex", "consistency", "posterior", "simulate",
               "randmean", "density")


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


def _require(obj, key, kind, context):
    if key not in obj:
        raise ConfigError(f"{context}: missing required key '{key}'")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"{context}: '{key}' has the wrong type")
    return value


def _mixing_from_config(obj):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError("mixing must be one of "
                          '{"beta": {...}}, {"grid": {...}}, {"unit_mass": {}}')
    kind, params = next(iter(obj.items()))
    try:
        if kind == "beta":
            return BetaMixing(_require(params, "a", (int, float), "mixing.beta"),
                              _require(params, "b", (int, float), "mixing.beta"))
        if kind == "grid":
            return GridMixing.from_unnormalized(
                _require(params, "nodes", list, "mixing.grid"),
                _require(params, "densities", list, "mixing.grid"))
        if kind == "unit_mass":
            return UnitMass()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"mixing.{kind}: {exc}") from exc
    raise ConfigError(f"unknown mixing kind '{kind}'")


def _distribution_from_config(obj):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError("base must name exactly one distribution")
    kind, params = next(iter(obj.items()))
    try:
        if kind == "normal":
            return Normal(params.get("mean", 0.0), params.get("sd", 1.0))
        if kind == "uniform":
            return Uniform(params.get("lo", 0.0), params.get("hi", 1.0))
        if kind == "discrete":
            return Discrete(_require(params, "values", list, "base.discrete"),
                            _require(params, "probs", list, "base.discrete"))
        if kind == "cauchy":
            return Cauchy(params.get("loc", 0.0), params.get("scale", 1.0))
        if kind == "stable":
            return SymmetricStable(_require(params, "alpha", (int, float),
                                            "base.stable"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"base.{kind}: {exc}") from exc
    raise ConfigError(f"unknown base kind '{kind}'")


def _transform_from_config(obj):
    if obj is None:
        return Identity()
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError("transform must name exactly one kind")
    kind, params = next(iter(obj.items()))
    try:
        if kind == "identity":
            return Identity()
        if kind == "indicator":
            return Indicator(_require(params, "lo", (int, float), "transform"),
                             _require(params, "hi", (int, float), "transform"))
        if kind == "grid":
            return GridFunction(_require(params, "x", list, "transform.grid"),
                                _require(params, "y", list, "transform.grid"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"transform.{kind}: {exc}") from exc
    raise ConfigError(f"unknown transform kind '{kind}'")


def _base_from_config(cfg, context):
    base = BaseMeasure(_distribution_from_config(_require(cfg, "base", dict,
                                                          context)),
                       _transform_from_config(cfg.get("transform")))
    return base


def _grid_from_config(obj, context):
    if isinstance(obj, list):
        return np.asarray(obj, dtype=float)
    if isinstance(obj, dict):
        if {"start", "stop", "count"} <= obj.keys():
            return np.linspace(obj["start"], obj["stop"], int(obj["count"]))
        if {"log10_start", "log10_stop", "count"} <= obj.keys():
            raw = np.logspace(obj["log10_start"], obj["log10_stop"],
                              int(obj["count"]))
            return np.unique(np.round(raw).astype(np.int64))
    raise ConfigError(f"{context}: expected a list or start/stop/count grid")


def _density_from_config(obj, context):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError(f"{context}: expected a density definition")
    kind, params = next(iter(obj.items()))
    if kind == "normal":
        dist = Normal(params.get("mean", 0.0), params.get("sd", 1.0))
        return dist.pdf
    if kind == "grid":
        return (np.asarray(_require(params, "x", list, context), dtype=float),
                np.asarray(_require(params, "y", list, context), dtype=float))
    raise ConfigError(f"{context}: unknown density kind '{kind}'")


def _dataset_from_config(obj, context):
    if isinstance(obj, list):
        return Dataset.distinct(obj)
    if isinstance(obj, dict):
        points = _require(obj, "points", list, context)
        tie = obj.get("tie")
        if tie is None:
            return Dataset.distinct(points)
        return Dataset.doubleton(points, int(tie[0]), int(tie[1]))
    raise ConfigError(f"{context}: data must be a list or a points/tie object")


# ---------------------------------------------------------------------------
# experiment runners: each returns (summary_line, write_jobs)
# ---------------------------------------------------------------------------

def _run_moments(name, cfg, out, seeds, figures):
    root, _ = seeds
    mixing = _mixing_from_config(_require(cfg, "mixing", dict, name))
    base = _base_from_config(cfg, name)
    result = summary_moments(mixing, base)
    quantities = ["mean", "variance", "third_central", "fourth_central"]
    values = [result[q] for q in quantities]
    jobs = [lambda: write_csv(out / f"{name}.csv",
                              [("quantity", quantities), ("value", values)],
                              metadata_comments(cfg, root))]
    if figures:
        from .figures import render_moments
        jobs.append(lambda: render_moments(out / f"{name}.png", quantities,
                                           values))
    return (f"{name}: mean={result['mean']:.6g} "
            f"variance={result['variance']:.6g}"), jobs


def _run_flex(name, cfg, out, seeds, figures):
    root, _ = seeds
    b0 = float(_require(cfg, "b0", (int, float), name))
    x = _grid_from_config(_require(cfg, "x", (list, dict), name), f"{name}.x")
    if b0 <= 0 or np.any(x <= 0.5):
        raise ConfigError(f"{name}: need b0 > 0 and every x > 1/2")
    curve = skewness_ratio_curve(b0, x)
    jobs = [lambda: write_csv(out / f"{name}.csv",
                              [("x", curve["x"]), ("a", curve["a"]),
                               ("b", curve["b"]), ("rho", curve["rho"])],
                              metadata_comments(cfg, root))]
    summary = {"b0": b0, "rho_max": curve["rho_max"],
               "rho_min": curve["rho_min"]}
    kurt = None
    if cfg.get("kurtosis"):
        q4 = float(cfg.get("q0_fourth_standardized", 3.0))
        kurt = kurtosis_ratio_curve(b0, q4, x)
        jobs.append(lambda: write_csv(
            out / f"{name}_kurtosis.csv",
            [("x", kurt["x"]), ("a", kurt["a"]), ("b", kurt["b"]),
             ("kurtosis_ratio", kurt["kurtosis_ratio"])],
            metadata_comments(cfg, root)))
        summary["q0_fourth_standardized"] = q4
    jobs.append(lambda: write_json(out / f"{name}.json", summary, cfg, root))
    if figures:
        from .figures import render_flex
        jobs.append(lambda: render_flex(out / f"{name}.png", curve, kurt))
    return (f"{name}: rho range [{curve['rho_min']:.6g}, "
            f"{curve['rho_max']:.6g}]"), jobs


def _run_consistency(name, cfg, out, seeds, figures):
    root, _ = seeds
    a = float(_require(cfg, "a", (int, float), name))
    b = float(_require(cfg, "b", (int, float), name))
    grid = _grid_from_config(_require(cfg, "n_grid", (list, dict), name),
                             f"{name}.n_grid")
    if a <= 0 or b <= 0 or grid.size < 2 or grid.max() / grid.min() < 100:
        raise ConfigError(f"{name}: need a, b > 0 and an n_grid spanning "
                          "two decades")
    result = weight_asymptotics(a, b, grid)
    payload = {"a": a, "b": b, "slope": result["slope"],
               "intercept": result["intercept"],
               "constant": result["constant"],
               "theory_constant": result["theory_constant"]}
    jobs = [
        lambda: write_json(out / f"{name}.json", payload, cfg, root),
        lambda: write_csv(out / f"{name}.csv",
                          [("n", result["n"]), ("u", result["u"])],
                          metadata_comments(cfg, root)),
    ]
    if figures:
        from .figures import render_consistency
        jobs.append(lambda: render_consistency(out / f"{name}.png", result))
    return (f"{name}: slope={result['slope']:.4f} "
            f"constant={result['constant']:.6g}"), jobs


def _run_posterior(name, cfg, out, seeds, figures):
    root, _ = seeds
    mixing = _mixing_from_config(_require(cfg, "mixing", dict, name))
    data = _dataset_from_config(_require(cfg, "data", (list, dict), name),
                                f"{name}.data")
    payload = {"n": data.n}
    if data.is_tied:
        payload.update(tie_doubleton(mixing, data))
        summary = (f"{name}: doubleton outside factor "
                   f"{payload['outside_mass_factor']:.6g}")
    else:
        base = _base_from_config(cfg, name)
        pc = constants(mixing, data.n)
        payload.update(pc.as_dict())
        payload["posterior_mean"] = posterior_mean(mixing, base, data)
        second = posterior_second_moment(mixing, base, data)
        payload["posterior_variance"] = second["variance"]
        summary = (f"{name}: w_n={pc.w:.6g} "
                   f"mean={payload['posterior_mean']:.6g} "
                   f"variance={payload['posterior_variance']:.6g}")
    jobs = [lambda: write_json(out / f"{name}.json", payload, cfg, root)]
    if figures and not data.is_tied:
        from .figures import render_posterior
        jobs.append(lambda: render_posterior(out / f"{name}.png", payload))
    return summary, jobs


def _run_simulate(name, cfg, out, seeds, figures):
    root, child = seeds
    mixing = _mixing_from_config(_require(cfg, "mixing", dict, name))
    base = _base_from_config(cfg, name)
    count = int(cfg.get("count", 1))
    epsilon = float(cfg.get("epsilon", 1e-12))
    data = cfg.get("data")
    jobs = []
    first = None
    if data is None:
        for r in range(count):
            real = sample_process(mixing, base, epsilon=epsilon,
                                  seed=child_seed(child, f"{r}"))
            first = first or real
            path = out / f"{name}_{r:03d}.csv"
            jobs.append(lambda real=real, path=path: real.to_csv(
                path, metadata_comments(cfg, root)))
        kind = "prior realizations"
    else:
        dataset = _dataset_from_config(data, f"{name}.data")
        for r in range(count):
            draw = sample_posterior_process(
                mixing, base, dataset, epsilon=epsilon,
                seed=child_seed(child, f"{r}"))
            first = first or draw.realization
            path = out / f"{name}_{r:03d}.csv"
            jobs.append(lambda draw=draw, path=path: draw.to_csv(
                path, metadata_comments(cfg, root)))
        kind = "posterior draws"
    if figures and first is not None:
        from .figures import render_realization
        jobs.append(lambda: render_realization(out / f"{name}.png", first))
    return f"{name}: wrote {count} {kind}", jobs


def _run_randmean(name, cfg, out, seeds, figures):
    root, child = seeds
    mixing = _mixing_from_config(_require(cfg, "mixing", dict, name))
    count = int(cfg.get("count", 10000))
    alpha = float(cfg.get("alpha", 2.0))
    normal_convention = bool(cfg.get("normal_convention", alpha == 2.0))
    samples = sample_scale_mixture(mixing, count, alpha=alpha,
                                   normal_convention=normal_convention,
                                   epsilon=float(cfg.get("epsilon", 1e-12)),
                                   seed=child)
    jobs = [lambda: write_csv(out / f"{name}.csv", [("sample", samples)],
                              metadata_comments(cfg, root))]
    summary = f"{name}: {count} draws (alpha={alpha:g})"
    cf_result = None
    if "cf_check" in cfg:
        check = cfg["cf_check"]
        if check.get("kind", "cauchy") != "cauchy":
            raise ConfigError(f"{name}.cf_check: only the cauchy identity "
                              "check is built in")
        u = _grid_from_config(_require(check, "u", (list, dict), name),
                              f"{name}.cf_check.u")
        cauchy_cf = lambda v: np.exp(-np.abs(v))
        cf_result = cf_identity_residual(mixing, cauchy_cf, cauchy_cf, u)
        jobs.append(lambda: write_json(
            out / f"{name}_cf.json",
            {"u": list(map(float, cf_result["u"])),
             "residual": list(map(float, cf_result["residual"])),
             "max_residual": cf_result["max_residual"]},
            cfg, root))
        summary += f" cf_residual={cf_result['max_residual']:.3e}"
    if figures:
        from .figures import render_cf_residual, render_samples
        jobs.append(lambda: render_samples(out / f"{name}.png", samples,
                                           title=f"{name} scale-mixture draws"))
        if cf_result is not None:
            jobs.append(lambda: render_cf_residual(out / f"{name}_cf.png",
                                                   cf_result))
    return summary, jobs


def _run_density(name, cfg, out, seeds, figures):
    root, _ = seeds
    mixing = _mixing_from_config(_require(cfg, "mixing", dict, name))
    data = np.asarray(_require(cfg, "data", list, name), dtype=float)
    prior = _density_from_config(_require(cfg, "prior", dict, name),
                                 f"{name}.prior")
    noise = _density_from_config(_require(cfg, "noise", dict, name),
                                 f"{name}.noise")
    t_grid = _grid_from_config(_require(cfg, "t_grid", (list, dict), name),
                               f"{name}.t_grid")
    theta_grid = (None if "theta_grid" not in cfg else
                  _grid_from_config(cfg["theta_grid"], f"{name}.theta_grid"))
    estimate = density_estimate(mixing, data, prior, noise, t_grid,
                                theta_grid=theta_grid)
    payload = {"n": int(data.size), "w_n": estimate.w,
               "posterior_mean": estimate.posterior_mean,
               "posterior_sd": estimate.posterior_sd,
               "integral": estimate.integral}
    jobs = [
        lambda: write_csv(out / f"{name}.csv",
                          [("t", estimate.t), ("p_hat", estimate.p_hat)],
                          metadata_comments(cfg, root)),
        lambda: write_csv(out / f"{name}_posterior.csv",
                          [("theta", estimate.theta_grid),
                           ("density", estimate.posterior_density)],
                          metadata_comments(cfg, root)),
        lambda: write_json(out / f"{name}.json", payload, cfg, root),
    ]
    if figures:
        from .figures import render_density
        jobs.append(lambda: render_density(out / f"{name}.png", estimate, data))
    return (f"{name}: w_n={estimate.w:.6g} "
            f"integral={estimate.integral:.8f}"), jobs


_RUNNERS = {
    "moments": _run_moments,
    "flex": _run_flex,
    "consistency": _run_consistency,
    "posterior": _run_posterior,
    "simulate": _run_simulate,
    "randmean": _run_randmean,
    "density": _run_density,
}

_NUMERICAL_FAILURES = (QuadratureError, GridDeficiencyError,
                       InternalConsistencyError, HeavyTailedBaseError,
                       FloatingPointError)


def run(subcommand, config, out_dir, seed, figures=True):
    """Run one subcommand's experiments; returns the summary lines.

    All computation happens before any file is written, so a failing
    experiment leaves no partial outputs.
    """
    if subcommand not in _RUNNERS:
        raise ConfigError(f"unknown subcommand '{subcommand}'")
    if isinstance(config, dict) and "experiments" in config:
        experiments = config["experiments"]
        if not isinstance(experiments, list) or not experiments:
            raise ConfigError("'experiments' must be a nonempty list")
        named = []
        for k, exp in enumerate(experiments):
            if not isinstance(exp, dict):
                raise ConfigError(f"experiments[{k}] must be an object")
            named.append((str(_require(exp, "name", str, f"experiments[{k}]")),
                          exp))
        if len({n for n, _ in named}) != len(named):
            raise ConfigError("experiment names must be unique")
    else:
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")
        named = [(str(config.get("name", subcommand)), config)]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runner = _RUNNERS[subcommand]
    staged = []
    for name, exp in named:
        summary, jobs = runner(name, exp, out,
                               (seed, child_seed(seed, name)), figures)
        staged.append((summary, jobs))
    summaries = []
    for summary, jobs in staged:
        for job in jobs:
            job()
        summaries.append(summary)
    return summaries


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="gdp",
        description="Experiment driver for stick-breaking random measures")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="root RNG seed")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering")
    args = parser.parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        summaries = run(args.subcommand, config, args.out, args.seed,
                        figures=not args.no_figures)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_FAILURES as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    for line in summaries:
        print(line)
    return 0


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
