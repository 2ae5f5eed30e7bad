"""Command-line front end.

Subcommands: ``denoise`` (CSV signal -> DWT -> shrink -> IDWT -> CSV),
``rule-curve`` (tabulate an estimator), ``risk`` (pointwise diagnostics plus
Bayes risk), ``bayes-risk`` (Bayes risk only) and ``simulate`` (seeded Monte
Carlo study). Exit codes: 0 success, 2 usage or input error, 3 numeric
failure. Diagnostics go to stderr; data goes to the output files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .config import load_pipeline_config
from .errors import InputError, LinexWaveError, NumericError, ParameterError
from .model import LinexLoss, MixturePrior, NoiseModel, elicit_alpha
from .rules import (
    GlobalAlpha,
    LevelDependentAlpha,
    QuadratureSpec,
    ShrinkageRule,
    apply_rule,
    linex_rule,
    dump_rule_curve_csv,
    rule_curve,
)
from .risk import bayes_risk, bayes_risk_report, dump_risk_profile_csv, risk_profile
from .sim import config_digest, load_study_config, run_study
from .transform import (
    daubechies_filter,
    dump_coefficients_csv,
    dwt,
    estimate_sigma,
    idwt,
    truncate_to_dyadic,
)

# Denoising defaults: 10-moment filter, LINEX rule with a=1, diffuse prior
# scale tau=5, level-dependent point-mass weight with gamma=2, J0=3.
DENOISE_DEFAULTS = {
    "rule": "linex_logistic",
    "a": 1.0,
    "b": 1.0,
    "tau": 5.0,
    "gamma": 2.0,
    "alpha": None,
    "sigma": None,
    "primary_level": 3,
    "vanishing_moments": 10,
    "node_count": 64,
    "truncation": 8.0,
    "threshold": None,
}

# Risk/rule-curve defaults: unit noise and prior scales, global alpha 0.9.
ANALYSIS_DEFAULTS = dict(DENOISE_DEFAULTS, tau=1.0, alpha=0.9, sigma=1.0)

_RULE_CHOICES = ("linex_logistic", "posterior_mean", "soft_universal", "soft_sure")
SHRINK_CHANGE_TOLERANCE = 1e-12
ZERO_WARN_FACTOR = 1e-3


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def read_signal_csv(path) -> np.ndarray:
    """Read a one-column or (x, y) two-column CSV; an optional single header
    row is skipped; x values are ignored beyond establishing order."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    values = []
    for i, line in enumerate(lines):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (1, 2):
            raise InputError(f"{path}:{i + 1}: expected 1 or 2 columns, got {len(parts)}")
        try:
            values.append(float(parts[-1]))
        except ValueError:
            if i == 0:
                continue  # header row
            raise InputError(f"{path}:{i + 1}: non-numeric value {parts[-1]!r}") from None
    if len(values) < 2:
        raise InputError(f"{path}: need at least 2 numeric samples, got {len(values)}")
    return np.asarray(values, dtype=float)


def write_signal_csv(path, samples: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("value\n")
        for v in samples:
            fh.write(f"{v:.17g}\n")


def _merged_options(args, defaults: dict) -> dict:
    opts = dict(defaults)
    if getattr(args, "config", None):
        opts.update(load_pipeline_config(args.config))
    for key in defaults:
        flag = getattr(args, key, None)
        if flag is not None:
            opts[key] = flag
    return opts


def _quadrature(opts) -> QuadratureSpec:
    return QuadratureSpec(node_count=int(opts["node_count"]),
                          truncation=float(opts["truncation"]))


def _build_rule(opts, sigma: float | None) -> ShrinkageRule:
    kind = opts["rule"]
    if kind not in _RULE_CHOICES:
        raise InputError(f"unknown rule {kind!r}; choose from {', '.join(_RULE_CHOICES)}")
    noise = None if sigma is None else NoiseModel(sigma)
    if kind in ("linex_logistic", "posterior_mean"):
        alpha = opts["alpha"] if opts["alpha"] is not None else 0.9
        prior = MixturePrior(alpha=float(alpha), tau=float(opts["tau"]))
        if kind == "linex_logistic":
            return ShrinkageRule(kind, a=float(opts["a"]), prior=prior, noise=noise)
        return ShrinkageRule(kind, prior=prior, noise=noise)
    threshold = opts["threshold"]
    return ShrinkageRule(kind, noise=noise,
                         threshold=None if threshold is None else float(threshold))


def _warn_if_not_shrinking(rule: ShrinkageRule, spec: QuadratureSpec) -> None:
    if rule.kind != "linex_logistic":
        return
    at_zero = linex_rule(0.0, rule.a, rule.prior, rule.noise, spec)
    if abs(at_zero) > ZERO_WARN_FACTOR * rule.noise.sigma:
        _info(
            f"warning: rule does not shrink the origin (delta(0) = {at_zero:.6g}); "
            "this parameter choice is outside the wavelet-shrinkage regime"
        )


def cmd_denoise(args) -> int:
    opts = _merged_options(args, DENOISE_DEFAULTS)
    spec = _quadrature(opts)
    signal = read_signal_csv(args.input)
    import warnings as _warnings

    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        signal = truncate_to_dyadic(signal)
    for w in caught:
        _info(f"warning: {w.message}")
    big_j = int(np.log2(signal.size))
    j0 = int(opts["primary_level"])
    if j0 >= big_j:
        _info(f"warning: primary level {j0} too deep for n={signal.size}; using {big_j - 1}")
        j0 = big_j - 1
    filt = daubechies_filter(int(opts["vanishing_moments"]))
    decomp = dwt(signal, filt, j0)
    sigma = opts["sigma"]
    if sigma is None:
        sigma = estimate_sigma(decomp)
        _info(f"estimated sigma: {sigma:.6g}")
    else:
        sigma = float(sigma)
        _info(f"sigma override: {sigma:.6g}")
    if sigma <= 0.0:
        _info("warning: sigma is zero (noiseless input); writing the signal unchanged")
        write_signal_csv(args.output, signal)
        if args.coefficients:
            with open(args.coefficients, "w", encoding="utf-8", newline="") as fh:
                dump_coefficients_csv(decomp, fh)
        return 0
    rule = _build_rule(opts, sigma)
    if opts["alpha"] is not None:
        policy = GlobalAlpha()
        _info(f"global alpha: {float(opts['alpha']):.6g}")
    else:
        policy = LevelDependentAlpha(gamma=float(opts["gamma"]))
        if rule.kind in ("linex_logistic", "posterior_mean"):
            levels = ", ".join(
                f"alpha({j})={elicit_alpha(j, j0, policy.gamma):.4f}"
                for j in decomp.levels()
            )
            _info(f"level-dependent point-mass weights: {levels}")
    _warn_if_not_shrinking(rule, spec) if rule.noise is not None else None
    shrunk = apply_rule(decomp, rule, policy, spec)
    changed = sum(
        int(np.sum(np.abs(shrunk.details[j] - decomp.details[j]) > SHRINK_CHANGE_TOLERANCE))
        for j in decomp.levels()
    )
    total = sum(v.size for v in decomp.details.values())
    _info(f"shrinkage summary: {changed} of {total} detail coefficients changed")
    denoised = idwt(shrunk, filt)
    write_signal_csv(args.output, denoised)
    if args.coefficients:
        with open(args.coefficients, "w", encoding="utf-8", newline="") as fh:
            dump_coefficients_csv(shrunk, fh)
    return 0


def cmd_rule_curve(args) -> int:
    opts = _merged_options(args, ANALYSIS_DEFAULTS)
    spec = _quadrature(opts)
    sigma = float(opts["sigma"]) if opts["sigma"] is not None else 1.0
    rule = _build_rule(opts, sigma)
    if args.grid_points < 0:
        raise InputError("--grid-points must be nonnegative")
    grid = np.linspace(args.grid_min, args.grid_max, args.grid_points)
    _warn_if_not_shrinking(rule, spec)
    d, delta = rule_curve(rule, grid, spec, n=args.n)
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        dump_rule_curve_csv(d, delta, fh)
    return 0


def _risk_like(args, with_profile: bool) -> int:
    opts = _merged_options(args, ANALYSIS_DEFAULTS)
    spec = _quadrature(opts)
    sigma = float(opts["sigma"]) if opts["sigma"] is not None else 1.0
    noise = NoiseModel(sigma)
    rule = _build_rule(opts, sigma)
    loss = LinexLoss(a=float(opts["a"]), b=float(opts["b"]))
    alpha = float(opts["alpha"]) if opts["alpha"] is not None else 0.9
    prior = MixturePrior(alpha=alpha, tau=float(opts["tau"]))
    if with_profile:
        if args.grid_points < 0:
            raise InputError("--grid-points must be nonnegative")
        grid = np.linspace(args.grid_min, args.grid_max, args.grid_points)
        profile = risk_profile(grid, rule, loss, noise, spec)
        with open(args.output_profile, "w", encoding="utf-8", newline="") as fh:
            dump_risk_profile_csv(profile, fh)
    result = bayes_risk(rule, loss, prior, noise, spec)
    report = bayes_risk_report(result, {
        "rule": rule.kind,
        "a": float(opts["a"]),
        "b": float(opts["b"]),
        "alpha": alpha,
        "tau": float(opts["tau"]),
        "sigma": sigma,
        "node_count": spec.node_count,
        "truncation": spec.truncation,
    })
    with open(args.output_report, "w", encoding="utf-8", newline="") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _info(f"bayes risk: {result.value:.6g}")
    return 0


def cmd_risk(args) -> int:
    return _risk_like(args, with_profile=True)


def cmd_bayes_risk(args) -> int:
    return _risk_like(args, with_profile=False)


def cmd_simulate(args) -> int:
    config = load_study_config(args.config)
    with open(args.config, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    result = run_study(config)
    outdir = args.output_dir
    import os

    os.makedirs(outdir, exist_ok=True)
    summary = {
        "scenario": config.scenario,
        "n": config.n,
        "snr": config.snr,
        "replications": config.replications,
        "seed": config.seed,
        "config_sha256": config_digest(raw),
        "rules": result.labels,
        "amse": {k: float(v) for k, v in result.amse.items()},
        "amae": {k: float(v) for k, v in result.amae.items()},
    }
    with open(os.path.join(outdir, "summary.json"), "w", encoding="utf-8", newline="") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, matrix in (("mse.csv", result.mse_matrix), ("mae.csv", result.mae_matrix)):
        with open(os.path.join(outdir, name), "w", encoding="utf-8", newline="") as fh:
            fh.write("replication," + ",".join(result.labels) + "\n")
            for r in range(matrix.shape[0]):
                row = ",".join(f"{v:.17g}" for v in matrix[r])
                fh.write(f"{r},{row}\n")
    _info(f"wrote {outdir}/summary.json, mse.csv, mae.csv")
    return 0


def _add_pipeline_flags(p: argparse.ArgumentParser, *, include_loss_b: bool = False) -> None:
    p.add_argument("--config", help="JSON pipeline config; flags override file values")
    p.add_argument("--rule", choices=_RULE_CHOICES, default=None)
    p.add_argument("--a", type=float, default=None, help="LINEX asymmetry parameter")
    if include_loss_b:
        p.add_argument("--b", type=float, default=None, help="LINEX magnitude parameter")
    p.add_argument("--tau", type=float, default=None, help="logistic prior scale")
    p.add_argument("--alpha", type=float, default=None,
                   help="global point-mass weight; omit for level-dependent weighting")
    p.add_argument("--gamma", type=float, default=None,
                   help="exponent of the level-dependent weight")
    p.add_argument("--sigma", type=float, default=None, help="noise scale override")
    p.add_argument("--threshold", type=float, default=None,
                   help="fixed threshold for the soft rules")
    p.add_argument("--node-count", dest="node_count", type=int, default=None)
    p.add_argument("--truncation", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linexwave",
        description="Bayesian wavelet shrinkage under asymmetric LINEX loss",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="denoise a CSV signal")
    d.add_argument("--input", required=True, help="CSV with one value column or x,y pairs")
    d.add_argument("--output", required=True, help="denoised signal CSV")
    d.add_argument("--coefficients", default=None,
                   help="optionally dump shrunk coefficients as (level,index,value) CSV")
    d.add_argument("--moments", dest="vanishing_moments", type=int, default=None,
                   help="Daubechies vanishing moments, 1..10")
    d.add_argument("--primary-level", dest="primary_level", type=int, default=None,
                   help="coarsest detail level J0 (clamped to J-1 with a warning)")
    _add_pipeline_flags(d)
    d.set_defaults(func=cmd_denoise)

    c = sub.add_parser("rule-curve", help="tabulate an estimator over a coefficient grid")
    c.add_argument("--output", required=True, help="CSV of (d, delta) rows")
    c.add_argument("--grid-min", type=float, default=-10.0)
    c.add_argument("--grid-max", type=float, default=10.0)
    c.add_argument("--grid-points", type=int, default=401)
    c.add_argument("--n", type=int, default=None,
                   help="sample size used to derive the universal threshold")
    _add_pipeline_flags(c)
    c.set_defaults(func=cmd_rule_curve)

    r = sub.add_parser("risk", help="risk profile CSV plus Bayes risk JSON")
    r.add_argument("--output-profile", required=True)
    r.add_argument("--output-report", required=True)
    r.add_argument("--grid-min", type=float, default=-10.0)
    r.add_argument("--grid-max", type=float, default=10.0)
    r.add_argument("--grid-points", type=int, default=401)
    _add_pipeline_flags(r, include_loss_b=True)
    r.set_defaults(func=cmd_risk)

    br = sub.add_parser("bayes-risk", help="Bayes risk JSON only (risk without a grid)")
    br.add_argument("--output-report", required=True)
    _add_pipeline_flags(br, include_loss_b=True)
    br.set_defaults(func=cmd_bayes_risk)

    s = sub.add_parser("simulate", help="run a seeded Monte Carlo study")
    s.add_argument("--config", required=True, help="study config JSON")
    s.add_argument("--output-dir", required=True)
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NumericError as exc:
        _info(f"numeric failure: {exc}")
        return 3
    except (InputError, ParameterError) as exc:
        _info(f"error: {exc}")
        return 2
    except LinexWaveError as exc:
        _info(f"error: {exc}")
        return 2
    except OSError as exc:
        _info(f"error: {exc}")
        return 2


def console_main() -> None:
    sys.exit(main())
