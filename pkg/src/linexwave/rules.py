"""Coefficient-wise shrinkage estimators and the quadrature engine they share.

The Bayes rules integrate against the standard normal density via
Gauss-Hermite quadrature. Writing phi for the standard normal pdf, g for
the logistic density with scale tau, and alpha for the point-mass weight,
the posterior expectation of exp(-a theta) given an observed coefficient d
is

    [ (alpha/sigma) phi(d/sigma) + (1-alpha) I_num ]
    ------------------------------------------------
    [ (alpha/sigma) phi(d/sigma) + (1-alpha) I_den ]

with I_num = int exp(-a (sigma u + d)) g(sigma u + d) phi(u) du and
I_den the same integral without the exponential tilt. The LINEX-optimal
estimate is (-1/a) log of that ratio; the quadratic-loss (posterior mean)
rule shares the same denominator. All mixture terms are combined in
log space with a max shift, so the tilt exp(-a(sigma u + d)) never
overflows for any coefficient magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .errors import NumericError, ParameterError
from .model import MixturePrior, NoiseModel, elicit_alpha, log_logistic_density
from .transform import WaveletDecomposition

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)

RULE_KINDS = ("linex_logistic", "posterior_mean", "soft_universal", "soft_sure")


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Hermite configuration for expectations against the normal density.

    ``truncation`` is the half-width, in standard-normal units, used by
    finite-range validation integrals; the Gauss-Hermite nodes themselves
    are not truncated.
    """

    node_count: int = 64
    truncation: float = 8.0

    def __post_init__(self):
        if self.node_count < 16:
            raise ParameterError(f"node_count must be >= 16, got {self.node_count}")
        if not self.truncation >= 6.0:
            raise ParameterError(f"truncation must be >= 6, got {self.truncation}")


DEFAULT_QUADRATURE = QuadratureSpec()


@lru_cache(maxsize=32)
def _normal_nodes(node_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes u and weights w with sum(w) = 1 such that
    int h(u) phi(u) du ~= sum w_i h(u_i)."""
    x, w = hermgauss(node_count)
    return np.sqrt(2.0) * x, w / np.sqrt(np.pi)


def gauss_weighted_integral(integrand: Callable, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Integrate ``integrand(u) * phi(u)`` over the real line.

    The integrand is called once with the full node vector; callables that
    only accept scalars are evaluated node by node.
    """
    u, w = _normal_nodes(spec.node_count)
    vals = np.asarray(integrand(u), dtype=float)
    if vals.shape != u.shape:
        vals = np.array([float(integrand(ui)) for ui in u])
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise NumericError(f"integrand returned {vals[i]} at node u={u[i]}")
    return float(w @ vals)


def _log_phi(z: np.ndarray) -> np.ndarray:
    return -0.5 * z * z - _LOG_SQRT_2PI


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis)
    return m + np.log(np.sum(np.exp(a - np.expand_dims(m, axis)), axis=axis))


def _mixture_log_terms(d: np.ndarray, prior: MixturePrior, noise: NoiseModel,
                       spec: QuadratureSpec):
    """Shared posterior pieces for a batch of coefficients.

    Returns ``(log_point, log_w_g, theta_nodes)`` where ``log_point`` is
    log[(alpha/sigma) phi(d/sigma)] (-inf when alpha is 0), ``log_w_g[i, k]``
    is log[w_i g(sigma u_i + d_k)] and ``theta_nodes[i, k] = sigma u_i + d_k``.
    """
    sigma, tau, alpha = noise.sigma, prior.tau, prior.alpha
    u, w = _normal_nodes(spec.node_count)
    theta_nodes = sigma * u[:, None] + d[None, :]
    log_w_g = np.log(w)[:, None] + log_logistic_density(theta_nodes, tau)
    with np.errstate(divide="ignore"):
        log_point = np.log(alpha) - np.log(sigma) + _log_phi(d / sigma)
    return log_point, log_w_g, theta_nodes


def _log_posterior_exp(d: np.ndarray, a: float, prior: MixturePrior,
                       noise: NoiseModel, spec: QuadratureSpec) -> np.ndarray:
    log_point, log_w_g, theta_nodes = _mixture_log_terms(d, prior, noise, spec)
    with np.errstate(divide="ignore"):
        log_cont = np.log1p(-prior.alpha)
    log_den = np.logaddexp(log_point, log_cont + _logsumexp(log_w_g, axis=0))
    log_num = np.logaddexp(
        log_point, log_cont + _logsumexp(log_w_g - a * theta_nodes, axis=0)
    )
    out = log_num - log_den
    if not np.all(np.isfinite(out)):
        raise NumericError("posterior exponential moment is not finite")
    return out


def _as_batch(d) -> tuple[np.ndarray, bool]:
    arr = np.asarray(d, dtype=float)
    scalar = arr.ndim == 0
    return np.atleast_1d(arr).ravel(), scalar


def _restore(value: np.ndarray, template, scalar: bool):
    if scalar:
        return float(value[0])
    return value.reshape(np.asarray(template).shape)


def linex_posterior_exp(d, a: float, prior: MixturePrior, noise: NoiseModel,
                        spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """Posterior expectation of exp(-a theta) given the coefficient ``d``.

    Strictly positive; computed in log space, so it only overflows when the
    moment itself exceeds the float64 range (|a d| of order 700), in which
    case inf is returned. Use :func:`linex_rule` for the estimate itself,
    which stays finite.
    """
    if a == 0.0:
        raise ParameterError("a must be nonzero")
    batch, scalar = _as_batch(d)
    out = np.exp(_log_posterior_exp(batch, a, prior, noise, spec))
    return _restore(out, d, scalar)


def linex_rule(d, a: float, prior: MixturePrior, noise: NoiseModel,
               spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """LINEX-optimal shrinkage: (-1/a) log posterior-expectation of exp(-a theta)."""
    if a == 0.0:
        raise ParameterError("a must be nonzero")
    batch, scalar = _as_batch(d)
    out = -_log_posterior_exp(batch, a, prior, noise, spec) / a
    return _restore(out, d, scalar)


def posterior_mean_rule(d, prior: MixturePrior, noise: NoiseModel,
                        spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """Posterior mean of theta given ``d`` (the quadratic-loss Bayes rule)."""
    batch, scalar = _as_batch(d)
    log_point, log_w_g, theta_nodes = _mixture_log_terms(batch, prior, noise, spec)
    with np.errstate(divide="ignore"):
        log_terms = np.log1p(-prior.alpha) + log_w_g
    shift = np.maximum(log_point, log_terms.max(axis=0))
    scaled = np.exp(log_terms - shift[None, :])
    den = np.exp(log_point - shift) + scaled.sum(axis=0)
    num = (theta_nodes * scaled).sum(axis=0)
    out = num / den
    if not np.all(np.isfinite(out)):
        raise NumericError("posterior mean is not finite")
    return _restore(out, d, scalar)


def soft_threshold(d, lam: float):
    """Soft thresholding: sign(d) max(|d| - lam, 0)."""
    if lam < 0.0:
        raise ParameterError(f"threshold must be nonnegative, got {lam}")
    arr = np.asarray(d, dtype=float)
    out = np.sign(arr) * np.maximum(np.abs(arr) - lam, 0.0)
    if np.isscalar(d):
        return float(out)
    return out


def universal_threshold(noise: NoiseModel, n: int) -> float:
    """Noise-calibrated threshold sigma sqrt(2 log n)."""
    if n < 2:
        raise ParameterError(f"sample size must be >= 2, got {n}")
    return float(noise.sigma * np.sqrt(2.0 * np.log(n)))


def sure_threshold(detail_coefficients, noise: NoiseModel) -> float:
    """Threshold minimizing Stein's unbiased risk estimate for soft thresholding.

    Candidates are the rescaled magnitudes |d_k|/sigma clipped at
    sqrt(2 log n), plus 0; SURE(lam) = n - 2 #{|d_k|/sigma <= lam}
    + sum min(|d_k|/sigma, lam)^2. Ties break toward the smaller threshold.
    The winner is returned in original units (times sigma).
    """
    d = np.asarray(detail_coefficients, dtype=float).ravel()
    if d.size == 0:
        raise ParameterError("detail coefficient vector is empty")
    n = d.size
    m = np.sort(np.abs(d) / noise.sigma)
    cap = np.sqrt(2.0 * np.log(n))
    candidates = np.unique(np.concatenate(([0.0], np.minimum(m, cap))))
    prefix = np.concatenate(([0.0], np.cumsum(m * m)))
    counts = np.searchsorted(m, candidates, side="right")
    sure = n - 2.0 * counts + prefix[counts] + candidates**2 * (n - counts)
    best = int(np.argmin(sure))
    return float(candidates[best] * noise.sigma)


@dataclass(frozen=True)
class GlobalAlpha:
    """Use the rule's own prior point-mass weight at every level."""


@dataclass(frozen=True)
class LevelDependentAlpha:
    """Elicit the point-mass weight per resolution level, 1 - (j-J0+1)**(-gamma)."""

    gamma: float = 2.0

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")


AlphaPolicy = Union[GlobalAlpha, LevelDependentAlpha]


@dataclass(frozen=True)
class ShrinkageRule:
    """A named coefficient-wise estimator.

    ``kind`` is one of ``linex_logistic``, ``posterior_mean``,
    ``soft_universal`` or ``soft_sure``. The Bayes kinds need ``prior``
    (and ``a`` for the LINEX rule). ``noise`` may be left unset and bound
    where the rule is applied (the simulation harness supplies the known
    per-replication scale). Soft kinds without a fixed ``threshold`` derive
    one at application time: universal from the sample size, SURE from the
    coefficients being shrunk.
    """

    kind: str
    a: float | None = None
    prior: MixturePrior | None = None
    noise: NoiseModel | None = None
    threshold: float | None = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ParameterError(f"unknown rule kind {self.kind!r}")
        if self.kind == "linex_logistic":
            if self.a is None or self.a == 0.0:
                raise ParameterError("linex_logistic requires a nonzero 'a'")
            if self.prior is None:
                raise ParameterError("linex_logistic requires 'prior'")
        elif self.kind == "posterior_mean":
            if self.prior is None:
                raise ParameterError("posterior_mean requires 'prior'")
        else:
            if self.threshold is not None and self.threshold < 0.0:
                raise ParameterError("fixed threshold must be nonnegative")

    def label(self) -> str:
        if self.kind == "linex_logistic":
            return f"linex_logistic(a={self.a:g})"
        return self.kind


def resolve_threshold(rule: ShrinkageRule, *, n: int | None = None,
                      coefficients=None) -> float:
    """Threshold for a soft rule: fixed, universal from ``n``, or SURE from data."""
    if rule.threshold is not None:
        return rule.threshold
    if rule.noise is None:
        raise ParameterError(f"{rule.kind} has neither a fixed threshold nor a noise model")
    if rule.kind == "soft_universal":
        if n is None:
            raise ParameterError("soft_universal needs the sample size n")
        return universal_threshold(rule.noise, n)
    if rule.kind == "soft_sure":
        if coefficients is None:
            raise ParameterError("soft_sure needs the coefficients being shrunk")
        return sure_threshold(coefficients, rule.noise)
    raise ParameterError(f"rule kind {rule.kind!r} has no threshold")


def as_estimator(rule: ShrinkageRule, spec: QuadratureSpec = DEFAULT_QUADRATURE, *,
                 n: int | None = None, coefficients=None,
                 alpha: float | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Bind a rule's parameters and return a plain coefficient-wise callable.

    ``alpha`` overrides the prior's point-mass weight (used by the
    level-dependent policy); soft rules resolve their threshold once, here.
    """
    if rule.kind in ("linex_logistic", "posterior_mean"):
        if rule.noise is None:
            raise ParameterError(f"{rule.kind} has no noise model bound")
        prior = rule.prior
        if alpha is not None and alpha != prior.alpha:
            prior = MixturePrior(alpha=alpha, tau=prior.tau)
        if rule.kind == "linex_logistic":
            return lambda d: linex_rule(d, rule.a, prior, rule.noise, spec)
        return lambda d: posterior_mean_rule(d, prior, rule.noise, spec)
    lam = resolve_threshold(rule, n=n, coefficients=coefficients)
    return lambda d: soft_threshold(d, lam)


def apply_rule(decomposition: WaveletDecomposition, rule: ShrinkageRule,
               alpha_policy: AlphaPolicy = GlobalAlpha(),
               spec: QuadratureSpec = DEFAULT_QUADRATURE) -> WaveletDecomposition:
    """Shrink every detail coefficient of a decomposition; smooth passes through.

    Under :class:`LevelDependentAlpha` the point-mass weight grows with the
    resolution level, starting at 0 on the primary level (those coefficients
    are shrunk least). Soft rules use one threshold for all levels: the
    universal threshold from the signal length, or the SURE minimizer over
    the pooled detail coefficients.
    """
    out = decomposition.copy()
    levelwise = isinstance(alpha_policy, LevelDependentAlpha)
    if levelwise and rule.kind not in ("linex_logistic", "posterior_mean"):
        levelwise = False  # soft rules have no prior to re-weight
    if not levelwise:
        estimate = as_estimator(
            rule, spec,
            n=decomposition.signal_length,
            coefficients=decomposition.all_details(),
        )
        for j in out.levels():
            out.details[j] = np.asarray(estimate(out.details[j]), dtype=float)
        return out
    j0 = decomposition.primary_level
    for j in out.levels():
        alpha_j = elicit_alpha(j, j0, alpha_policy.gamma)
        estimate = as_estimator(rule, spec, alpha=alpha_j)
        out.details[j] = np.asarray(estimate(out.details[j]), dtype=float)
    return out


def rule_curve(rule: ShrinkageRule, grid,
               spec: QuadratureSpec = DEFAULT_QUADRATURE, *,
               n: int | None = None, coefficients=None) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate a rule on a grid of coefficient values, for plotting/export.

    Soft rules must either carry a fixed threshold or be given ``n``
    (universal) or ``coefficients`` (SURE) to derive one.
    """
    d = np.asarray(grid, dtype=float)
    estimate = as_estimator(rule, spec, n=n, coefficients=coefficients)
    if d.size == 0:
        return d, np.empty(0)
    return d, np.asarray(estimate(d), dtype=float)


def dump_rule_curve_csv(d: np.ndarray, delta: np.ndarray, fh) -> None:
    """Write a rule curve as CSV rows (d, delta)."""
    fh.write("d,delta\n")
    for x, y in zip(d, delta):
        fh.write(f"{x:.17g},{y:.17g}\n")
