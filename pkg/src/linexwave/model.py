"""Probability model components.

Holds the sparsity prior (point mass at zero mixed with a logistic
density), the LINEX loss, the noise model, and the level-dependent
elicitation of the point-mass weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

# exp() arguments beyond this are clamped; e**700 is still finite in float64,
# so saturated losses stay representable instead of overflowing to inf.
EXP_CLAMP = 700.0


@dataclass(frozen=True)
class MixturePrior:
    """Point mass at zero (weight ``alpha``) mixed with a logistic of scale ``tau``.

    ``alpha = 0`` is accepted so that level-dependent elicitation, which
    assigns weight zero at the primary resolution level, can feed rules
    directly; ``alpha = 1`` is not (the posterior would be degenerate).
    """

    alpha: float
    tau: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ParameterError(f"alpha must be in [0, 1), got {self.alpha}")
        if not self.tau > 0.0:
            raise ParameterError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class LinexLoss:
    """LINEX loss parameters: asymmetry ``a`` (nonzero) and magnitude ``b > 0``.

    Positive ``a`` penalizes overestimation exponentially and underestimation
    linearly; negative ``a`` swaps the two. ``b`` scales the whole loss and
    drops out of the Bayes rule.
    """

    a: float
    b: float = 1.0

    def __post_init__(self):
        if self.a == 0.0 or not np.isfinite(self.a):
            raise ParameterError(f"a must be finite and nonzero, got {self.a}")
        if not self.b > 0.0:
            raise ParameterError(f"b must be positive, got {self.b}")


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian noise with standard deviation ``sigma``."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")


def log_logistic_density(theta, tau: float):
    """log of the logistic density, stable for large ``|theta| / tau``."""
    if not tau > 0.0:
        raise ParameterError(f"tau must be positive, got {tau}")
    z = np.abs(np.asarray(theta, dtype=float)) / tau
    return -z - np.log(tau) - 2.0 * np.log1p(np.exp(-z))


def logistic_density(theta, tau: float):
    """Logistic density with scale ``tau``: exp(-t/tau) / (tau (1+exp(-t/tau))^2).

    Evaluated through ``exp(-|theta|/tau)`` (the density is symmetric), so it
    never overflows; it underflows to 0 far in the tails.
    """
    out = np.exp(log_logistic_density(theta, tau))
    if np.isscalar(theta):
        return float(out)
    return out


def linex_loss(delta, theta, loss: LinexLoss):
    """LINEX loss b [exp(a e) - a e - 1] with error e = delta - theta.

    Zero exactly at ``delta == theta`` and strictly convex in ``delta``.
    Arguments of the exponential beyond +/-700 are clamped, saturating the
    loss near 1e304 instead of overflowing; weighted integrals under default
    grids never reach that region.
    """
    z = loss.a * (np.asarray(delta, dtype=float) - np.asarray(theta, dtype=float))
    out = loss.b * (np.expm1(np.clip(z, -EXP_CLAMP, EXP_CLAMP)) - z)
    if np.isscalar(delta) and np.isscalar(theta):
        return float(out)
    return out


def elicit_alpha(j: int, primary_level: int, gamma: float = 2.0) -> float:
    """Point-mass weight for resolution level ``j``: 1 - (j - J0 + 1)**(-gamma).

    Zero at the primary level and increasing toward 1 at finer levels, so
    finer coefficients are presumed sparser. ``gamma = 2`` is the customary
    default when no other information is available.
    """
    if not gamma > 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if j < primary_level:
        raise ParameterError(
            f"level {j} is below the primary resolution level {primary_level}"
        )
    return 1.0 - (j - primary_level + 1.0) ** (-gamma)
