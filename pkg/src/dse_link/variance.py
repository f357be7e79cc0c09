"""Taylor-linearization variance approximations for dual system estimators.

The dual system estimate is a smooth function of the three observed
counts; expanding it to first order around the expected counts and
plugging in the multinomial moments of an independent two-source capture
gives the closed-form approximations below. The corrected estimator picks
up one extra additive term from the rematch-study noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .estimators import CaptureProbabilities, ContingencyCounts, EstimationError

if TYPE_CHECKING:
    from .rematch import NuEstimate


class EstimateBelowMargin(EstimationError):
    """Population estimate does not exceed an observed list size."""


@dataclass(frozen=True)
class MultinomialMoments:
    """Second moments of the observed counts for an independent two-source
    capture of N individuals (multinomial over the four capture cells)."""

    var_n1plus: float
    var_nplus1: float
    var_n11: float
    cov_n1plus_nplus1: float
    cov_n1plus_n11: float
    cov_nplus1_n11: float


def multinomial_moments(N: float, capture: CaptureProbabilities) -> MultinomialMoments:
    """Variances and covariances of (n1plus, nplus1, n11).

    The two covariances with n11 are kept in their expanded grouping; both
    reduce algebraically to N*p11*p0plus and N*p11*pplus0, and the
    simulation cross-check in the test suite confirms the expanded forms.
    """
    if N <= 0:
        raise ValueError(f"N must be positive, got {N}")
    p1, p2 = capture.p1plus, capture.pplus1
    p11 = p1 * p2
    var_n11 = N * p11 * (1.0 - p11)
    return MultinomialMoments(
        var_n1plus=N * p1 * (1.0 - p1),
        var_nplus1=N * p2 * (1.0 - p2),
        var_n11=var_n11,
        cov_n1plus_nplus1=0.0,
        cov_n1plus_n11=var_n11 - N * p1**2 * p2 * capture.pplus0,
        cov_nplus1_n11=var_n11 - N * p1 * p2 * capture.p0plus * p2,
    )


def dse_variance_approx(N: float, capture: CaptureProbabilities) -> float:
    """Linearized variance of the dual system estimator:
    N * p0plus * pplus0 / (p1plus * pplus1)."""
    if N <= 0:
        raise ValueError(f"N must be positive, got {N}")
    return N * (capture.p0plus * capture.pplus0) / (capture.p1plus * capture.pplus1)


def naive_variance_approx(
    N: float, capture: CaptureProbabilities, sigma2_eps: float
) -> float:
    """Linearized variance of the corrected estimator.

    Equals the dual-system term plus sigma2_eps / (p1plus * pplus1)**2,
    where sigma2_eps is the variance of the rematch correction.
    """
    if sigma2_eps < 0:
        raise ValueError(f"sigma2_eps must be >= 0, got {sigma2_eps}")
    return dse_variance_approx(N, capture) + sigma2_eps / (
        capture.p1plus * capture.pplus1
    ) ** 2


def naive_variance_estimate(
    n_tilde: float, counts_star: ContingencyCounts, nu: "NuEstimate"
) -> float:
    """Plug-in variance estimate for the corrected estimator.

    Replaces N by the estimate ``n_tilde`` and the capture probabilities by
    p1plus = n1plus / n_tilde, pplus1 = nplus1 / n_tilde. The estimate must
    exceed both list sizes so the plug-in probabilities stay inside (0, 1);
    boundary cases raise rather than clamp, since they signal a logically
    inconsistent input.
    """
    if nu.sigma2_eps < 0:
        raise ValueError(f"sigma2_eps must be >= 0, got {nu.sigma2_eps}")
    if n_tilde <= counts_star.n1plus or n_tilde <= counts_star.nplus1:
        raise EstimateBelowMargin(
            f"estimate {n_tilde} does not exceed both list sizes "
            f"({counts_star.n1plus}, {counts_star.nplus1})"
        )
    p1_hat = counts_star.n1plus / n_tilde
    p2_hat = counts_star.nplus1 / n_tilde
    p0_hat = 1.0 - p1_hat
    pp0_hat = 1.0 - p2_hat
    return n_tilde * (p0_hat * pp0_hat) / (p1_hat * p2_hat) + nu.sigma2_eps / (
        p1_hat * p2_hat
    ) ** 2
