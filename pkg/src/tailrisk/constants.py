"""Scalar coefficients of the second-order expansions.

Each coefficient has the shape (f(beta) - 1)/(alpha beta) with f(0) = 1, so at
beta = 0 it is replaced by its limit f'(0)/alpha (computed analytically from
d/dbeta ln f).  ``|beta| < BETA_EPS`` is routed to that branch.

The ``convention="printed"`` option returns, at beta = 0 only, the
alternative values alpha^{-2} ln n, -alpha^{-2} ln(alpha-1) and
alpha^{-2} ln(n/(alpha-1)) for zeta, xi and chi.  Those drop the 1/(alpha-1)
contributions of the limit, so they are not continuous in beta.
"""

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import DomainError

__all__ = [
    "BETA_EPS",
    "eta",
    "zeta",
    "xi",
    "chi",
    "pow_ratio",
    "expectile_sum_coef",
    "div_e_coef",
    "div_cte_coef",
    "div_ce_coef",
    "ExpansionCoefficients",
    "coefficients",
]

BETA_EPS = 1e-14


def _check(alpha, beta, n=1, *, need_mean=True):
    if need_mean and not alpha > 1:
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if beta > 0:
        raise DomainError(f"beta must be nonpositive, got {beta}")
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")


def _check_convention(convention):
    if convention not in ("limit", "printed"):
        raise ValueError(f"unknown convention {convention!r}")


def _eta_integrand(x, alpha):
    # ((1-x)^{-alpha} - 1)/x, smooth on [0, 1/2] with value alpha at 0
    if x == 0.0:
        return alpha
    return math.expm1(-alpha * math.log1p(-x)) / x


def eta(alpha: float, *, split: bool = True) -> float:
    """eta_alpha = alpha int_0^{1/2} ((1-x)^{-alpha} - 1) x^{-alpha-1} dx + 2^{2alpha-1} - 2^alpha.

    The integrand is x^{-alpha} g(x) with g(x) = ((1-x)^{-alpha} - 1)/x smooth
    and g(0) = alpha.  With ``split=True`` the piece [0, 1e-6] uses the series
    g = alpha + alpha(alpha+1)x/2 + O(x^2) and the rest is plain adaptive
    quadrature; with ``split=False`` the whole range is integrated with
    QUADPACK's algebraic endpoint weight x^{-alpha}.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"eta needs 0 < alpha < 1, got {alpha}")
    if split:
        eps = 1e-6
        head = alpha * eps ** (1 - alpha) / (1 - alpha) + alpha * (alpha + 1) / 2 * eps ** (2 - alpha) / (2 - alpha)
        body, _ = integrate.quad(
            lambda x: _eta_integrand(x, alpha) * x**-alpha, eps, 0.5, epsabs=1e-13, epsrel=1e-13, limit=200
        )
        integral = head + body
    else:
        integral, _ = integrate.quad(
            _eta_integrand, 0.0, 0.5, args=(alpha,), weight="alg", wvar=(-alpha, 0.0), epsabs=1e-13, epsrel=1e-13
        )
    return alpha * integral + 2 ** (2 * alpha - 1) - 2**alpha


def _log_shift(alpha, beta):
    """ln((alpha-1)/(alpha-beta-1)) without cancellation for small beta."""
    return -math.log1p(-beta / (alpha - 1))


def _ratio(alpha, beta, log_f, dlog_f0):
    """(f(beta) - 1)/(alpha beta), or f'(0)/alpha when beta is ~0."""
    if abs(beta) < BETA_EPS:
        return dlog_f0 / alpha
    return math.expm1(log_f) / (alpha * beta)


def zeta(alpha: float, beta: float, n: int, *, convention: str = "limit") -> float:
    """zeta^n = (1/(alpha beta)) (n^{beta/alpha}(alpha-1)/(alpha-beta-1) - 1)."""
    _check(alpha, beta, n)
    _check_convention(convention)
    if convention == "printed" and abs(beta) < BETA_EPS:
        return math.log(n) / alpha**2
    log_f = beta / alpha * math.log(n) + _log_shift(alpha, beta)
    return _ratio(alpha, beta, log_f, math.log(n) / alpha + 1 / (alpha - 1))


def xi(alpha: float, beta: float, *, convention: str = "limit") -> float:
    """xi = (1/(alpha beta)) ((alpha-1)^{1-beta/alpha}/(alpha-beta-1) - 1)."""
    _check(alpha, beta)
    _check_convention(convention)
    if convention == "printed" and abs(beta) < BETA_EPS:
        return -math.log(alpha - 1) / alpha**2
    log_f = -beta / alpha * math.log(alpha - 1) + _log_shift(alpha, beta)
    return _ratio(alpha, beta, log_f, -math.log(alpha - 1) / alpha + 1 / (alpha - 1))


def chi(alpha: float, beta: float, n: int, *, convention: str = "limit") -> float:
    """chi^n = (1/(alpha beta)) ((n/(alpha-1))^{beta/alpha} (alpha+beta-1)/(alpha-beta-1) - 1)."""
    _check(alpha, beta, n)
    _check_convention(convention)
    log_ratio = math.log(n) - math.log(alpha - 1)
    if convention == "printed" and abs(beta) < BETA_EPS:
        return log_ratio / alpha**2
    if alpha + beta - 1 <= 0:
        # f changes sign; evaluate directly (never at beta ~ 0 since alpha > 1)
        f = (n / (alpha - 1)) ** (beta / alpha) * (alpha + beta - 1) / (alpha - beta - 1)
        return (f - 1) / (alpha * beta)
    log_f = beta / alpha * log_ratio + math.log1p(beta / (alpha - 1)) + _log_shift(alpha, beta)
    return _ratio(alpha, beta, log_f, log_ratio / alpha + 2 / (alpha - 1))


def pow_ratio(alpha: float, beta: float, n: int) -> float:
    """(n^{beta/alpha} - 1)/(alpha beta), alpha^{-2} ln n at beta = 0."""
    _check(alpha, beta, n, need_mean=False)
    return _ratio(alpha, beta, beta / alpha * math.log(n), math.log(n) / alpha)


def expectile_sum_coef(alpha: float, beta: float, n: int) -> float:
    """(1/(alpha beta)) (n^{beta/alpha} (alpha-1)^{1-beta/alpha}/(alpha-beta-1) - 1).

    beta = 0 limit: d/dbeta ln f = ln n/alpha - ln(alpha-1)/alpha + 1/(alpha-beta-1),
    so the coefficient tends to (ln(n/(alpha-1))/alpha + 1/(alpha-1))/alpha.
    """
    _check(alpha, beta, n)
    log_f = beta / alpha * math.log(n / (alpha - 1)) + _log_shift(alpha, beta)
    return _ratio(alpha, beta, log_f, math.log(n / (alpha - 1)) / alpha + 1 / (alpha - 1))


def div_e_coef(alpha: float, beta: float, n: int) -> float:
    """A-coefficient of the expectile diversification expansion.

    (n^{beta/alpha} - 1)(alpha-1)^{1-beta/alpha} / (alpha beta (alpha-beta-1)).
    """
    _check(alpha, beta, n)
    scale = math.exp((1 - beta / alpha) * math.log(alpha - 1) - math.log(alpha - beta - 1))
    return pow_ratio(alpha, beta, n) * scale


def div_cte_coef(alpha: float, beta: float, n: int) -> float:
    """A-coefficient of the CTE diversification expansion.

    (1/(alpha beta)) ((n^{beta/alpha}(alpha-1) - beta)/(alpha-beta-1) - 1),
    which simplifies to (n^{beta/alpha} - 1)(alpha-1)/(alpha beta (alpha-beta-1)).
    """
    _check(alpha, beta, n)
    return pow_ratio(alpha, beta, n) * (alpha - 1) / (alpha - beta - 1)


def div_ce_coef(alpha: float, beta: float, n: int) -> float:
    """A-coefficient of the CE diversification expansion.

    (n^{beta/alpha} - 1)(alpha-1)^{-beta/alpha}(alpha+beta-1) / (alpha beta (alpha-beta-1)).
    """
    _check(alpha, beta, n)
    scale = (alpha - 1) ** (-beta / alpha) * (alpha + beta - 1) / (alpha - beta - 1)
    return pow_ratio(alpha, beta, n) * scale


@dataclass(frozen=True)
class ExpansionCoefficients:
    """All expansion coefficients for one (alpha, beta, n)."""

    alpha: float
    beta: float
    n: int
    zeta: float
    xi: float
    chi: float
    pow_ratio: float
    expectile_sum: float


def coefficients(alpha: float, beta: float, n: int) -> ExpansionCoefficients:
    return ExpansionCoefficients(
        alpha,
        beta,
        n,
        zeta=zeta(alpha, beta, n),
        xi=xi(alpha, beta),
        chi=chi(alpha, beta, n),
        pow_ratio=pow_ratio(alpha, beta, n),
        expectile_sum=expectile_sum_coef(alpha, beta, n),
    )
