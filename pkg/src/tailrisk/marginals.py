"""Heavy-tailed marginal distributions with second-order regularly varying tails.

Every family exposes the survival function, its inverse, the density, the
(truncated) mean and the second-order profile ``(alpha, beta, A)`` consumed by
the asymptotic formulas.  All methods accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import special

from ._quad import breakpoints, integrate_segments
from .errors import DomainError, InfiniteMeanError, InfiniteVarianceError

__all__ = [
    "SecondOrderProfile",
    "MarginalModel",
    "Pareto",
    "Burr",
    "AbsStudentT",
    "Frechet",
    "Weiss",
    "marginal_from_config",
]


@dataclass(frozen=True)
class SecondOrderProfile:
    """Indices and auxiliary function of a 2RV_{-alpha, beta} tail."""

    alpha: float
    beta: float
    aux: Callable[[float], float] = field(compare=False, repr=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.beta > 0:
            raise DomainError(f"beta must be nonpositive, got {self.beta}")

    def limit_function(self, x):
        """H(x) = x^{-alpha} (x^beta - 1)/beta, or x^{-alpha} ln x when beta = 0."""
        x = np.asarray(x, dtype=float)
        if self.beta == 0:
            return x ** -self.alpha * np.log(x)
        return x ** -self.alpha * np.expm1(self.beta * np.log(x)) / self.beta


def _ret(x):
    """Return a Python float for 0-d results, the array otherwise."""
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


class MarginalModel:
    """Common interface of the catalog families.

    Subclasses implement ``sf``, ``isf``, ``pdf``, ``aux`` and set ``alpha``,
    ``beta``.  Everything else is derived here.
    """

    family: str = ""
    alpha: float
    beta: float

    # -- family specific -------------------------------------------------
    def _sf(self, x):
        raise NotImplementedError

    def _isf(self, w):
        raise NotImplementedError

    def _pdf(self, x):
        raise NotImplementedError

    def aux(self, t):
        """Auxiliary function A(t) of the 2RV profile."""
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    @property
    def support_lower(self) -> float:
        return 0.0

    # -- derived -------------------------------------------------------------
    @property
    def profile(self) -> SecondOrderProfile:
        return SecondOrderProfile(self.alpha, self.beta, self.aux)

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.support_lower) or np.any(np.isnan(x)):
            raise DomainError(f"x must be >= support_lower={self.support_lower}")
        return x

    def sf(self, x):
        """Survival function 1 - F(x)."""
        return _ret(self._sf(self._check_x(x)))

    def cdf(self, x):
        """Distribution function F(x)."""
        return _ret(1.0 - self._sf(self._check_x(x)))

    def pdf(self, x):
        return _ret(self._pdf(self._check_x(x)))

    def isf(self, w):
        """Inverse survival function: the x with sf(x) = w, for w in (0, 1]."""
        w = np.asarray(w, dtype=float)
        if np.any(~((w > 0) & (w <= 1))):
            raise DomainError("survival level must lie in (0, 1]")
        return _ret(self._isf(w))

    def quantile(self, p):
        """Generalized inverse F^{<-}(p) for p in (0, 1)."""
        p = np.asarray(p, dtype=float)
        if np.any(~((p > 0) & (p < 1))):
            raise DomainError("p must lie in (0, 1)")
        return _ret(self._isf(1.0 - p))

    def sample(self, rng: np.random.Generator, count: int):
        """Draw ``count`` variates by inversion, X = isf(1 - U)."""
        u = rng.random(count)
        with np.errstate(divide="ignore"):
            return self._isf(1.0 - u)

    def _require_mean(self):
        if self.alpha <= 1:
            raise InfiniteMeanError(f"mean is infinite for alpha={self.alpha} <= 1")

    def mean(self) -> float:
        """E[X]; finite only for alpha > 1."""
        self._require_mean()
        return self._mean

    @cached_property
    def _mean(self) -> float:
        lo = self.support_lower
        pts = breakpoints(self, lo, math.inf)
        return lo + integrate_segments(lambda x: float(self._sf(x)), pts)

    def truncated_mean(self, t) -> float:
        """mu(t) = E[X; X <= t], by parts as lo - t sf(t) + int_lo^t sf."""
        t = float(self._check_x(t))
        lo = self.support_lower
        if t == lo:
            return 0.0
        pts = breakpoints(self, lo, t)
        body = integrate_segments(lambda x: float(self._sf(x)), pts)
        return lo - t * float(self._sf(t)) + body

    def second_moment(self) -> float:
        if self.alpha <= 2:
            raise InfiniteVarianceError(f"variance is infinite for alpha={self.alpha} <= 2")
        lo = self.support_lower
        pts = breakpoints(self, lo, math.inf)
        return lo * lo + integrate_segments(lambda x: 2.0 * x * float(self._sf(x)), pts)

    def variance(self) -> float:
        return self.second_moment() - self.mean() ** 2

    def expect(self, func, upper=math.inf) -> float:
        """int_lo^upper func(x) dF(x) by segmented quadrature against the density."""
        lo = self.support_lower
        pts = breakpoints(self, lo, upper)
        return integrate_segments(lambda x: func(x) * float(self._pdf(x)), pts)


@dataclass(frozen=True, eq=True)
class Pareto(MarginalModel):
    """Lomax-type Pareto: sf(x) = (k/(x+k))^alpha, x >= 0."""

    alpha: float
    k: float = 1.0
    family = "pareto"

    def __post_init__(self):
        if not (self.alpha > 0 and self.k > 0):
            raise DomainError("Pareto needs alpha > 0 and k > 0")

    @property
    def beta(self) -> float:
        return -1.0

    def _sf(self, x):
        return (self.k / (x + self.k)) ** self.alpha

    def _isf(self, w):
        with np.errstate(divide="ignore"):
            return self.k * np.expm1(-np.log(w) / self.alpha)

    def _pdf(self, x):
        return self.alpha * self.k ** self.alpha / (x + self.k) ** (self.alpha + 1)

    def aux(self, t):
        return _ret(self.alpha * self.k / np.asarray(t, dtype=float))

    @cached_property
    def _mean(self) -> float:
        return self.k / (self.alpha - 1)

    def truncated_mean(self, t) -> float:
        t = float(self._check_x(t))
        a, k = self.alpha, self.k
        if a == 1:
            return k * math.log1p(t / k) - t * float(self._sf(t))
        return k / (a - 1) - (a * t + k) / (a - 1) * float(self._sf(t))

    def to_config(self) -> dict:
        return {"family": self.family, "alpha": self.alpha, "k": self.k}


@dataclass(frozen=True, eq=True)
class Burr(MarginalModel):
    """Burr XII: sf(x) = (1 + x^{-beta})^{alpha/beta} with beta < 0."""

    alpha: float
    beta: float
    family = "burr"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta < 0):
            raise DomainError("Burr needs alpha > 0 and beta < 0")

    def _sf(self, x):
        return (1.0 + x ** -self.beta) ** (self.alpha / self.beta)

    def _isf(self, w):
        with np.errstate(divide="ignore"):
            return np.expm1(self.beta / self.alpha * np.log(w)) ** (-1.0 / self.beta)

    def _pdf(self, x):
        a, b = self.alpha, self.beta
        with np.errstate(divide="ignore"):
            return a * x ** (-b - 1) * (1.0 + x ** -b) ** (a / b - 1)

    def aux(self, t):
        return _ret(self.alpha * np.asarray(t, dtype=float) ** self.beta)

    @cached_property
    def _mean(self) -> float:
        a, b = self.alpha, self.beta
        return -(a / b) * special.beta((1 - a) / b, (b - 1) / b)

    def to_config(self) -> dict:
        return {"family": self.family, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True, eq=True)
class AbsStudentT(MarginalModel):
    """Absolute value of a standard Student t variable with alpha degrees of freedom."""

    alpha: float
    family = "abs_student_t"

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("AbsStudentT needs alpha > 0")

    @property
    def beta(self) -> float:
        return -2.0

    def _sf(self, x):
        return 2.0 * special.stdtr(self.alpha, -x)

    def _isf(self, w):
        # P(|T| > x) = I_z(a/2, 1/2) with z = a/(a + x^2).  Invert on whichever
        # side keeps z or 1 - z away from 1.
        a = self.alpha
        w = np.asarray(w, dtype=float)
        big = w > 0.5
        ratio = np.empty_like(w)
        y = special.betaincinv(0.5, a / 2, 1.0 - w[big])  # y = 1 - z
        ratio[big] = y / (1.0 - y)
        z = special.betaincinv(a / 2, 0.5, w[~big])
        ratio[~big] = (1.0 - z) / z
        return np.sqrt(a * ratio)

    def _pdf(self, x):
        a = self.alpha
        logc = special.gammaln((a + 1) / 2) - special.gammaln(a / 2) - 0.5 * math.log(a * math.pi)
        return 2.0 * np.exp(logc - (a + 1) / 2 * np.log1p(x * x / a))

    def aux(self, t):
        # sf(t) = C t^{-a} (1 - a^2 (a+1) / (2 (a+2)) t^{-2} + ...), hence
        # A(t) = a^2 (a+1)/(a+2) t^{-2}.
        a = self.alpha
        return _ret(a * a * (a + 1) / (a + 2) * np.asarray(t, dtype=float) ** -2.0)

    def aux_printed(self, t):
        """The alternative auxiliary alpha^2/(alpha+2) t^{-2} (lacks the alpha+1 factor)."""
        a = self.alpha
        return _ret(a * a / (a + 2) * np.asarray(t, dtype=float) ** -2.0)

    @property
    def mean_closed_form(self) -> float:
        """E|T| = 2 sqrt(a) Gamma((a+1)/2) / (sqrt(pi) (a-1) Gamma(a/2))."""
        self._require_mean()
        a = self.alpha
        return 2 * math.sqrt(a) * math.exp(special.gammaln((a + 1) / 2) - special.gammaln(a / 2)) / (
            math.sqrt(math.pi) * (a - 1)
        )

    @property
    def ratio_mean(self) -> float:
        """alpha/(alpha-1): the value used by the closed-form table variant, not E|T|."""
        self._require_mean()
        return self.alpha / (self.alpha - 1)

    def to_config(self) -> dict:
        return {"family": self.family, "alpha": self.alpha}


@dataclass(frozen=True, eq=True)
class Frechet(MarginalModel):
    """Standard Frechet: F(x) = exp(-x^{-alpha})."""

    alpha: float
    family = "frechet"

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("Frechet needs alpha > 0")

    @property
    def beta(self) -> float:
        return -self.alpha

    def _sf(self, x):
        with np.errstate(divide="ignore", over="ignore"):
            return -np.expm1(-(x ** -self.alpha))

    def _isf(self, w):
        with np.errstate(divide="ignore"):
            return (-np.log1p(-w)) ** (-1.0 / self.alpha)

    def _pdf(self, x):
        a = self.alpha
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            val = a * x ** (-a - 1) * np.exp(-(x ** -a))
        return np.where(np.asarray(x) > 0, val, 0.0)

    def aux(self, t):
        return _ret(self.alpha * np.asarray(t, dtype=float) ** -self.alpha / 2)

    @cached_property
    def _mean(self) -> float:
        return math.gamma(1 - 1 / self.alpha)

    def to_config(self) -> dict:
        return {"family": self.family, "alpha": self.alpha}


@dataclass(frozen=True, eq=True)
class Weiss(MarginalModel):
    """sf(x) = x^{-alpha} (1 + x^beta), beta < 0, on x >= the root of sf = 1."""

    alpha: float
    beta: float
    family = "weiss"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta < 0):
            raise DomainError("Weiss needs alpha > 0 and beta < 0")

    @cached_property
    def _lower(self) -> float:
        return float(self._solve_log_sf(np.array(0.0)))

    @property
    def support_lower(self) -> float:
        return self._lower

    def _sf(self, x):
        x = np.maximum(x, self._lower)
        return x ** -self.alpha * (1.0 + x ** self.beta)

    def _solve_log_sf(self, logw):
        """Solve -a y + log1p(e^{b y}) = logw for y = ln x by Newton's method.

        g(y) is convex and decreasing, and the start y0 = -logw/a has g(y0) >= 0,
        so the iterates increase monotonically to the root without overshoot.
        """
        a, b = self.alpha, self.beta
        logw = np.asarray(logw, dtype=float)
        y = -logw / a
        for _ in range(60):
            e = np.exp(b * y)
            g = -a * y + np.log1p(e) - logw
            dg = -a + b * e / (1.0 + e)
            step = g / dg
            y = y - step
            if np.all(np.abs(step) <= 1e-14 * np.maximum(1.0, np.abs(y))):
                break
        return np.exp(y)

    def _isf(self, w):
        with np.errstate(divide="ignore"):
            return self._solve_log_sf(np.log(w))

    def _pdf(self, x):
        a, b = self.alpha, self.beta
        return a * x ** (-a - 1) + (a - b) * x ** (b - a - 1)

    def aux(self, t):
        return _ret(self.beta * np.asarray(t, dtype=float) ** self.beta)

    def to_config(self) -> dict:
        return {"family": self.family, "alpha": self.alpha, "beta": self.beta}


_FAMILIES = {
    "pareto": (Pareto, ("alpha", "k")),
    "burr": (Burr, ("alpha", "beta")),
    "abs_student_t": (AbsStudentT, ("alpha",)),
    "frechet": (Frechet, ("alpha",)),
    "weiss": (Weiss, ("alpha", "beta")),
}


def marginal_from_config(cfg: dict) -> MarginalModel:
    """Build a marginal from ``{"family": ..., "alpha": ..., ...}``."""
    try:
        cls, keys = _FAMILIES[cfg["family"]]
    except KeyError:
        raise DomainError(f"unknown marginal family in {cfg!r}") from None
    kwargs = {key: float(cfg[key]) for key in keys if key in cfg}
    return cls(**kwargs)
