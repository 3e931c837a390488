"""Sarmanov kernels phi with their limits, decay indices, ranges and moments.

A :class:`KernelSpec` is the configuration-level description ("fgm",
"power" with exponent p, "exp").  Binding it to a marginal gives a
:class:`Kernel` that caches the centring constant and the range of phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._quad import breakpoints, integrate_segments
from .errors import DivergentMomentError, DomainError, InfiniteMeanError
from .marginals import MarginalModel, Pareto

__all__ = [
    "KernelSpec",
    "Kernel",
    "RhoBounds",
    "pearson_rho",
    "rho_bounds",
    "admissible_interval",
    "NUMERICAL_SUPPORT_EPS",
]

NUMERICAL_SUPPORT_EPS = 1e-12
KINDS = ("fgm", "power", "exp")


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    p: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "power":
            if self.p is None or self.p == 0:
                raise DomainError("power kernel needs a nonzero exponent p")
        elif self.p is not None:
            raise DomainError(f"{self.kind} kernel takes no exponent")

    @classmethod
    def fgm(cls):
        return cls("fgm")

    @classmethod
    def power(cls, p):
        return cls("power", float(p))

    @classmethod
    def exponential(cls):
        return cls("exp")

    def to_config(self) -> dict:
        if self.kind == "power":
            return {"kernel": "power", "p": self.p}
        return {"kernel": self.kind}

    @classmethod
    def from_config(cls, cfg: dict) -> "KernelSpec":
        kind = cfg.get("kernel")
        if kind == "power":
            return cls.power(cfg["p"])
        return cls(kind)

    def bind(self, marginal: MarginalModel) -> "Kernel":
        return Kernel(self, marginal)


def _density_exponent_at_lower(m: MarginalModel) -> float:
    """Local power gamma of the density near the lower end, pdf(x) ~ c x^gamma."""
    eps = 1e-200
    f1, f2 = float(m.pdf(eps)), float(m.pdf(2 * eps))
    if f1 <= 0 or f2 <= 0:
        return math.inf
    return math.log(f2 / f1) / math.log(2.0)


class Kernel:
    """A kernel bound to a marginal.

    Attributes
    ----------
    d_limit : float
        lim_{x->inf} phi(x).
    rho_index : float
        Regular-variation index of phi - d (``-inf`` for the exponential kernel).
    range_inf, range_sup : float
        Bounds of phi over the support.  When phi is unbounded they are taken
        over the numerical support [F^{<-}(1e-12), F^{<-}(1 - 1e-12)] and
        ``truncated`` is set.
    """

    def __init__(self, spec: KernelSpec, marginal: MarginalModel):
        self.spec = spec
        self.marginal = marginal
        self.truncated = False
        m = marginal
        if spec.kind == "fgm":
            self.center = 0.5
            self.d_limit = -1.0
            self.rho_index = -m.alpha
            self.range_inf, self.range_sup = -1.0, 1.0
        elif spec.kind == "exp":
            g = m.expect(lambda x: math.exp(-x))
            self.center = g
            self.d_limit = -g
            self.rho_index = -math.inf
            self.range_inf = -g
            self.range_sup = math.exp(-m.support_lower) - g
        else:
            p = spec.p
            self.center = self._power_moment(p)
            self.rho_index = p
            if p < 0:
                # decreasing from phi(lower) to the limit -E[X^p]
                self.d_limit = -self.center
                self.range_inf = -self.center
                lo = m.support_lower
                if lo == 0:
                    lo = float(m.quantile(NUMERICAL_SUPPORT_EPS))
                    self.truncated = True
                self.range_sup = lo**p - self.center
            else:
                # increasing and unbounded above
                self.d_limit = math.inf
                self.range_inf = m.support_lower**p - self.center
                self.range_sup = float(m.quantile(1 - NUMERICAL_SUPPORT_EPS)) ** p - self.center
                self.truncated = True

    def _power_moment(self, p: float) -> float:
        m = self.marginal
        if p >= m.alpha:
            raise DivergentMomentError(f"E[X^{p}] diverges for alpha={m.alpha}")
        if p < 0 and m.support_lower == 0 and p + _density_exponent_at_lower(m) <= -1:
            raise DivergentMomentError(f"E[X^{p}] diverges at the origin")
        return m.expect(lambda x: x**p if x > 0 else 0.0)

    def __repr__(self):
        return f"Kernel({self.spec!r}, {self.marginal!r})"

    def phi(self, x):
        """Kernel value phi(x)."""
        x = np.asarray(self.marginal._check_x(x), dtype=float)
        return _scalar(self._phi(x))

    def _phi(self, x):
        kind = self.spec.kind
        if kind == "fgm":
            return 2.0 * self.marginal._sf(x) - 1.0
        if kind == "exp":
            return np.exp(-x) - self.center
        with np.errstate(divide="ignore"):
            return x**self.spec.p - self.center

    def phi_from_survival(self, x, w):
        """phi(x) given x and its survival level w = sf(x); exact for FGM."""
        if self.spec.kind == "fgm":
            return 2.0 * w - 1.0
        return self._phi(x)

    def mean_check(self) -> float:
        """E[phi(X)] by quadrature; zero for a valid kernel."""
        if self.spec.kind == "fgm":
            return self.marginal.expect(lambda x: 2.0 * float(self.marginal._sf(x)) - 1.0)
        return self.marginal.expect(lambda x: float(self._phi(x)))

    def truncated_moment(self, t) -> float:
        """mu_i(t) = int_lo^t x phi(x) dF(x)."""
        m = self.marginal
        t = float(m._check_x(t))
        if t == m.support_lower:
            return 0.0
        if self.spec.kind == "fgm" and isinstance(m, Pareto) and m.alpha != 0.5:
            a, k = m.alpha, m.k
            sf = float(m._sf(t))
            return k / (2 * a - 1) - (2 * a * t + k) / (2 * a - 1) * sf * sf - m.truncated_mean(t)
        return m.expect(lambda x: x * float(self._phi(x)), upper=t)

    @cached_property
    def x_phi_moment(self) -> float:
        """E[X phi(X)] = mu_i(inf); needs alpha > 1."""
        m = self.marginal
        if m.alpha <= 1:
            raise InfiniteMeanError("E[X phi(X)] needs alpha > 1")
        if self.spec.kind == "fgm" and isinstance(m, Pareto):
            return m.k / (2 * m.alpha - 1) - m.mean()
        if self.spec.kind == "power" and self.spec.p + 1 >= m.alpha:
            raise DivergentMomentError("E[X^{p+1}] diverges")
        return m.expect(lambda x: x * float(self._phi(x)))


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class RhoBounds:
    """Attainable Pearson correlations and the matching a12 interval."""

    rho_min: float
    rho_max: float
    a_min: float
    a_max: float
    case: str
    unbounded: tuple = ()


def admissible_interval(range1, range2):
    """a12 values for which 1 + a12 v1 v2 >= 0 on the box range1 x range2."""
    products = [u * v for u in range1 for v in range2]
    pos = [v for v in products if v > 0]
    neg = [v for v in products if v < 0]
    a_min = -1.0 / max(pos) if pos else -math.inf
    a_max = 1.0 / max(-v for v in neg) if neg else math.inf
    return a_min, a_max


def pearson_rho(kernel1: Kernel, kernel2: Kernel, a12: float) -> float:
    """a12 E[X phi1] E[X phi2] / Var X."""
    m = kernel1.marginal
    var = m.variance()
    if a12 == 0:
        return 0.0
    return a12 * kernel1.x_phi_moment * kernel2.x_phi_moment / var


def _rho_from_a(kernel1, kernel2, a_min, a_max):
    scale = kernel1.x_phi_moment * kernel2.x_phi_moment / kernel1.marginal.variance()
    ends = sorted([a_min * scale, a_max * scale])
    return ends[0], ends[1]


def rho_bounds(kernel1: Kernel, kernel2: Kernel, truncation=(math.inf, math.inf)) -> RhoBounds:
    """Range of the Pearson correlation over all admissible a12.

    * FGM/FGM: the universal bound (-1/3, 1/3).
    * Power(1)/Power(1): phi = x - mu on [0, T_i]; the a12 interval is
      [max(-1/(mu1 mu2), -1/((T1-mu1)(T2-mu2))), min(1/(mu1 (T2-mu2)), 1/(mu2 (T1-mu1)))]
      and rho = a12 sigma1 sigma2.  With T_i infinite the terms involving
      T_i vanish, which pins the interval to {0}; they are reported in
      ``unbounded``.
    * Exponential/Exponential: with L = L(1) = E[e^{-X}],
      a12 in [-1/max(L1 L2, (1-L1)(1-L2)), 1/max(L1 (1-L2), L2 (1-L1))] and
      rho = a12 (-L'(1) - L(1) mu)^2 / sigma^2.
    * Otherwise: the corner rule on the two kernel ranges.
    """
    kinds = (kernel1.spec.kind, kernel2.spec.kind)
    m = kernel1.marginal
    if kinds == ("fgm", "fgm"):
        return RhoBounds(-1.0 / 3.0, 1.0 / 3.0, -1.0, 1.0, "fgm")
    if kinds == ("power", "power") and kernel1.spec.p == kernel2.spec.p == 1.0:
        mu = m.mean()
        sigma2 = m.variance()
        t1, t2 = truncation
        unbounded = tuple(name for name, t in (("T1", t1), ("T2", t2)) if math.isinf(t))
        a_min = max(-1.0 / (mu * mu), -1.0 / ((t1 - mu) * (t2 - mu)))
        a_max = min(1.0 / (mu * (t2 - mu)), 1.0 / (mu * (t1 - mu)))
        return RhoBounds(a_min * sigma2, a_max * sigma2, a_min, a_max, "power1", unbounded)
    if kinds == ("exp", "exp"):
        mu = m.mean()
        sigma2 = m.variance()
        lap = m.expect(lambda x: math.exp(-x))
        dlap = -m.expect(lambda x: x * math.exp(-x))
        a_min = -1.0 / max(lap * lap, (1 - lap) ** 2)
        a_max = 1.0 / (lap * (1 - lap))
        scale = (-dlap - lap * mu) ** 2 / sigma2
        return RhoBounds(a_min * scale, a_max * scale, a_min, a_max, "exp")
    a_min, a_max = admissible_interval(
        (kernel1.range_inf, kernel1.range_sup), (kernel2.range_inf, kernel2.range_sup)
    )
    lo, hi = _rho_from_a(kernel1, kernel2, a_min, a_max)
    return RhoBounds(lo, hi, a_min, a_max, "corner")
