"""Multivariate Sarmanov model with a common heavy-tailed marginal.

The joint density is prod f(x_i) * (1 + sum_{i<j} a_ij phi_i(x_i) phi_j(x_j)).
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import constants
from .errors import AdmissibilityError, DomainError
from .kernels import Kernel, KernelSpec
from .marginals import MarginalModel, marginal_from_config

__all__ = ["AdmissibilityReport", "SumQuantities", "SarmanovModel"]

WEIGHT_ROUNDING = 1e-12


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    min_weight: float
    min_corner: tuple
    max_weight: float
    truncated_support: bool
    clamped: bool = False
    message: str = ""

    @property
    def slack(self) -> float:
        return self.min_weight

    @property
    def acceptance_rate(self) -> float:
        return 1.0 / self.max_weight

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "min_weight": self.min_weight,
            "min_corner": list(self.min_corner),
            "max_weight": self.max_weight,
            "acceptance_rate": self.acceptance_rate,
            "truncated_support": self.truncated_support,
            "clamped": self.clamped,
            "message": self.message,
        }


class SumQuantities:
    """mu_n^*(t), kappa_n, A~_n(t), A_G(t) and lambda for S_n = X_1 + ... + X_n."""

    def __init__(self, model: "SarmanovModel"):
        self.model = model
        m = model.marginal
        self.n = model.n
        self.alpha = m.alpha
        for k in model.kernels:
            if not math.isfinite(k.d_limit):
                raise DomainError(f"kernel {k.spec} has no finite limit d")
        pairs = model.pairs
        self.kappa_n = self.n - 1 + sum(2 * a * model.kernels[i].d_limit * model.kernels[j].d_limit for i, j, a in pairs) / self.n
        self.lam = max(-1.0, -m.alpha, m.beta)

    def mu_star(self, t) -> float:
        """(n-1) mu(t) + sum_{i<j} a_ij (d_i mu_j(t) + d_j mu_i(t)) / n."""
        model = self.model
        if self.n == 1:
            return 0.0
        base = (self.n - 1) * model.marginal.truncated_mean(t)
        return base + self.pair_term(t) / self.n

    def pair_term(self, t) -> float:
        """sum_{i<j} a_ij (d_i mu_j(t) + d_j mu_i(t)), without the 1/n factor."""
        model = self.model
        moments = {}
        total = 0.0
        for i, j, a in model.pairs:
            ki, kj = model.kernels[i], model.kernels[j]
            for k in (ki, kj):
                if k.spec not in moments:
                    moments[k.spec] = k.truncated_moment(t)
            total += a * (ki.d_limit * moments[kj.spec] + kj.d_limit * moments[ki.spec])
        return total

    def a_tilde(self, t) -> float:
        if self.alpha >= 1:
            return self.alpha * self.mu_star(t) / t
        return constants.eta(self.alpha) * self.kappa_n * float(self.model.marginal.sf(t))

    def aux_G(self, t) -> float:
        m = self.model.marginal
        if self.alpha >= 1:
            return float(m.aux(t)) - self.alpha * self.mu_star(t) / t
        return float(m.aux(t)) - self.alpha * constants.eta(self.alpha) * self.kappa_n * float(m.sf(t))


class SarmanovModel:
    """n exchangeable-marginal Sarmanov vector.

    Parameters
    ----------
    marginal : MarginalModel
        Common marginal law of every component.
    kernels : sequence of KernelSpec
        One kernel per component.
    a : array_like
        Symmetric n x n coefficient matrix with zero diagonal.
    clamp : bool
        Allow a weight that is negative on part of the support; the sampler
        then draws from the renormalised density with the weight clamped at 0.
    """

    def __init__(self, marginal: MarginalModel, kernels, a, *, clamp: bool = False):
        if not isinstance(marginal, MarginalModel):
            raise DomainError("a single common marginal is required")
        specs = [k if isinstance(k, KernelSpec) else k.spec for k in kernels]
        n = len(specs)
        if n < 1:
            raise DomainError("need at least one component")
        a = np.array(a, dtype=float).reshape(n, n)
        if not np.array_equal(a, a.T):
            raise DomainError("coefficient matrix must be symmetric")
        if np.any(np.diag(a) != 0):
            raise DomainError("coefficient matrix must have a zero diagonal")
        self.marginal = marginal
        self.specs = tuple(specs)
        self.a = a
        self.clamp = bool(clamp)
        bound = {}
        for s in specs:
            if s not in bound:
                bound[s] = s.bind(marginal)
        self.kernels: tuple[Kernel, ...] = tuple(bound[s] for s in specs)
        self._report = None

    @classmethod
    def bivariate(cls, marginal, kernel: KernelSpec, a12: float, **kw):
        return cls(marginal, [kernel, kernel], [[0.0, a12], [a12, 0.0]], **kw)

    @property
    def n(self) -> int:
        return len(self.specs)

    @property
    def pairs(self):
        """(i, j, a_ij) for i < j with a_ij != 0."""
        return [(i, j, float(self.a[i, j])) for i, j in itertools.combinations(range(self.n), 2) if self.a[i, j] != 0]

    def __repr__(self):
        return f"SarmanovModel({self.marginal!r}, n={self.n}, kernels={[s.kind for s in self.specs]}, a={self.a.tolist()})"

    # -- admissibility ---------------------------------------------------------
    def _corner_weight(self, corner):
        return 1.0 + sum(a * corner[i] * corner[j] for i, j, a in self.pairs)

    def validate(self) -> AdmissibilityReport:
        """Check 1 + sum a_ij v_i v_j >= 0 at the 2^n corners of the phi-range box."""
        if self._report is not None:
            return self._report
        ranges = [(k.range_inf, k.range_sup) for k in self.kernels]
        truncated = any(k.truncated for k in self.kernels)
        if not self.pairs:
            corner = tuple(r[0] for r in ranges)
            rep = AdmissibilityReport(True, 1.0, corner, 1.0, truncated, False, "independent components")
        else:
            best_min, best_corner, best_max = math.inf, None, -math.inf
            for corner in itertools.product(*ranges):
                w = self._corner_weight(corner)
                if w < best_min:
                    best_min, best_corner = w, corner
                best_max = max(best_max, w)
            ok = best_min >= -WEIGHT_ROUNDING
            if ok:
                msg = "admissible"
            else:
                msg = f"weight {best_min:.6g} < 0 at corner {tuple(round(v, 6) for v in best_corner)}"
            if truncated:
                msg += " (kernel range taken on the truncated numerical support)"
            rep = AdmissibilityReport(ok, best_min, best_corner, best_max, truncated, (not ok) and self.clamp, msg)
        self._report = rep
        return rep

    def require_admissible(self) -> AdmissibilityReport:
        rep = self.validate()
        if not rep.admissible:
            if not self.clamp:
                raise AdmissibilityError(rep.message, rep)
            warnings.warn(f"inadmissible Sarmanov weight clamped at 0: {rep.message}", stacklevel=3)
        if not math.isfinite(rep.max_weight):
            raise AdmissibilityError("unbounded weight: rejection constant is infinite", rep)
        return rep

    # -- density weight --------------------------------------------------------
    def _weight_from_phi(self, phis):
        w = np.ones(phis.shape[0])
        for i, j, a in self.pairs:
            w += a * phis[:, i] * phis[:, j]
        return np.maximum(w, 0.0)

    def weight(self, x):
        """Sarmanov weight at one point (length n) or at each row of an (m, n) array."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        phis = np.column_stack([k.phi(x[:, i]) for i, k in enumerate(self.kernels)])
        w = self._weight_from_phi(phis)
        return float(w[0]) if single else w

    def negative_mass(self, samples: int = 10**6, seed: int = 0) -> float:
        """E[max(-w, 0)] under independent marginals: the mass removed by clamping."""
        rng = np.random.default_rng(seed)
        v = 1.0 - rng.random((samples, self.n))
        x = self.marginal._isf(v)
        phis = np.column_stack([k.phi_from_survival(x[:, i], v[:, i]) for i, k in enumerate(self.kernels)])
        w = np.ones(samples)
        for i, j, a in self.pairs:
            w += a * phis[:, i] * phis[:, j]
        return float(np.mean(np.maximum(-w, 0.0)))

    # -- sampling --------------------------------------------------------------
    @property
    def uses_conditional_sampler(self) -> bool:
        return self.n == 2 and all(s.kind == "fgm" for s in self.specs)

    def draw(self, rng: np.random.Generator, proposals: int) -> np.ndarray:
        """One block of draws from ``proposals`` proposals.

        The conditional FGM path returns exactly ``proposals`` rows; the
        rejection path returns the accepted subset.
        """
        if not self.pairs:
            return self.marginal._isf(1.0 - rng.random((proposals, self.n)))
        if self.uses_conditional_sampler:
            return self._draw_fgm_conditional(rng, proposals)
        return self._draw_rejection(rng, proposals)

    def _draw_fgm_conditional(self, rng, size):
        # X1 = isf(V1); then, given c = a12 phi1(X1) = a12 (2 V1 - 1), the
        # conditional survival level w of X2 solves w (1 - c + c w) = W.
        u = rng.random((size, 2))
        v1 = 1.0 - u[:, 0]
        w = 1.0 - u[:, 1]
        c = self.a[0, 1] * (2.0 * v1 - 1.0)
        w2 = 2.0 * w / ((1.0 - c) + np.sqrt((1.0 - c) ** 2 + 4.0 * c * w))
        w2 = np.clip(w2, np.finfo(float).tiny, 1.0)
        return np.column_stack([self.marginal._isf(v1), self.marginal._isf(w2)])

    def _draw_rejection(self, rng, size):
        rep = self.validate()
        v = 1.0 - rng.random((size, self.n))
        u = rng.random(size)
        x = self.marginal._isf(v)
        phis = np.column_stack([k.phi_from_survival(x[:, i], v[:, i]) for i, k in enumerate(self.kernels)])
        w = self._weight_from_phi(phis)
        return x[u * rep.max_weight < w]

    def sample(self, rng: np.random.Generator, count: int, block: int = 2**16) -> np.ndarray:
        """``count`` x n matrix of exact draws."""
        self.require_admissible()
        out, have = [], 0
        while have < count:
            rows = self.draw(rng, block)
            out.append(rows)
            have += rows.shape[0]
        if not out:
            return np.empty((0, self.n))
        return np.concatenate(out)[:count]

    # -- aggregate quantities --------------------------------------------------
    def sum_mean(self) -> float:
        """E[S_n] = n mu; the kernels are centred so dependence does not move it."""
        return self.n * self.marginal.mean()

    def sum_quantities(self) -> SumQuantities:
        return SumQuantities(self)

    def tail_ratio_second_order(self, t: float, order: int = 2) -> float:
        """P(S_n > t)/sf(t) ~ n (1 + A~_n(t)); ``order=1`` gives n."""
        if order == 1:
            return float(self.n)
        return self.n * (1.0 + self.sum_quantities().a_tilde(t))

    # -- configuration ---------------------------------------------------------
    def to_config(self) -> dict:
        cfg = {
            "n": self.n,
            "a": self.a.tolist(),
            "marginal": self.marginal.to_config(),
            "kernels": [s.to_config() for s in self.specs],
        }
        if self.clamp:
            cfg["clamp"] = True
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "SarmanovModel":
        n = int(cfg["n"])
        kernels = [KernelSpec.from_config(k) for k in cfg["kernels"]]
        if len(kernels) == 1:
            kernels = kernels * n
        if len(kernels) != n:
            raise DomainError(f"expected {n} kernels, got {len(kernels)}")
        return cls(marginal_from_config(cfg["marginal"]), kernels, cfg["a"], clamp=bool(cfg.get("clamp", False)))
