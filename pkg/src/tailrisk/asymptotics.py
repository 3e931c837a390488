"""First- and second-order approximations of systemic risk measures of S_n.

Every function returns an :class:`AsymptoticValue` whose ``terms`` split the
second-order value as ``base + aux_term + mean_term``: ``base`` is the
first-order approximation, ``aux_term`` the part driven by A(q) and
``mean_term`` the part driven by the (truncated) means.  All ``(1 + o(1))``
factors are replaced by 1.

The keyword options exist to evaluate the closed-form variants used when
reproducing tabulated values:

``include_aux``
    drop the A(q) terms when False;
``mean``
    replace E[X] by a given number;
``mu_star``
    replace t -> mu_n^*(t) by a given callable;
``aux``
    replace t -> A(t) by a given callable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import integrate, special

from . import constants
from .errors import DomainError, InfiniteMeanError
from .kernels import KernelSpec
from .marginals import AbsStudentT, MarginalModel, Pareto
from .sarmanov import SarmanovModel

__all__ = [
    "AsymptoticValue",
    "MEASURES",
    "var_asym",
    "cte_asym",
    "mes_ses_asym",
    "expectile_marginal_asym",
    "expectile_sum_asym",
    "ce_asym",
    "ice_sice_asym",
    "diversification_asym",
    "diversification_plugin",
    "evaluate",
    "pareto_fgm_closed_forms",
    "signed_t_mu_star",
    "unscaled_pair_mu_star",
    "CLOSED_FORMS",
    "closed_form",
]

MEASURES = ("VaR", "CTE", "MES", "SES", "E", "CE", "ICE", "SICE")
DIVERSIFICATION = ("VaR", "E", "CTE", "CE")


@dataclass(frozen=True)
class AsymptoticValue:
    measure: str
    p: float
    first_order: float
    second_order: float
    terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "p": self.p,
            "first_order": self.first_order,
            "second_order": self.second_order,
            "terms": dict(self.terms),
        }


def _value(measure, p, base, aux_term=0.0, mean_term=0.0, **extra):
    terms = {"base": base, "aux_term": aux_term, "mean_term": mean_term, **extra}
    return AsymptoticValue(measure, p, base, base + aux_term + mean_term, terms)


@dataclass
class _Inputs:
    """Quantities shared by the formulas at one level p."""

    p: float
    n: int
    alpha: float
    beta: float
    q: float
    A: float
    mu: float | None
    mu_star: float

    @property
    def root_n(self):
        return self.n ** (1 / self.alpha)


def _inputs(model: SarmanovModel, p, *, include_aux=True, mean=None, mu_star=None, aux=None, need_mean=True):
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")
    m = model.marginal
    if need_mean and m.alpha <= 1:
        raise InfiniteMeanError(f"needs alpha > 1, got {m.alpha}")
    q = float(m.quantile(p))
    aux_fn = aux if aux is not None else m.aux
    A = float(aux_fn(q)) if include_aux else 0.0
    if mean is None:
        mean = m.mean() if m.alpha > 1 else None
    if model.n == 1 or m.alpha < 1:
        # the heavy-tail branch works with kappa_n instead of mu_n^*
        ms = 0.0
    elif mu_star is not None:
        ms = float(mu_star(q))
    else:
        ms = model.sum_quantities().mu_star(q)
    return _Inputs(p, model.n, m.alpha, m.beta, q, A, mean, ms)


def _single(marginal: MarginalModel) -> SarmanovModel:
    return SarmanovModel(marginal, [KernelSpec.fgm()], [[0.0]])


def var_asym(model: SarmanovModel, p: float, **opts) -> AsymptoticValue:
    """VaR_p(S_n) ~ n^{1/a} q (1 + mu_n^*(q)/(n^{1/a} q) + (n^{b/a}-1)/(ab) A(q)).

    For 0 < alpha < 1 the mean correction becomes eta_a kappa_n sf(q)/(a n).
    """
    x = _inputs(model, p, need_mean=False, **opts)
    base = x.root_n * x.q
    aux_term = base * constants.pow_ratio(x.alpha, x.beta, x.n) * x.A
    if x.alpha >= 1:
        mean_term = x.mu_star
    else:
        sq = model.sum_quantities()
        mean_term = base * constants.eta(x.alpha) * sq.kappa_n * (1 - p) / (x.alpha * x.n)
    return _value("VaR", p, base, aux_term, mean_term, q=x.q, A=x.A, mu_star=x.mu_star)


def cte_asym(model: SarmanovModel, p: float, **opts) -> AsymptoticValue:
    """CTE_p(S_n) ~ (a n^{1/a}/(a-1)) q (1 + zeta A(q)) + mu_n^*(q)."""
    x = _inputs(model, p, **opts)
    base = x.alpha * x.root_n * x.q / (x.alpha - 1)
    aux_term = base * constants.zeta(x.alpha, x.beta, x.n) * x.A
    return _value("CTE", p, base, aux_term, x.mu_star, q=x.q, A=x.A, mu_star=x.mu_star)


def mes_ses_asym(model: SarmanovModel, p: float, m: int = 0, **opts):
    """(MES, SES) of component ``m``; the value does not depend on m.

    MES ~ (a n^{1/a}/((a-1) n)) q (1 + zeta A(q)) and SES = MES - q/n.
    """
    if not 0 <= m < model.n:
        raise DomainError(f"component index {m} out of range")
    x = _inputs(model, p, **opts)
    base = x.alpha * x.root_n * x.q / ((x.alpha - 1) * x.n)
    aux_term = base * constants.zeta(x.alpha, x.beta, x.n) * x.A
    mes = _value("MES", p, base, aux_term, 0.0, q=x.q, A=x.A)
    ses = _value("SES", p, base - x.q / x.n, aux_term, 0.0, q=x.q, A=x.A)
    return mes, ses


def expectile_marginal_asym(marginal: MarginalModel, p: float, **opts) -> AsymptoticValue:
    """e_p(X) ~ (a-1)^{-1/a} q (1 + xi A(q)) + mu/a."""
    x = _inputs(_single(marginal), p, **opts)
    base = (x.alpha - 1) ** (-1 / x.alpha) * x.q
    aux_term = base * constants.xi(x.alpha, x.beta) * x.A
    return _value("E", p, base, aux_term, x.mu / x.alpha, q=x.q, A=x.A)


def expectile_sum_asym(model: SarmanovModel, p: float, **opts) -> AsymptoticValue:
    """e_p(S_n) ~ (n/(a-1))^{1/a} q (1 + c A(q)) + ((a-1) mu_n^*(q) + n mu)/a."""
    x = _inputs(model, p, **opts)
    base = (x.n / (x.alpha - 1)) ** (1 / x.alpha) * x.q
    aux_term = base * constants.expectile_sum_coef(x.alpha, x.beta, x.n) * x.A
    mean_term = ((x.alpha - 1) * x.mu_star + x.n * x.mu) / x.alpha
    return _value("E", p, base, aux_term, mean_term, q=x.q, A=x.A, mu_star=x.mu_star)


def ce_asym(model: SarmanovModel, p: float, **opts) -> AsymptoticValue:
    """CE_p(S_n) ~ a n^{1/a} q/(a-1)^{1/a+1} (1 + chi A(q)) + ((a-2) mu_n^*(q) + n mu)/(a-1)."""
    x = _inputs(model, p, **opts)
    base = x.alpha * x.root_n * x.q / (x.alpha - 1) ** (1 / x.alpha + 1)
    aux_term = base * constants.chi(x.alpha, x.beta, x.n) * x.A
    mean_term = ((x.alpha - 2) * x.mu_star + x.n * x.mu) / (x.alpha - 1)
    return _value("CE", p, base, aux_term, mean_term, q=x.q, A=x.A, mu_star=x.mu_star)


def ice_sice_asym(model: SarmanovModel, p: float, m: int = 0, *, sice_marginal: str = "full", **opts):
    """(ICE, SICE) of component ``m``; the value does not depend on m.

    ICE ~ (a/((a-1) n)) [(n/(a-1))^{1/a} q (1 + chi A(q)) + (n mu - mu_n^*(q))/a]
    and SICE = ICE - e_p(X)/n with e_p(X) at matching order.  ``sice_marginal``
    selects the second-order marginal expectile: "full" keeps its A-term,
    "leading" drops it.
    """
    if not 0 <= m < model.n:
        raise DomainError(f"component index {m} out of range")
    if sice_marginal not in ("full", "leading"):
        raise ValueError(f"unknown sice_marginal {sice_marginal!r}")
    x = _inputs(model, p, **opts)
    base = x.alpha * x.root_n * x.q / (x.n * (x.alpha - 1) ** (1 + 1 / x.alpha))
    aux_term = base * constants.chi(x.alpha, x.beta, x.n) * x.A
    mean_term = (x.n * x.mu - x.mu_star) / ((x.alpha - 1) * x.n)
    ice = _value("ICE", p, base, aux_term, mean_term, q=x.q, A=x.A, mu_star=x.mu_star)

    e_opts = {k: v for k, v in opts.items() if k != "mu_star"}
    if sice_marginal == "leading":
        e_opts["include_aux"] = False
    e = expectile_marginal_asym(model.marginal, p, **e_opts)
    ex = e.terms
    sice = AsymptoticValue(
        "SICE",
        p,
        ice.first_order - e.first_order / x.n,
        ice.second_order - e.second_order / x.n,
        {
            "base": base - ex["base"] / x.n,
            "aux_term": aux_term - ex["aux_term"] / x.n,
            "mean_term": mean_term - ex["mean_term"] / x.n,
            "q": x.q,
            "A": x.A,
            "marginal_expectile": e.second_order,
        },
    )
    return ice, sice


def diversification_asym(model: SarmanovModel, p: float, measure: str, **opts) -> AsymptoticValue:
    """Second-order expansion of D_p = 1 - (rho(S_n) - E S_n)/(n (rho(X) - E X)).

    First order is 1 - n^{1/a - 1} for all four measures.
    """
    if measure not in DIVERSIFICATION:
        raise DomainError(f"diversification measure must be one of {DIVERSIFICATION}")
    x = _inputs(model, p, **opts)
    a, b, n, q, A, mu, ms = x.alpha, x.beta, x.n, x.q, x.A, x.mu, x.mu_star
    r = n ** (1 / a - 1)
    base = 1 - r
    if measure == "VaR":
        aux_term = -r * constants.pow_ratio(a, b, n) * A
        mean_term = -r * ms / (x.root_n * q) + (1 - r) * mu / q
    elif measure == "E":
        aux_term = -r * constants.div_e_coef(a, b, n) * A
        mean_term = -((a - 1) ** (1 / a + 1)) * ms / (a * n * q)
    elif measure == "CTE":
        aux_term = -r * constants.div_cte_coef(a, b, n) * A
        mean_term = -(a - 1) * (ms - (n - x.root_n) * mu) / (n * a * q)
    else:
        aux_term = -r * constants.div_ce_coef(a, b, n) * A
        mean_term = -((a - 1) ** (1 / a)) * (a - 2) * ms / (a * n * q)
    return _value("D_" + measure, p, base, aux_term, mean_term, q=q, A=A, mu_star=ms)


_SINGLE = {
    "VaR": var_asym,
    "E": lambda model, p, **o: expectile_sum_asym(model, p, **o),
    "CTE": cte_asym,
    "CE": ce_asym,
}


def diversification_plugin(model: SarmanovModel, p: float, measure: str, **opts) -> AsymptoticValue:
    """D_p evaluated from its definition with second-order values plugged in.

    Unlike :func:`diversification_asym` this keeps every mean term of the
    ratio instead of expanding it.
    """
    if measure not in DIVERSIFICATION:
        raise DomainError(f"diversification measure must be one of {DIVERSIFICATION}")
    func = _SINGLE[measure]
    agg = func(model, p, **opts)
    alone = func(_single(model.marginal), p, **{k: v for k, v in opts.items() if k != "mu_star"})
    mu = opts.get("mean") or model.marginal.mean()
    n = model.n
    first = 1 - (agg.first_order / n) / alone.first_order
    second = 1 - (agg.second_order / n - mu) / (alone.second_order - mu)
    return AsymptoticValue("D_" + measure, p, first, second, {"aggregate": agg.second_order, "standalone": alone.second_order})


def evaluate(model: SarmanovModel, p: float, measure: str, m: int = 0, **opts) -> AsymptoticValue:
    """Dispatch by measure name (one of MEASURES or "D_" + a diversification measure)."""
    if measure == "VaR":
        return var_asym(model, p, **opts)
    if measure == "CTE":
        return cte_asym(model, p, **opts)
    if measure in ("MES", "SES"):
        return mes_ses_asym(model, p, m, **opts)[measure == "SES"]
    if measure == "E":
        return expectile_sum_asym(model, p, **opts)
    if measure == "CE":
        return ce_asym(model, p, **opts)
    if measure in ("ICE", "SICE"):
        return ice_sice_asym(model, p, m, **opts)[measure == "SICE"]
    if measure.startswith("D_"):
        return diversification_asym(model, p, measure[2:], **opts)
    raise DomainError(f"unknown measure {measure!r}")


# -- closed-form variants ------------------------------------------------------


def pareto_fgm_closed_forms(model: SarmanovModel, p: float) -> dict:
    """Exact-constant VaR and CTE for n = 2, FGM kernels, Pareto(alpha, k), alpha > 1.

    VaR = 2^{1/a} q + mu(q) - a12 mu_1(q) + k (2^{1/a} - 1)
    CTE = (2^{1/a} a/(a-1)) (q + k) - k + mu(q) - a12 mu_1(q)
    """
    m = model.marginal
    if not (isinstance(m, Pareto) and model.n == 2 and all(s.kind == "fgm" for s in model.specs)):
        raise DomainError("closed forms need a bivariate FGM Pareto model")
    if m.alpha <= 1:
        raise InfiniteMeanError("closed forms need alpha > 1")
    a, k = m.alpha, m.k
    a12 = float(model.a[0, 1])
    q = float(m.quantile(p))
    corr = m.truncated_mean(q) - a12 * model.kernels[0].truncated_moment(q)
    root = 2 ** (1 / a)
    return {
        "VaR": root * q + corr + k * (root - 1),
        "CTE": root * a / (a - 1) * (q + k) - k + corr,
    }


def signed_t_mu_star(model: SarmanovModel):
    """mu_n^*(t) with mu(t), mu_i(t) integrated against the signed Student t law.

    Uses mu(t) = int_0^t x dT(x) and mu_i(t) = int_0^t x (1 - 2T(x)) dT(x),
    where T is the t_alpha distribution function, so both are half of the
    corresponding integrals for |T| with the FGM kernel written in terms of T.
    Requires an AbsStudentT marginal and FGM kernels.
    """
    m = model.marginal
    if not (isinstance(m, AbsStudentT) and all(s.kind == "fgm" for s in model.specs)):
        raise DomainError("signed-t variant needs an AbsStudentT marginal with FGM kernels")
    a = m.alpha

    def dens(x):
        return 0.5 * float(m._pdf(x))

    def mu_star(t):
        mu_t = integrate.quad(lambda x: x * dens(x), 0.0, t, epsabs=1e-12, limit=200)[0]
        mu_k = integrate.quad(
            lambda x: x * (1.0 - 2.0 * special.stdtr(a, x)) * dens(x), 0.0, t, epsabs=1e-12, limit=200
        )[0]
        n = model.n
        pair = sum(aij * (model.kernels[i].d_limit + model.kernels[j].d_limit) * mu_k for i, j, aij in model.pairs)
        return (n - 1) * mu_t + pair / n

    return mu_star


def unscaled_pair_mu_star(model: SarmanovModel):
    """mu_n^*(t) with the pair sum not divided by n."""
    sq = model.sum_quantities()

    def mu_star(t):
        return (model.n - 1) * model.marginal.truncated_mean(t) + sq.pair_term(t)

    return mu_star


CLOSED_FORMS = ("pareto_exact", "signed_t", "frechet_example")


def closed_form(model: SarmanovModel, p: float, measure: str, variant: str, m: int = 0) -> AsymptoticValue:
    """Evaluate ``measure`` with one of the example-specific closed forms.

    ``pareto_exact``
        exact-constant VaR and CTE of a bivariate FGM Pareto model;
    ``signed_t``
        no A-term, mean alpha/(alpha-1) and mu_n^* from the signed t law;
    ``frechet_example``
        no A-term (also in the marginal expectile) and the pair sum of
        mu_n^* not divided by n.
    """
    if variant == "pareto_exact":
        if measure not in ("VaR", "CTE"):
            raise DomainError(f"pareto_exact covers VaR and CTE, not {measure!r}")
        first = evaluate(model, p, measure, m).first_order
        second = pareto_fgm_closed_forms(model, p)[measure]
        return AsymptoticValue(measure, p, first, second, {"base": first, "closed_form": second})
    if variant == "signed_t":
        mu_star = signed_t_mu_star(model)
        opts = {"include_aux": False, "mean": model.marginal.ratio_mean, "mu_star": mu_star}
        return evaluate(model, p, measure, m, **opts)
    if variant == "frechet_example":
        return evaluate(model, p, measure, m, include_aux=False, mu_star=unscaled_pair_mu_star(model))
    raise DomainError(f"unknown closed-form variant {variant!r}; expected one of {CLOSED_FORMS}")
