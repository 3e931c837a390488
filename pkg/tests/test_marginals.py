import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special, stats

from tailrisk.errors import DomainError, InfiniteMeanError
from tailrisk.marginals import AbsStudentT, Burr, Frechet, Pareto, Weiss, marginal_from_config

CATALOG = [
    Pareto(2.0, 1.0),
    Pareto(1.5, 3.0),
    Burr(1.5, -0.5),
    Burr(2.0, -2.0),
    AbsStudentT(2.5),
    Frechet(2.0),
    Weiss(2.5, -1.0),
]
IDS = [repr(m) for m in CATALOG]


# -- closed forms and hand values ----------------------------------------------------


def test_pareto_cdf_quantile_hand_values():
    m = Pareto(2, 1)
    assert m.cdf(9) == pytest.approx(0.99, abs=1e-15)
    assert m.quantile(0.99) == pytest.approx(9.0, rel=1e-14)
    assert m.mean() == 1.0
    assert m.truncated_mean(9.0) == pytest.approx(0.81, rel=1e-14)
    assert m.aux(10) == pytest.approx(0.2)


def test_burr_hand_values():
    m = Burr(1.5, -0.5)
    assert m.cdf(1.0) == pytest.approx(0.875, rel=1e-14)
    # 3 B(1, 3) = 1, and the same by direct quadrature of (1 + sqrt x)^-3
    assert m.mean() == pytest.approx(1.0, rel=1e-12)
    direct = integrate.quad(lambda x: (1 + math.sqrt(x)) ** -3, 0, np.inf, limit=400)[0]
    assert direct == pytest.approx(1.0, rel=1e-7)
    # mu(t) = 1 - t (1+u)^-3 - 2/(1+u) + (1+u)^-2 with u = sqrt(t), by substituting x = u^2
    for t in (0.25, 9.0, 1e6):
        u = 1 + math.sqrt(t)
        exact = 1 - t * u**-3 - 2 / u + u**-2
        assert m.truncated_mean(t) == pytest.approx(exact, abs=1e-10)
    assert 1 - m.truncated_mean(1e6) == pytest.approx(3e-3, rel=1e-2)
    assert Burr(2, -0.5).aux(100) == pytest.approx(0.2)


def test_frechet_hand_values():
    m = Frechet(2)
    assert m.quantile(0.99) == pytest.approx((-math.log(0.99)) ** -0.5, rel=1e-14)
    assert m.quantile(0.99) == pytest.approx(9.97492, abs=1e-5)
    assert m.cdf(1e12) == pytest.approx(1.0)
    assert m.mean() == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert m.aux(10) == pytest.approx(0.01)


def test_student_quantile_against_scipy_t():
    m = AbsStudentT(2.5)
    for p in (0.5, 0.9, 0.99, 0.999, 0.99999):
        assert m.quantile(p) == pytest.approx(stats.t.ppf((1 + p) / 2, 2.5), rel=1e-9)
    # first-order expectile column of the Student table divided by (4/3)^0.4
    assert m.quantile(0.99) == pytest.approx(7.16, abs=5e-3)
    assert m.quantile(0.99) == pytest.approx(8.0309 / (4 / 3) ** 0.4, rel=1e-3)


def test_student_mean_closed_form_and_quadrature():
    m = AbsStudentT(2.5)
    assert m.mean() == pytest.approx(m.mean_closed_form, rel=1e-10)
    assert m.mean_closed_form == pytest.approx(1.2060290801, rel=1e-9)
    assert m.ratio_mean == pytest.approx(2.5 / 1.5)
    assert m.ratio_mean != pytest.approx(m.mean(), rel=0.1)


def test_weiss_support_and_aux_sign():
    m = Weiss(2.5, -1.0)
    lo = m.support_lower
    assert lo ** -2.5 * (1 + 1 / lo) == pytest.approx(1.0, rel=1e-13)
    assert m.cdf(lo) == pytest.approx(0.0, abs=1e-13)
    assert m.aux(10.0) == pytest.approx(-0.1)
    with pytest.raises(DomainError):
        m.cdf(lo * 0.99)


def test_domain_errors():
    with pytest.raises(DomainError):
        Pareto(2, 1).cdf(-1.0)
    with pytest.raises(DomainError):
        Pareto(2, 1).quantile(1.0)
    with pytest.raises(DomainError):
        Pareto(2, 1).quantile(0.0)
    with pytest.raises(InfiniteMeanError):
        Pareto(0.9, 1).mean()
    with pytest.raises(InfiniteMeanError):
        Frechet(1.0).mean()
    with pytest.raises(DomainError):
        Burr(2, 0.5)
    with pytest.raises(DomainError):
        marginal_from_config({"family": "lognormal", "alpha": 2})


# -- invariants over the catalog ----------------------------------------------------------


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_cdf_of_quantile(m):
    for p in (0.5, 0.9, 0.99, 0.999):
        assert m.cdf(m.quantile(p)) == pytest.approx(p, rel=1e-10)
        assert m.sf(m.quantile(p)) / (1 - p) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_quantile_of_cdf_on_grid(m):
    xs = m.quantile(np.linspace(0.01, 0.999, 40))
    assert np.allclose(m.quantile(m.cdf(xs)), xs, rtol=1e-8)
    # invert whichever of cdf and sf is small, the other one is ill-conditioned
    xs = m.support_lower + np.geomspace(1e-2, 1e8, 60)
    xs = xs[m.cdf(xs) > 1e-300]
    upper = m.sf(xs) < 0.5
    assert np.allclose(m.isf(m.sf(xs[upper])), xs[upper], rtol=1e-9)
    assert np.allclose(m.quantile(m.cdf(xs[~upper])), xs[~upper], rtol=1e-9)


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_cdf_monotone_and_limits(m):
    xs = m.support_lower + np.geomspace(1e-6, 1e8, 200)
    f = m.cdf(xs)
    assert np.all(np.diff(f) >= 0)
    assert m.cdf(m.support_lower) == pytest.approx(0.0, abs=1e-12)
    assert f[-1] > 1 - 1e-10


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_density_integrates_to_cdf(m):
    lo = m.support_lower
    for p in (0.3, 0.9):
        x = m.quantile(p)
        val = integrate.quad(lambda u: m.pdf(u), lo, x, limit=200)[0]
        assert val == pytest.approx(p, rel=1e-7)


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_truncated_mean_plus_tail_is_mean(m):
    t = m.quantile(0.99)
    tail = integrate.quad(lambda u: u * m.pdf(u), t, np.inf, limit=400, epsabs=1e-13)[0]
    assert m.truncated_mean(t) + tail == pytest.approx(m.mean(), abs=1e-8)
    assert m.truncated_mean(m.support_lower) == 0.0


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_truncated_mean_monotone_and_convergent(m):
    ts = m.support_lower + np.geomspace(1e-3, 1e9, 25)
    vals = np.array([m.truncated_mean(t) for t in ts])
    assert np.all(np.diff(vals) >= -1e-12)
    assert vals[-1] == pytest.approx(m.mean(), rel=1e-3)


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_second_order_profile(m):
    # (sf(tx)/sf(t) - x^-a) / A(t) -> x^-a (x^b - 1)/b
    t = 1e6 if not isinstance(m, Frechet) else 30.0
    prof = m.profile
    for x in (0.5, 2.0, 5.0):
        lhs = (m.sf(t * x) / m.sf(t) - x ** -m.alpha) / m.aux(t)
        assert lhs == pytest.approx(float(prof.limit_function(x)), rel=0.05)


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_aux_vanishes_monotonically(m):
    ts = np.geomspace(10, 1e8, 8)
    a = np.abs([m.aux(t) for t in ts])
    assert np.all(np.diff(a) < 0)
    assert a[-1] < 1e-3


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_tail_is_regularly_varying(m):
    t = 1e6
    ratio = m.sf(2 * t) * (2 * t) ** m.alpha / (m.sf(t) * t ** m.alpha)
    assert ratio == pytest.approx(1.0, abs=0.01)


def test_student_printed_aux_misses_the_profile():
    m = AbsStudentT(2.5)
    t, x = 1e4, 2.0
    lhs = (m.sf(t * x) / m.sf(t) - x ** -m.alpha)
    target = float(m.profile.limit_function(x))
    assert lhs / m.aux(t) == pytest.approx(target, rel=1e-3)
    assert lhs / m.aux_printed(t) / target == pytest.approx(3.5, rel=1e-3)


def test_profile_beta_zero_limit_function():
    from tailrisk.marginals import SecondOrderProfile

    prof = SecondOrderProfile(2.0, 0.0, lambda t: 0.0)
    assert float(prof.limit_function(3.0)) == pytest.approx(math.log(3.0) / 9.0)
    near = SecondOrderProfile(2.0, -1e-9, lambda t: 0.0)
    assert float(near.limit_function(3.0)) == pytest.approx(math.log(3.0) / 9.0, rel=1e-6)


# -- sampling ----------------------------------------------------------------------


def test_inverse_transform_hand_value():
    assert Pareto(2, 1).isf(0.01) == pytest.approx(9.0)


@pytest.mark.parametrize("m", CATALOG, ids=IDS)
def test_sampler_ks(m):
    rng = np.random.default_rng(7)
    x = m.sample(rng, 10**5)
    d = stats.kstest(x, m.cdf).statistic
    assert d < 1.63 / math.sqrt(x.size)


def test_pareto_sample_mean_clt():
    rng = np.random.default_rng(11)
    x = Pareto(2, 1).sample(rng, 10**6)
    # variance is infinite for alpha = 2; use the empirical spread as the scale
    se = x.std() / math.sqrt(x.size)
    assert abs(x.mean() - 1.0) < 3 * se


def test_sampling_is_deterministic_in_the_stream():
    m = Burr(2, -0.5)
    a = m.sample(np.random.default_rng(3), 1000)
    b = m.sample(np.random.default_rng(3), 1000)
    assert np.array_equal(a, b)


# -- properties --------------------------------------------------------------------------


@given(
    alpha=st.floats(0.3, 6.0),
    k=st.floats(0.1, 10.0),
    p=st.floats(1e-6, 1 - 1e-9),
)
def test_pareto_roundtrip_property(alpha, k, p):
    m = Pareto(alpha, k)
    assert m.cdf(m.quantile(p)) == pytest.approx(p, rel=1e-9, abs=1e-15)


@given(
    alpha=st.floats(0.5, 6.0),
    beta=st.floats(-4.0, -0.05),
    p=st.floats(1e-4, 1 - 1e-9),
)
def test_burr_and_weiss_roundtrip_property(alpha, beta, p):
    for m in (Burr(alpha, beta), Weiss(alpha, beta)):
        x = m.quantile(p)
        assert m.sf(x) == pytest.approx(1 - p, rel=1e-8)


@given(alpha=st.floats(1.05, 8.0), w=st.floats(1e-14, 1.0))
def test_student_isf_property(alpha, w):
    m = AbsStudentT(alpha)
    assert m.sf(m.isf(w)) == pytest.approx(w, rel=1e-8)


def test_config_roundtrip():
    for m in CATALOG:
        assert marginal_from_config(m.to_config()) == m


def test_incomplete_beta_mean_of_burr():
    # Burr mean from the Beta function against quadrature of the survival function
    m = Burr(2.0, -2.0)
    a, b = m.alpha, m.beta
    beta_form = -(a / b) * special.beta((1 - a) / b, (b - 1) / b)
    quad = integrate.quad(lambda x: float(m.sf(x)), 0, np.inf, limit=400)[0]
    assert m.mean() == pytest.approx(beta_form, rel=1e-12)
    assert quad == pytest.approx(beta_form, rel=1e-8)
