"""Speed-function grammar, dual-number derivatives, and the admissibility
checker for the four conditions on phi."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hcflow.speed import (SpeedDomainError, SpeedParseError,
                          check_admissibility, parse_speed)


# ---------------------------------------------------------------------------
# parsing and evaluation


def test_monomial_values_and_derivatives():
    phi, d1, d2 = parse_speed("H^2").eval(3.0)
    assert float(phi) == pytest.approx(9.0, rel=1e-15)
    assert float(d1) == pytest.approx(6.0, rel=1e-15)
    assert float(d2) == pytest.approx(2.0, rel=1e-15)


def test_sum_of_log_and_sqrt_derivative():
    # phi = log(1+H) + H^0.5: phi'(1) = 1/2 + 1/2 = 1
    _, d1, _ = parse_speed("log(1+H) + H^0.5").eval(1.0)
    assert float(d1) == pytest.approx(1.0, rel=1e-12)


def test_builtins_match_reference_functions():
    alpha = 1.7
    cases = {
        "exp(H)": (math.exp(alpha),) * 3,
        "sinh(H)": (math.sinh(alpha), math.cosh(alpha), math.sinh(alpha)),
        "cosh(H)": (math.cosh(alpha), math.sinh(alpha), math.cosh(alpha)),
        "sqrt(H)": (math.sqrt(alpha), 0.5 / math.sqrt(alpha),
                    -0.25 * alpha ** -1.5),
        "log(H)": (math.log(alpha), 1 / alpha, -1 / alpha**2),
    }
    for src, want in cases.items():
        got = parse_speed(src).eval(alpha)
        for g, w in zip(got, want):
            assert float(g) == pytest.approx(w, rel=1e-13), src


def test_vectorized_evaluation_matches_scalar():
    f = parse_speed("H^2 + exp(H)/3 - log(1+H)")
    alpha = np.array([0.5, 1.0, 2.5])
    phi, d1, d2 = f.eval(alpha)
    for i, x in enumerate(alpha):
        p, g, h = f.eval(float(x))
        assert phi[i] == pytest.approx(float(p), rel=1e-15)
        assert d1[i] == pytest.approx(float(g), rel=1e-15)
        assert d2[i] == pytest.approx(float(h), rel=1e-15)


def test_callable_shorthand_returns_value_only():
    f = parse_speed("2*H")
    assert float(f(3.0)) == pytest.approx(6.0, rel=1e-15)


def test_parse_error_reports_position():
    with pytest.raises(SpeedParseError) as e:
        parse_speed("H +* 2")
    assert e.value.pos == 3
    assert e.value.source == "H +* 2"
    assert "position 3" in str(e.value)


def test_parse_error_cases():
    for bad in ("", "H +", "2ated", "foo(H)", "H^", "(H", "H)2", "H 2"):
        with pytest.raises(SpeedParseError):
            parse_speed(bad)


def test_domain_error_carries_the_offending_alpha():
    f = parse_speed("sqrt(H - 1)")
    with pytest.raises(SpeedDomainError) as e:
        f.eval(0.5)
    assert e.value.alpha == pytest.approx(0.5)
    f.eval(2.0)  # fine above the kink


def test_division_by_zero_is_a_domain_error():
    f = parse_speed("1/(H - 2)")
    with pytest.raises(SpeedDomainError):
        f.eval(2.0)


# ---------------------------------------------------------------------------
# derivative correctness: dual numbers against central differences


def _central(f, x, h):
    (p0, _, _), (p1, _, _) = f.eval(x - h), f.eval(x + h)
    return (float(p1) - float(p0)) / (2 * h)


BUILTIN_EXPRS = ["H", "H^2", "H^3", "H^0.5", "H^0.25", "exp(H)", "log(1+H)",
                 "sinh(H)", "cosh(H)", "sqrt(H)", "log(1+H)+H", "H/(1+H)",
                 "exp(H)/(1+H^2)", "2*H^2 - H + 3"]


@pytest.mark.parametrize("src", BUILTIN_EXPRS)
def test_first_derivative_matches_central_difference(src):
    f = parse_speed(src)
    for alpha in (0.3, 1.0, 4.2):
        h = alpha * 1e-6
        _, d1, _ = f.eval(alpha)
        # abs floor covers points where the true derivative vanishes and
        # the finite difference is pure rounding noise
        assert float(d1) == pytest.approx(_central(f, alpha, h),
                                          rel=1e-5, abs=1e-8)


def _random_expression(rng, depth=0):
    """Deterministic random expression over the grammar."""
    if depth >= 3 or rng.random() < 0.3:
        return rng.choice(["H", "H", f"{rng.uniform(0.5, 3.0):.3f}"])
    kind = rng.randrange(6)
    left = _random_expression(rng, depth + 1)
    right = _random_expression(rng, depth + 1)
    if kind == 0:
        return f"({left} + {right})"
    if kind == 1:
        return f"({left} * {right})"
    if kind == 2:
        return f"({left} / (1 + {right}))"
    if kind == 3:
        return f"exp({left})" if rng.random() < 0.5 else f"log(1 + {left})"
    if kind == 4:
        return f"sinh({left})" if rng.random() < 0.5 else f"cosh({left})"
    return f"({left})^{rng.choice([2, 3, 0.5])}"


def test_derivatives_on_many_random_expressions():
    rng = random.Random(20240817)
    checked = 0
    for _ in range(100):
        src = _random_expression(rng)
        f = parse_speed(src)
        for alpha in (0.7, 1.9):
            h = alpha * 1e-6
            try:
                _, d1, _ = f.eval(alpha)
                fd = _central(f, alpha, h)
            except (SpeedDomainError, OverflowError):
                continue
            d1, fd = float(d1), float(fd)
            if not (math.isfinite(d1) and math.isfinite(fd)) or abs(fd) > 1e12:
                continue
            assert d1 == pytest.approx(fd, rel=1e-4, abs=1e-9), src
            checked += 1
    assert checked > 100  # the filter must not hollow the test out


@given(alpha=st.floats(min_value=0.05, max_value=20.0))
@settings(max_examples=50, deadline=None)
def test_second_derivative_of_power_closed_form(alpha):
    for k in (0.25, 0.5, 2.0, 3.0):
        _, _, d2 = parse_speed(f"H^{k}").eval(alpha)
        assert float(d2) == pytest.approx(k * (k - 1) * alpha ** (k - 2),
                                          rel=1e-10)


# ---------------------------------------------------------------------------
# admissibility checker


ADMISSIBLE = ["H", "H^0.25", "H^0.5", "H^2", "H^3", "log(1+H)+H", "exp(H)"]


@pytest.mark.parametrize("src", ADMISSIBLE)
def test_admissibility_catalog_passes(src):
    report = check_admissibility(src)
    assert report.admissible, report.summary()
    assert all(v.status == "pass" for v in report.conditions.values())


def test_power_condition_iv_margin_is_positive():
    # phi = H^k: phi'' a + 2 phi' = k (k+1) a^(k-1) > 0
    alpha = np.geomspace(1e-6, 1e6, 201)
    for k in (0.25, 0.5, 1.0, 2.0, 3.0):
        _, d1, d2 = parse_speed(f"H^{k}").eval(alpha)
        margin = d2 * alpha + 2.0 * d1
        want = k * (k + 1) * alpha ** (k - 1)
        assert np.all(margin > 0)
        np.testing.assert_allclose(margin, want, rtol=1e-10)


def test_bounded_speed_fails_divergence_with_witness():
    report = check_admissibility("H/(1+H)")
    assert not report.admissible
    v = report.conditions["ii"]
    assert v.status == "fail"
    assert v.witness is not None and v.value is not None
    assert v.value <= 1.0  # the bound that stops phi from diverging


def test_decreasing_speed_fails_monotonicity_with_witness():
    report = check_admissibility("1/H")
    assert not report.admissible
    v = report.conditions["i"]
    assert v.status == "fail"
    assert v.witness is not None


def test_convexity_shortcut_promotes_asymptotic_conditions():
    report = check_admissibility("exp(H)")
    assert report.convex
    assert report.admissible
    # H^0.5 is concave yet passes through the tail checks
    report = check_admissibility("H^0.5")
    assert not report.convex
    assert report.admissible


def test_attest_limits_promotes_inconclusive_tail():
    # on the minimal allowed grid H^0.25 stays below the divergence
    # threshold (1e6^0.25 ~ 31.6), leaving ii) inconclusive
    short = check_admissibility("H^0.25", alpha_max=1e6)
    assert short.conditions["ii"].status == "inconclusive"
    assert not short.admissible
    attested = check_admissibility("H^0.25", alpha_max=1e6, attest_limits=True)
    assert attested.conditions["ii"].status == "pass"
    assert attested.admissible


def test_grid_contract_is_enforced():
    with pytest.raises(ValueError):
        check_admissibility("H", alpha_min=1e-3)  # must reach down to 1e-6
    with pytest.raises(ValueError):
        check_admissibility("H", alpha_max=1e3)   # must reach up to 1e6
    with pytest.raises(ValueError):
        check_admissibility("H", points=150)      # needs >= 200 samples


def test_report_serialization_roundtrip():
    report = check_admissibility("log(1+H)+H")
    d = report.as_dict()
    assert d["expr"] == "log(1+H)+H"
    assert d["admissible"] is True
    assert set(d["conditions"]) == {"i", "ii", "iii", "iv"}
    text = report.summary()
    assert "condition" in text and "admissible" in text
