import math

import numpy as np
import pytest

from cksgrowth.growth import (FAILS, HOLDS, INCONCLUSIVE, GrowthFunction, ParseError,
                              catalog_lookup, check_convexity_class, check_equivalence,
                              check_U_condition, default_grid, parse_growth_spec, theta_from_u,
                              u_from_theta)


def custom(log_u, name="custom"):
    return GrowthFunction(name=name, params={}, log_u=log_u)


def test_catalog_values_match_formulas():
    r = np.array([0.0, 1.0, 8.0, 27.0])
    assert np.allclose(catalog_lookup("exp")(r), r)
    assert np.allclose(catalog_lookup("kondratiev", {"beta": 0.5})(r), 1.5 * r ** (2 / 3))
    assert np.allclose(catalog_lookup("bell")(np.array([0.0, 1.0])), [0.0, math.e - 1])
    assert np.allclose(catalog_lookup("ouerdiane", {"k": 2.0})(r), r / 2)


def test_bell_w_extension_is_one_below_one():
    w = catalog_lookup("bell_w")
    assert np.all(w(np.array([0.0, 0.3, 0.99])) == 0.0)
    r = 10.0
    assert w(r) == pytest.approx(2 * math.sqrt(r * math.log(math.sqrt(r))))


@pytest.mark.parametrize("text,name,params", [
    ("exp", "exp", {}),
    ("kondratiev:beta=0.5", "kondratiev", {"beta": 0.5}),
    ("ouerdiane:k=1.5", "ouerdiane", {"k": 1.5}),
    ("kondratiev:beta=2.5e-1", "kondratiev", {"beta": 0.25}),
])
def test_parse_growth_spec(text, name, params):
    u = parse_growth_spec(text)
    assert u.name == name and u.params == params


@pytest.mark.parametrize("text,column", [
    ("exp:", 4),
    ("kondratiev:beta=x", 11),
    ("nosuch", 0),
    ("kondratiev:beta=1.5", 0),
    ("9exp", 0),
])
def test_parse_errors_carry_column(text, column):
    with pytest.raises(ParseError) as exc:
        parse_growth_spec(text)
    assert exc.value.column == column


def test_parameter_validation():
    with pytest.raises(ValueError):
        catalog_lookup("ouerdiane", {"k": 3.0})
    with pytest.raises(ValueError):
        catalog_lookup("exp", {"beta": 1.0})
    with pytest.raises(KeyError):
        catalog_lookup("gauss")


def test_label_and_scaling():
    u = catalog_lookup("kondratiev", {"beta": 0.5})
    assert u.label == "kondratiev:beta=0.5"
    v = u.scaled(8.0)
    assert v(1.0) == pytest.approx(u(8.0))


def test_default_grid_is_geometric():
    g = default_grid()
    assert g[0] == pytest.approx(1e-6) and g[-1] == pytest.approx(1e6) and g.size == 400
    assert np.allclose(np.diff(np.log(g)), np.log(g[1] / g[0]))


@pytest.mark.parametrize("which", ["U0", "U1", "U3"])
def test_exp_satisfies_pointwise_conditions(which):
    assert check_U_condition(catalog_lookup("exp"), which).verdict == HOLDS


def test_u2_limit_estimate_for_exp():
    rep = check_U_condition(catalog_lookup("exp"), "U2")
    assert rep.verdict == HOLDS
    assert rep.details["limit_estimate"] == pytest.approx(1.0)


def test_u2_inconclusive_when_ratio_keeps_growing():
    u = custom(lambda r: r ** 1.5)
    rep = check_U_condition(u, "U2")
    assert rep.verdict == INCONCLUSIVE


def test_u0_fails_with_witness():
    rep = check_U_condition(custom(lambda r: r - 1.0), "U0")
    assert rep.verdict == FAILS
    assert rep.witness == [0.0]


def test_u1_fails_for_non_monotone():
    rep = check_U_condition(custom(lambda r: np.sin(r)), "U1")
    assert rep.verdict == FAILS and rep.witness


def test_convexity_classes():
    exp = catalog_lookup("exp")
    assert check_convexity_class(exp, "log-exp").verdict == HOLDS
    assert check_convexity_class(exp, "log-xk", 2.0).verdict == HOLDS
    saturating = custom(lambda r: 1.0 - np.exp(-r))
    rep = check_convexity_class(saturating, "log-xk", 2.0)
    assert rep.verdict == FAILS and rep.witness


def test_eventual_convexity_reports_holds_from():
    # concave kink at r = 1/2, convex beyond it
    u = custom(lambda r: np.minimum(r, 0.5) + np.maximum(r - 1.0, 0.0) ** 2)
    rep = check_convexity_class(u, "log-exp")
    assert rep.verdict == FAILS
    assert rep.holds_from is not None and 0.5 <= rep.holds_from <= 1.1


def test_equivalence_by_argument_scaling():
    exp = catalog_lookup("exp")
    rep = check_equivalence(exp, exp.scaled(2.0))
    assert rep.verdict == HOLDS
    assert rep.details["b2"] == 2.0


def test_exp_not_equivalent_to_slower_growth():
    rep = check_equivalence(catalog_lookup("exp"), catalog_lookup("kondratiev", {"beta": 0.5}))
    assert rep.verdict == FAILS


def test_theta_round_trip():
    u = catalog_lookup("kondratiev", {"beta": 0.25})
    v = u_from_theta(theta_from_u(u))
    r = np.geomspace(1e-3, 1e3, 17)
    assert np.allclose(v(r), u(r), rtol=1e-13)


def test_report_serializes_non_finite():
    rep = check_U_condition(custom(lambda r: r ** 1.5), "U2")
    d = rep.to_dict()
    assert d["verdict"] == INCONCLUSIVE
    assert isinstance(d["details"]["limit_estimate"], float)
