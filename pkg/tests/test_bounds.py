import math

import pytest

from walkbounds.bounds import (
    EQUALITY,
    SKIPPED,
    STRICT,
    VIOLATED,
    Quantity,
    auxiliary_checks,
    evaluate_row,
    free_group_exact,
    markdown_table,
    surface_group_report,
    theorem1_bounds,
    theorem1_rows,
    theorem2_check,
)
from walkbounds.special import F

from .conftest import LOG3, RHO_F2


def verdicts(report):
    return {r.name: r.verdict for r in report}


def test_free_group_sharp_rows_are_equalities():
    ex = free_group_exact(2)
    rep = theorem2_check(ex["h"], ex["rho"], ex["ell"], 1.0)
    for name in ("rho_entropy", "drift_entropy"):
        assert rep[name].verdict == EQUALITY
        assert abs(rep[name].slack) <= 1e-12
    # the classical bounds are strict on trees
    assert verdicts(rep)["avez"] == STRICT
    assert verdicts(rep)["ledrappier"] == STRICT
    assert verdicts(rep)["dominance"] == STRICT


def test_z_simple_walk_all_zero():
    rep = theorem2_check(0.0, 1.0, 0.0, 1.0)
    assert all(r.verdict == EQUALITY for r in rep)
    assert all(r.lhs == 0.0 for r in rep)


def test_weighted_free_group_is_strict():
    eps = 0.5
    M2 = math.sqrt((1 + eps**2) / 2)
    ell = (1 + eps) / 4
    assert ell / M2 == pytest.approx((1 + eps) / math.sqrt(8 * (1 + eps**2)))
    assert ell / M2 == pytest.approx(1.5 / math.sqrt(10))
    rep = theorem2_check(0.5 * LOG3, RHO_F2, ell, M2)
    assert rep["drift_entropy"].verdict == STRICT
    assert F(ell / M2) < 0.5 * LOG3


def test_asymmetric_rows_skipped():
    rep = theorem2_check(0.0, 0.9, 0.4, 1.0, symmetric=False)
    assert all(r.verdict == SKIPPED and "asymmetric" in r.reason for r in rep)
    rep = theorem1_rows(0.0, 0.4, 0.9, 0.0, 1.0, symmetric=False)
    assert all(r.verdict == SKIPPED for r in rep)


def test_drift_row_skipped_when_ell_exceeds_M2():
    rep = theorem2_check(1.0, 0.8, 1.01, 1.0)
    assert rep["drift_entropy"].verdict == SKIPPED


def test_rho_domain():
    with pytest.raises(ValueError):
        theorem2_check(0.5, 0.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        theorem2_check(0.5, 0.5, 0.5, 0.0)


def test_violation_detected():
    # h below the drift bound
    rep = theorem2_check(0.3, RHO_F2, 0.5, 1.0)
    assert rep["drift_entropy"].verdict == VIOLATED
    assert rep.any_violated


def test_growth_bounds_free_group():
    b = theorem1_bounds(LOG3, 1.0)
    assert b.ell_max == pytest.approx(0.5, abs=1e-15)
    assert b.h_max == pytest.approx(0.5 * LOG3, abs=1e-15)
    assert b.rho_min == pytest.approx(RHO_F2, abs=1e-15)
    assert b.identity_residual < 1e-14


def test_growth_bounds_surface_group():
    b = theorem1_bounds(1.9430254, 1.0)
    assert f"{b.ell_max:.9f}" == "0.749368278"
    assert f"{b.h_max:.9f}" == "1.456041598"
    assert f"{b.rho_min:.8f}" == "0.66215344"


def test_growth_bounds_zero():
    b = theorem1_bounds(0.0, 1.0)
    assert (b.ell_max, b.h_max, b.rho_min) == (0.0, 0.0, 1.0)


def test_surface_report():
    cite = "test constant"
    r = surface_group_report(Quantity(1.9430254, 0, "external", cite), Quantity(0.662816, 0, "external", cite))
    assert f"{r['h_min']:.9f}" == "1.452903618"
    assert f"{r['ell_min']:.9f}" == "0.747753281"


def test_fundamental_equality_on_free_group():
    ex = free_group_exact(2)
    rep = auxiliary_checks(ex["h"], ex["rho"], ex["ell"], ex["v"], {2: 1.0}, k=1)
    assert rep["fundamental"].verdict == EQUALITY


def test_moment_series_with_unit_moments():
    ell, h = 0.5, 0.5 * LOG3
    ps = [2.0] + [1 + 1 / (2 * n - 1) for n in range(1, 11)]
    rep = auxiliary_checks(h, RHO_F2, ell, LOG3, {p: 1.0 for p in ps}, k=1)
    partial = math.fsum(2 / (2 * n - 1) * ell ** (2 * n) for n in range(1, 11))
    assert rep["moment_series"].lhs == pytest.approx(partial, rel=1e-15)
    assert partial <= F(ell)
    assert rep["moment_monotone"].verdict == EQUALITY


def test_missing_moments_skip():
    rep = auxiliary_checks(0.5, 0.9, 0.3)
    v = verdicts(rep)
    assert v["fundamental"] == SKIPPED
    assert v["moment_series"] == SKIPPED
    assert v["varopoulos_carne"] == SKIPPED


def test_growth_rows_on_free_group():
    ex = free_group_exact(2)
    rep = theorem1_rows(ex["h"], ex["ell"], ex["rho"], ex["v"], 1.0)
    assert all(r.verdict == EQUALITY and abs(r.slack) <= 1e-9 for r in rep)


def test_error_propagation_widens_tolerance():
    h = Quantity(0.55, 0.01, "estimated")
    row = evaluate_row("x", "h ≤ 0.56", lambda v: v["h"], lambda v: 0.56, {"h": h})
    assert row.error == pytest.approx(0.01)
    assert row.tol == pytest.approx(0.03)
    assert row.verdict == EQUALITY


def test_external_constant_needs_citation():
    with pytest.raises(ValueError):
        Quantity(1.0, 0.0, "external")
    with pytest.raises(ValueError):
        Quantity(1.0, 0.0, "guessed")


def test_markdown_tags():
    cite = "some source"
    rep = theorem1_rows(Quantity(0.5, 0.01, "estimated"), 0.4, 0.9, Quantity(1.0, 0, "external", cite), 1.0)
    md = markdown_table(rep.to_dict())
    assert "est±0.01" in md
    assert f"ext[{cite}]" in md
    body = [line for line in md.splitlines()[2:]]
    assert all("(" in line for line in body)


def test_report_json_round_trip():
    import json

    ex = free_group_exact(2)
    rep = theorem2_check(ex["h"], ex["rho"], ex["ell"], 1.0)
    d = json.loads(rep.to_json())
    assert [r["name"] for r in d["rows"]] == [r.name for r in rep]
    assert markdown_table(d) == rep.to_markdown()
