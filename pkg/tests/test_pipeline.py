import json
import math

import pytest

from walkbounds.config import parse_config
from walkbounds.groups import FreeAbelianGroup, FreeGroup
from walkbounds.pipeline import dumps, known_invariants, run
from walkbounds.walk import build_measure, uniform_measure

from .conftest import ELL_MODULAR, H_MODULAR, LOG3, RHO_MODULAR


def test_known_free_group(f2_simple):
    k = known_invariants(f2_simple)
    assert k["h"] == pytest.approx(0.5 * LOG3)
    assert k["source"].startswith("closed form")


def test_known_asymmetric_z():
    k = known_invariants(build_measure(FreeGroup(1, ["a"]), [("a^-1", 0.3), ("a", 0.7)]))
    assert k["ell"] == pytest.approx(0.4)
    assert k["rho"] == pytest.approx(2 * math.sqrt(0.21))


def test_known_modular(modular_uniform):
    k = known_invariants(modular_uniform)
    assert (k["h"], k["ell"], k["rho"], k["v"]) == pytest.approx(
        (H_MODULAR, ELL_MODULAR, RHO_MODULAR, 0.5 * math.log(2)), abs=1e-12)


def test_known_abelian():
    k = known_invariants(uniform_measure(FreeAbelianGroup(2)))
    assert k["h"] == 0 and k["ell"] == 0 and "rho" not in k


def test_dumps_sanitizes():
    text = dumps({"b": float("inf"), "a": float("nan"), "c": (1, 2)})
    assert json.loads(text) == {"a": "nan", "b": "inf", "c": [1, 2]}


def test_constants_only_run():
    b = run(parse_config({"stages": ["bounds"],
                          "constants": {"v": {"value": 1.9430254, "citation": "c1"},
                                        "rho_upper": {"value": 0.662816, "citation": "c2"}}}))
    gb = b.report["stages"]["bounds"]["growth_bounds"]
    assert f"{gb['ell_max']:.9f}" == "0.749368278"
    assert b.exit_code == 0
    assert "ext[" not in b.bounds_md or "c1" in b.bounds_md


def test_abelian_run_skips_boundary():
    doc = {"group": {"type": "free_abelian", "rank": 2}, "measure": {"uniform": True},
           "stages": ["exact-walk", "boundary", "bounds"], "budgets": {"n_max": 10}}
    b = run(parse_config(doc))
    assert "skipped" in b.report["stages"]["boundary"]
    rows = {r["name"]: r["verdict"] for r in b.report["stages"]["bounds"]["report"]["rows"]}
    assert "violated" not in rows.values()
    assert b.exit_code == 0
    # finite-n drift of a diffusive walk has not converged to 0
    assert "growth_drift" in b.report["status"]["cross_check_disagreements"]


def test_deterministic_report(f2_simple):
    doc = {"group": {"type": "free", "rank": 2, "labels": ["a", "b"]}, "measure": {"uniform": True},
           "stages": ["exact-walk", "monte-carlo", "bounds"], "seed": 4,
           "budgets": {"n_max": 6, "mc_paths": 100, "mc_steps": 100}}
    a, b = run(parse_config(doc)), run(parse_config(doc))
    ja, jb = json.loads(a.report_json()), json.loads(b.report_json())
    ja.pop("header"), jb.pop("header")
    assert ja == jb
    assert a.series_csv == b.series_csv
