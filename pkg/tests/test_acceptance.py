"""Acceptance suite: one PASS/FAIL line per criterion.

Each test records its sub-checks in ``RESULTS``; the lines are printed as
each test finishes and again in the terminal summary (see ``conftest.py``).
Sub-checks that cannot be met as stated are marked ``xfail`` and report
FAIL honestly; the analysis lives in the decisions ledger.
"""
import math
import resource
import time
from collections import defaultdict

import numpy as np
import pytest

from walkbounds.boundary import (
    boundary_entropy_free,
    equality_detector,
    exact_cocycle_samples,
    first_letter_law,
    hitting_mc,
    solve_hitting_tree,
)
from walkbounds.bounds import (
    EQUALITY,
    STRICT,
    Quantity,
    auxiliary_checks,
    free_group_exact,
    surface_group_report,
    theorem1_bounds,
    theorem1_rows,
    theorem2_check,
)
from walkbounds.chebyshev import chernov_tail_bound, decomposition_residual, exact_tail, pointwise_bounds
from walkbounds.config import bundled_configs, load_config
from walkbounds.pipeline import run
from walkbounds.poisson import finite_difference, poissonize, symmetrized_derivatives
from walkbounds.special import FG_inv, fg_coefficients, fg_series
from walkbounds.walk import asymptotic_estimates, nstep

from . import test_properties as props
from .conftest import H_MODULAR, ELL_MODULAR, LOG3, RHO_F2

TITLES = {
    1: "free-group equality chain (exact inputs)",
    2: "free-group estimation at n = 12",
    3: "surface-group numbers",
    4: "Taylor recurrence and truncated series",
    5: "Chebyshev suite",
    6: "boundary suite",
    7: "strictness on the modular group (statistical)",
    8: "derivative identities",
    9: "property suites on bundled configs",
}
RESULTS = defaultdict(list)  # criterion -> [(sub-check, ok, detail)]

SHARP_ROWS = ("rho_entropy", "drift_entropy", "avez", "ledrappier", "dominance")


def check(criterion, name, ok, detail=""):
    RESULTS[criterion].append((name, bool(ok), detail))
    return bool(ok)


def line(criterion) -> str:
    subs = RESULTS.get(criterion, [])
    if not subs:
        return f"criterion {criterion}: NOT RUN  {TITLES[criterion]}"
    failed = [n for n, ok, _ in subs if not ok]
    status = "FAIL" if failed else "PASS"
    tail = f"  failed: {', '.join(failed)}" if failed else ""
    return f"criterion {criterion}: {status}  {TITLES[criterion]} ({len(subs) - len(failed)}/{len(subs)}){tail}"


def summary_lines() -> list:
    return [line(c) for c in sorted(TITLES)]


@pytest.fixture(autouse=True)
def _echo(request):
    yield
    c = request.node.get_closest_marker("criterion")
    if c is not None:
        print("\n" + line(c.args[0]))


def assert_all(criterion):
    bad = [(n, d) for n, ok, d in RESULTS[criterion] if not ok]
    assert not bad, bad


@pytest.mark.criterion(1)
def test_criterion_1_free_group_equality_chain():
    t0 = time.perf_counter()
    x = free_group_exact(2)
    check(1, "closed forms", math.isclose(x["h"], 0.5 * LOG3, rel_tol=1e-15) and x["rho"] == RHO_F2
          and x["ell"] == 0.5 and x["v"] == LOG3)
    rows = theorem2_check(x["h"], x["rho"], x["ell"], x["M2"])
    rows.extend(theorem1_rows(x["h"], x["ell"], x["rho"], x["v"], x["M2"]))
    rows.extend(auxiliary_checks(x["h"], x["rho"], x["ell"], x["v"]))
    for name in ("rho_entropy", "drift_entropy", "growth_drift", "growth_entropy", "growth_rho", "fundamental"):
        r = rows[name]
        check(1, name, r.verdict == EQUALITY and abs(r.slack) <= 1e-9, f"{r.verdict} slack={r.slack:.2e}")
    dt = time.perf_counter() - t0
    check(1, "runtime < 1 s", dt < 1.0, f"{dt:.3f} s")
    assert_all(1)


@pytest.mark.criterion(2)
def test_criterion_2_free_group_estimation(f2_simple):
    t0 = time.perf_counter()
    s = asymptotic_estimates(f2_simple, 12)
    dt = time.perf_counter() - t0
    check(2, "ell in [0.499, 0.501]", 0.499 <= s.ell_est.value <= 0.501, f"{s.ell_est.value:.6f}")
    check(2, "rho in [0.865, 0.867]", 0.865 <= s.rho_est.value <= 0.867, f"{s.rho_est.value:.6f}")
    check(2, "h in [0.539, 0.560]", 0.539 <= s.h_est.value <= 0.560, f"{s.h_est.value:.5f}")
    # the raw one-step increments are reported alongside
    check(2, "raw increments reported", np.isfinite(s.H[12] - s.H[11]) and s.L[12] - s.L[11] == pytest.approx(0.5),
          f"h_inc={s.H[12] - s.H[11]:.4f}")
    check(2, "runtime < 60 s", dt < 60, f"{dt:.2f} s")
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024  # kB on Linux; process-wide peak
    check(2, "memory < 2 GB", peak < 2 * 1024**3, f"peak RSS {peak / 1024**2:.0f} MB")
    assert_all(2)


def digits(x, target: str) -> bool:
    return f"{x:.{len(target.split('.')[1])}f}" == target


@pytest.mark.criterion(3)
def test_criterion_3_surface_numbers():
    t0 = time.perf_counter()
    gb = theorem1_bounds(1.9430254, 1.0)
    check(3, "ell <= 0.749368278", digits(gb.ell_max, "0.749368278"), f"{gb.ell_max:.9f}")
    check(3, "h <= 1.456041598", digits(gb.h_max, "1.456041598"), f"{gb.h_max:.9f}")
    check(3, "rho >= 0.66215344", digits(gb.rho_min, "0.66215344"), f"{gb.rho_min:.9f}")
    rep = surface_group_report(Quantity(1.9430254, 0.0, "external", "growth of the genus-2 surface group"),
                               Quantity(0.662816, 0.0, "external", "spectral radius bracket"))
    check(3, "h >= 1.452903618", digits(rep["h_min"], "1.452903618"), f"{rep['h_min']:.9f}")
    check(3, "ell >= 0.747753281", digits(rep["ell_min"], "0.747753281"), f"{rep['ell_min']:.9f}")
    dt = time.perf_counter() - t0
    check(3, "runtime < 1 s", dt < 1.0, f"{dt:.3f} s")
    assert_all(3)


@pytest.mark.criterion(4)
def test_criterion_4_recurrence():
    t0 = time.perf_counter()
    cs = fg_coefficients(20)
    check(4, "c_1..c_20 positive", all(c > 0 for c in cs))
    check(4, "recurrence holds", all((2 * n - 1) * cs[n - 1] == (n - 2) * cs[n - 2] + 2 for n in range(2, 21)))
    x = np.linspace(0, 0.36, 2001)
    err = float(np.max(np.abs(fg_series(x, 20) - FG_inv(x))))
    check(4, "20 terms within 1e-10 on [0, 0.36]", err <= 1e-10, f"{err:.2e}")
    x = np.linspace(0, 0.5, 2001)
    err = float(np.max(np.abs(fg_series(x, 40) - FG_inv(x))))
    check(4, "40 terms within 1e-10 on [0, 0.5]", err <= 1e-10, f"{err:.2e}")
    dt = time.perf_counter() - t0
    check(4, "runtime < 1 s", dt < 1.0, f"{dt:.3f} s")
    assert_all(4)


@pytest.mark.criterion(4)
@pytest.mark.xfail(strict=True, reason="the 20-term tail at x = 0.5 is about 9e-8; see decisions ledger")
def test_criterion_4_twenty_terms_on_half():
    x = np.linspace(0, 0.5, 2001)
    err = float(np.max(np.abs(fg_series(x, 20) - FG_inv(x))))
    check(4, "20 terms within 1e-10 on [0, 0.5]", err <= 1e-10, f"{err:.2e}")
    assert err <= 1e-10


@pytest.mark.criterion(5)
def test_criterion_5_chebyshev(f2_simple):
    t0 = time.perf_counter()
    grid = np.linspace(-1, 1, 101)
    res = max(float(np.max(decomposition_residual(n, grid))) for n in range(31))
    check(5, "decomposition residual <= 1e-12", res <= 1e-12, f"{res:.1e}")
    dom = all(exact_tail(n, k) <= chernov_tail_bound(n, k) * (1 + 1e-12) for n in range(61) for k in range(n + 1))
    check(5, "Chernov dominates binomial tails", dom)
    eq = all(math.isclose(exact_tail(n, n), chernov_tail_bound(n, n), rel_tol=1e-12) for n in range(61))
    check(5, "Chernov equality at k = n", eq)
    ok = all(pointwise_bounds(f2_simple, n, RHO_F2, "closed form").holds for n in range(1, 11))
    check(5, "Loeuillot and Carne dominate F2 laws, n <= 10", ok)
    dt = time.perf_counter() - t0
    check(5, "runtime < 30 s", dt < 30, f"{dt:.2f} s")
    assert_all(5)


@pytest.mark.criterion(6)
def test_criterion_6_boundary(f2_simple):
    t0 = time.perf_counter()
    table = solve_hitting_tree(f2_simple)
    check(6, "tree fixed point q = 1/3", all(abs(table.q(g) - 1 / 3) <= 1e-12 for g in ("a", "a^-1", "b", "b^-1")))
    errs = [abs(boundary_entropy_free(d) - (1 - 1 / d) * math.log(2 * d - 1)) for d in range(2, 6)]
    check(6, "boundary_entropy_free, d = 2..5", max(errs) <= 1e-12, f"{max(errs):.1e}")
    logs, _ = exact_cocycle_samples(table, f2_simple, first_letter_law(table))
    det = equality_detector(np.repeat(logs, 10))
    check(6, "detector two-valued, alpha = log 3", det.two_valued and abs(det.alpha - LOG3) <= 1e-12,
          f"alpha={det.alpha:.15f}")
    est = hitting_mc(f2_simple, "a", samples=100_000, horizon=2000, seed=20240601)
    check(6, "MC hitting within 3 sigma of 1/3", abs(est.value - 1 / 3) <= 3 * est.se,
          f"{est.value:.5f} +- {est.se:.5f}")
    dt = time.perf_counter() - t0
    check(6, "runtime < 60 s", dt < 60, f"{dt:.2f} s")
    assert_all(6)


@pytest.fixture(scope="module")
def modular_run():
    t0 = time.perf_counter()
    bundle = run(load_config(bundled_configs()["modular_p13"]))
    return bundle, time.perf_counter() - t0


@pytest.mark.criterion(7)
def test_criterion_7_modular_strictness(modular_run):
    bundle, dt = modular_run
    st = bundle.report["stages"]
    exact = {r["name"]: r for r in st["bounds"]["report"]["rows"]}
    ok = all(exact[n]["verdict"] == STRICT and exact[n]["slack"] > 0 for n in SHARP_ROWS)
    check(7, "sharp rows strict on exact inputs", ok,
          ", ".join(f"{n}={exact[n]['slack']:.2e}" for n in SHARP_ROWS))
    mc = {r["name"]: r for r in st["bounds"]["estimated_report"]["rows"]}
    for n in ("drift_entropy", "avez", "dominance"):
        r = mc[n]
        check(7, f"{n} strict from MC inputs", r["verdict"] == STRICT and r["slack"] > 3 * r["error"],
              f"slack={r['slack']:.2e} err={r['error']:.1e}")
    coc = st["boundary"]["monte_carlo"]
    check(7, "detector two_valued = false", coc["detector"]["two_valued"] is False)
    check(7, "MC cocycle h within 3 sigma of exact", abs(coc["h"] - H_MODULAR) <= 3 * coc["h_se"],
          f"{coc['h']:.5f} +- {coc['h_se']:.5f}")
    ell = st["monte-carlo"]
    check(7, "MC ell within 3 sigma of exact", abs(ell["ell"] - ELL_MODULAR) <= 3 * ell["ell_se"],
          f"{ell['ell']:.5f} +- {ell['ell_se']:.5f}")
    check(7, "runtime < 5 min", dt < 300, f"{dt:.1f} s")
    assert_all(7)


@pytest.mark.criterion(7)
@pytest.mark.xfail(strict=True, reason="slacks of 5e-5 and 1.4e-4 are below the MC resolution; see decisions ledger")
def test_criterion_7_all_rows_from_mc(modular_run):
    mc = {r["name"]: r for r in modular_run[0].report["stages"]["bounds"]["estimated_report"]["rows"]}
    for n in ("rho_entropy", "ledrappier"):
        r = mc[n]
        check(7, f"{n} strict from MC inputs", r["verdict"] == STRICT and r["slack"] > 3 * r["error"],
              f"slack={r['slack']:.2e} err={r['error']:.1e}")
    assert all(mc[n]["verdict"] == STRICT for n in SHARP_ROWS)


@pytest.mark.criterion(8)
def test_criterion_8_derivatives(f2_simple):
    t0 = time.perf_counter()
    for t in (1.0, 2.0):
        d = symmetrized_derivatives(f2_simple, poissonize(f2_simple, t))
        fd = finite_difference(f2_simple, t, 1e-4)
        eh = abs(d.dH - fd["dH"]) / abs(fd["dH"])
        el = abs(d.dL - fd["dL"]) / abs(fd["dL"])
        check(8, f"dH at t = {t:g}", eh <= 1e-4, f"rel {eh:.1e}")
        check(8, f"dL at t = {t:g}", el <= 1e-4, f"rel {el:.1e}")
        check(8, f"dirichlet at t = {t:g}", d.dirichlet >= 1 - RHO_F2, f"{d.dirichlet:.4f}")
    dt = time.perf_counter() - t0
    check(8, "runtime < 2 min", dt < 120, f"{dt:.1f} s")
    assert_all(8)


PROPERTIES = [
    props.test_mass_conservation,
    props.test_entropy_subadditive_and_increments_monotone,
    props.test_symmetry_propagates,
    props.test_word_metric,
    props.test_cocycle_multiplicative,
]


@pytest.mark.criterion(9)
def test_criterion_9_properties():
    for name in props.CONFIGS:
        for fn in PROPERTIES:
            try:
                fn(name)
                ok, detail = True, ""
            except pytest.skip.Exception as exc:
                ok, detail = True, f"n/a: {exc.msg}"
            except AssertionError as exc:
                ok, detail = False, str(exc)[:200]
            check(9, f"{fn.__name__[5:]}[{name}]", ok, detail)
    assert_all(9)


@pytest.mark.criterion(9)
@pytest.mark.parametrize("name", sorted(bundled_configs()))
def test_criterion_9_bundled_runs(name, modular_run):
    bundle = modular_run[0] if name == "modular_p13" else run(load_config(bundled_configs()[name]))
    st = bundle.report["status"]
    check(9, f"run[{name}] exit 0", bundle.exit_code == 0, f"violated={st['violated']} errors={st['stage_errors']}")
    assert bundle.exit_code == 0
