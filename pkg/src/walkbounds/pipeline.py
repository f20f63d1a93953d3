"""Config-driven pipeline producing the report bundle.

Stages run in a fixed order: census, exact-walk, monte-carlo, boundary,
chebyshev, poisson, bounds.  Each stage records its results (or its error)
under ``report["stages"]``.  The inequality rows are evaluated twice:

* ``bounds``: on the most exact inputs available (closed forms, the
  free-product solver, the exact growth rate, external constants), falling
  back to estimates;
* ``bounds_estimated``: on simulation and extrapolation estimates alone,
  with error-aware verdicts, as a cross-check.
"""
from __future__ import annotations

import datetime as _dt
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .boundary import (
    RecurrentWalkError,
    cocycle_mc,
    cutpoint_check,
    equality_detector,
    exact_applicable,
    exact_cocycle_samples,
    free_product_exact,
)
from .bounds import (
    BoundReport,
    Quantity,
    auxiliary_checks,
    free_group_exact,
    markdown_table,
    surface_group_report,
    theorem1_bounds,
    theorem1_rows,
    theorem2_check,
)
from .chebyshev import chernov_tail_bound, decomposition_residual, exact_tail, pointwise_bounds
from .config import RunConfig
from .groups import FreeAbelianGroup, FreeGroup, WordGroup, ball_census, exact_growth_rate, growth_estimate
from .poisson import finite_difference, poissonize, symmetrized_derivatives
from .sampling import sample_paths
from .walk import BudgetError, Measure, asymptotic_estimates

STAGE_ORDER = ("census", "exact-walk", "monte-carlo", "boundary", "chebyshev", "poisson", "bounds")


@dataclass
class Bundle:
    """Everything a run writes: ``report.json``, ``series.csv``, ``bounds.md``, ``chebyshev.csv``."""

    report: dict
    series_csv: str | None
    bounds_md: str
    chebyshev_csv: str | None

    @property
    def exit_code(self) -> int:
        return int(self.report["status"]["exit_code"])

    def report_json(self) -> str:
        return dumps(self.report)

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.report_json())
        (out / "bounds.md").write_text(self.bounds_md)
        if self.series_csv is not None:
            (out / "series.csv").write_text(self.series_csv)
        if self.chebyshev_csv is not None:
            (out / "chebyshev.csv").write_text(self.chebyshev_csv)
        return out


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings, tuples to lists."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# -- exact inputs --------------------------------------------------------------


def known_invariants(measure: Measure) -> dict:
    """Exact ``h``, ``ell``, ``rho`` (and ``v`` when known) with their source.

    Closed forms cover the simple walk on ``F_d`` and nearest-neighbour walks
    on ``Z``; the free-product solver covers single-syllable measures on
    non-amenable free products of cyclic groups.  Returns ``{}`` otherwise.
    """
    group = measure.group
    out = {}
    if isinstance(group, WordGroup) and len(group.factors) == 1 and group.factors[0].order is None:
        w = group.factors[0].weight
        p = {x: pr for x, pr in measure.support}
        up, down = (group._atom_of[(0, 1)],), (group._atom_of[(0, -1)],)
        if set(p) <= {up, down, ()}:
            pu, pd, p0 = p.get(up, 0.0), p.get(down, 0.0), p.get((), 0.0)
            return {"h": 0.0, "ell": abs(pu - pd) * w, "rho": p0 + 2 * math.sqrt(pu * pd), "v": 0.0,
                    "source": "closed form (nearest-neighbour walk on Z)"}
    if (isinstance(group, FreeGroup) and group.rank >= 2 and group.unit_weights
            and set(measure.elements) == set(group.generators)
            and np.allclose(measure.probs, 1.0 / len(group.generators), rtol=0, atol=1e-15)):
        ex = free_group_exact(group.rank)
        return {k: ex[k] for k in ("h", "ell", "rho", "v")} | {"source": "closed form (simple walk on F_d)"}
    if exact_applicable(measure):
        sol = free_product_exact(measure)
        out = {"h": sol.h, "ell": sol.ell, "rho": sol.rho, "source": "free-product solver", "solution": sol}
        v = exact_growth_rate(group)
        if v is not None:
            out["v"] = v
    elif isinstance(group, FreeAbelianGroup):
        out = {"h": 0.0, "v": 0.0, "source": "abelian group"}
        if measure.is_symmetric:
            out["ell"] = 0.0
    return out


# -- stages ---------------------------------------------------------------------


class _Run:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.stages = {}
        self.timings = {}
        self.series = None
        self.cheb_csv = None
        self._known = None
        self.errors = []

    @property
    def measure(self):
        return self.cfg.measure

    def known(self) -> dict:
        if self._known is None:
            self._known = known_invariants(self.measure) if self.measure is not None else {}
        return self._known

    def max_support(self) -> int:
        b = self.cfg.budgets
        per = 48 * (len(self.measure.elements) + 2)
        return int(max(1000, min(b["max_support"], b["memory_bytes"] // per)))

    def execute(self, name, fn):
        t0 = time.perf_counter()
        try:
            self.stages[name] = fn()
        except BudgetError as exc:
            self.stages[name] = {"error": str(exc), "stage": exc.stage, "reached": exc.reached}
            self.errors.append(name)
        except (ValueError, RuntimeError, ArithmeticError) as exc:
            self.stages[name] = {"error": f"{type(exc).__name__}: {exc}"}
            self.errors.append(name)
        self.timings[name] = round(time.perf_counter() - t0, 3)

    # census ---------------------------------------------------------------
    def census(self):
        group = self.cfg.group
        out = {"v_exact": exact_growth_rate(group)}
        if not group.unit_weights:
            out["census"] = None
            out["reason"] = "ball census needs unit weights"
            return out
        c = ball_census(group, self.cfg.budgets["ball_radius"], self.cfg.budgets["max_elements"])
        out["census"] = c.to_dict()
        if c.radius >= 2:
            out["growth"] = growth_estimate(c).to_dict()
        return out

    # exact walk -----------------------------------------------------------
    def exact_walk(self):
        m = self.measure
        s = asymptotic_estimates(m, self.cfg.budgets["n_max"], self.cfg.tolerances["prune_eps"], self.max_support())
        self.series = s
        H = s.H
        n = len(H)
        sub = all(H[i + j] <= H[i] + H[j] + 1e-9 for i in range(n) for j in range(n) if i + j < n)
        inc = np.diff(H)
        props = {
            "max_pruned_mass": float(np.max(s.pruned_mass)),
            "entropy_subadditive": bool(sub),
            "increment_monotone": bool(np.all(np.diff(inc) <= 1e-9)),
            "ratio_above_root": bool(s.raw["rho_ratio"] >= s.cesaro["rho_root"] - 1e-12),
        }
        d = s.to_dict()
        d["properties"] = props
        d["symmetric"] = m.is_symmetric
        return d

    # monte carlo ----------------------------------------------------------
    def monte_carlo(self):
        b = self.cfg.budgets
        r = sample_paths(self.measure, b["mc_steps"], b["mc_paths"], self.cfg.seed, k0=b["mc_k0"],
                         max_support=self.max_support())
        self.mc = r
        return r.to_dict()

    # boundary -------------------------------------------------------------
    def boundary(self):
        m = self.measure
        group = m.group
        if not isinstance(group, WordGroup):
            return {"skipped": "boundary computations need a free product of cyclic groups"}
        out = {}
        tol = self.cfg.tolerances["detector"]
        try:
            applicable = exact_applicable(m)
        except RecurrentWalkError:
            applicable = False
        if applicable:
            sol = self.known().get("solution") or free_product_exact(m)
            logs, weights = exact_cocycle_samples(sol.table, m, sol.nu)
            reps = max(1, math.ceil(100 / logs.size))
            det = equality_detector(np.repeat(logs, reps), tol)
            pairs = _cutpoint_pairs(group)
            out["exact"] = sol.to_dict()
            out["exact"]["detector"] = det.to_dict()
            out["exact"]["cutpoints"] = {f"{group.format(u)}|{group.format(v)}": cutpoint_check(sol.table, u, v)
                                         for u, v in pairs}
            out["exact"]["symmetrized_cocycle_abs"] = sorted({round(abs((1 - c) / (1 + c)), 12)
                                                              for c in np.exp(logs)})
        else:
            out["exact"] = {"skipped": "no exact solver for this measure (needs single-syllable increments "
                                       "on a non-amenable free product)"}
        if self.cfg.enabled("monte-carlo") and all(len(x) == 1 for x in m.elements) and not _amenable(group):
            b = self.cfg.budgets
            pairs = _cutpoint_pairs(group)
            extra = [group.compose(u, v) for u, v in pairs]
            c = cocycle_mc(m, count=b["cocycle_count"], samples=b["hitting_samples"], horizon=b["horizon"],
                           seed=self.cfg.seed, extra_targets=extra)
            self.cocycle = c
            det = equality_detector(c.log_values, 3 * c.log_error)
            d = c.to_dict()
            d["detector"] = det.to_dict()
            d["cutpoints"] = {f"{group.format(u)}|{group.format(v)}": cutpoint_check(c.table, u, v)
                              for u, v in pairs}
            out["monte_carlo"] = d
        return out

    # chebyshev ------------------------------------------------------------
    def chebyshev(self):
        m = self.measure
        grid = np.linspace(-1, 1, 101)
        out = {
            "decomposition_max_residual": max(float(np.max(decomposition_residual(n, grid))) for n in range(31)),
            "chernov_dominates": all(exact_tail(n, k) <= chernov_tail_bound(n, k) * (1 + 1e-12)
                                     for n in range(61) for k in range(n + 1)),
        }
        if not m.is_symmetric:
            out["pointwise"] = {"skipped": "pointwise bounds need a symmetric measure"}
            return out
        rho, src = self._rho_upper()
        per_n = {}
        rep = None
        for n in range(1, self.cfg.budgets["chebyshev_n"] + 1):
            rep = pointwise_bounds(m, n, rho, src)
            tab = rep.table()
            per_n[str(n)] = {"holds": rep.holds, "max_ratio": max(r["ratio"] for r in tab)}
        self.cheb_csv = rep.to_csv()
        out["pointwise"] = {"rho": rho, "rho_source": src, "per_n": per_n,
                            "all_hold": all(v["holds"] for v in per_n.values())}
        return out

    def _rho_upper(self):
        k = self.known()
        if "rho" in k:
            if k["source"].startswith("closed form"):
                return k["rho"], k["source"]
            return min(1.0, k["rho"] * (1 + 1e-10)), k["source"] + " (+1e-10 margin)"
        if "rho_upper" in self.cfg.constants:
            c = self.cfg.constants["rho_upper"]
            return c.value, f"external: {c.citation}"
        return None, None

    # poisson --------------------------------------------------------------
    def poisson(self):
        m = self.measure
        if not m.is_symmetric:
            return {"skipped": "symmetrized derivatives need a symmetric measure"}
        tol = self.cfg.tolerances
        rho, _ = self._rho_upper()
        out = {}
        for t in self.cfg.budgets["poisson_t"]:
            kw = dict(defect_tol=tol["defect"], prune_eps=tol["poisson_prune_eps"], max_support=self.max_support())
            pl = poissonize(m, t, **kw)
            d = symmetrized_derivatives(m, pl)
            fd = finite_difference(m, t, tol["fd_delta"], **kw)
            out[repr(float(t))] = {
                **d.to_dict(),
                "N": pl.N, "defect": pl.defect, "pruned_mass": pl.pruned_mass, "support": pl.law.size,
                "fd_dH": fd["dH"], "fd_dL": fd["dL"],
                "rel_err_dH": abs(d.dH - fd["dH"]) / abs(fd["dH"]),
                "rel_err_dL": abs(d.dL - fd["dL"]) / abs(fd["dL"]) if fd["dL"] else abs(d.dL),
                "dirichlet_vs_1_minus_rho": None if rho is None else d.dirichlet - (1 - rho),
            }
        return out

    # bounds ---------------------------------------------------------------
    def inputs(self) -> dict:
        """Best available input for each invariant, as :class:`Quantity` objects."""
        k = self.known()
        consts = self.cfg.constants
        ins = {}
        for name in ("h", "ell", "rho"):
            if name in k:
                ins[name] = Quantity(k[name], 0.0, "exact", method=k["source"])
            elif name in consts:
                ins[name] = consts[name]
            else:
                est = self._estimate(name)
                if est is not None:
                    ins[name] = est
        group = self.cfg.group
        v = k.get("v")
        if v is None and group is not None:
            v = exact_growth_rate(group)
        if v is not None:
            ins["v"] = Quantity(v, 0.0, "exact", method="growth series")
        elif "v" in consts:
            ins["v"] = consts["v"]
        else:
            g = self.stages.get("census", {}).get("growth")
            if g:
                ins["v"] = Quantity(g["v_ratio"], abs(g["v_ratio"] - g["v_cesaro"]), "estimated",
                                    method="census ratio")
        if self.measure is not None:
            ins["M2"] = Quantity(self.measure.moment(2), 0.0, "exact", method="moment")
        elif "M2" in consts:
            ins["M2"] = consts["M2"]
        return ins

    def _estimate(self, name, prefer_mc=False):
        s = self.series
        if name == "h":
            c = getattr(self, "cocycle", None)
            if c is not None and (prefer_mc or s is None):
                return Quantity(c.h, c.h_se, "estimated", method="cocycle monte carlo")
            if s is not None:
                return Quantity(s.h_est.value, s.h_est.error, "estimated", method=s.h_est.method)
            if c is not None:
                return Quantity(c.h, c.h_se, "estimated", method="cocycle monte carlo")
        if name == "ell":
            mc = getattr(self, "mc", None)
            if mc is not None and (prefer_mc or s is None):
                return Quantity(mc.ell, mc.ell_se, "estimated", method="monte carlo |X_n|/n")
            if s is not None:
                return Quantity(s.ell_est.value, s.ell_est.error, "estimated", method=s.ell_est.method)
        if name == "rho" and s is not None and s.rho_est.value > 0:
            return Quantity(s.rho_est.value, s.rho_est.error, "estimated", method=s.rho_est.method)
        return None

    def bounds(self):
        cfg = self.cfg
        eq = cfg.tolerances["equality"]
        if self.measure is None:
            return self._constants_only()
        ins = self.inputs()
        primary = self._rows(ins, eq)
        out = {"inputs": {k: q.to_dict() for k, q in ins.items()}, "report": primary.to_dict()}
        out["growth_bounds"] = theorem1_bounds(ins["v"].value, ins["M2"].value).to_dict() if "v" in ins else None

        est = {}
        for name in ("h", "ell", "rho"):
            q = self._estimate(name, prefer_mc=True)
            if q is not None:
                est[name] = q
        for name in ("v", "M2"):
            if name in ins:
                est[name] = ins[name]
        if {"h", "ell", "rho"} <= set(est):
            out["estimated_inputs"] = {k: q.to_dict() for k, q in est.items()}
            out["estimated_report"] = self._rows(est, eq).to_dict()
        return out

    def _rows(self, ins, eq) -> BoundReport:
        m = self.measure
        missing = [k for k in ("h", "ell", "rho", "M2") if k not in ins]
        if missing:
            return BoundReport([])
        sym = m.is_symmetric
        rep = theorem2_check(ins["h"], ins["rho"], ins["ell"], ins["M2"], symmetric=sym, equality_tol=eq)
        if "v" in ins:
            rep.extend(theorem1_rows(ins["h"], ins["ell"], ins["rho"], ins["v"], ins["M2"], symmetric=sym,
                                     equality_tol=eq))
        ps = [2.0] + [1 + 1 / (2 * n - 1) for n in range(1, 11)]
        moments = {p: m.moment(p) for p in ps}
        rep.extend(auxiliary_checks(ins["h"], ins["rho"], ins["ell"], ins.get("v"), moments, k=m.radius,
                                    n_terms=10, symmetric=sym, equality_tol=eq))
        return rep

    def _constants_only(self):
        c = self.cfg.constants
        v = c["v"]
        M2 = c["M2"].value if "M2" in c else 1.0
        out = {"inputs": {k: q.to_dict() for k, q in c.items()}, "growth_bounds": theorem1_bounds(v.value, M2).to_dict()}
        if "rho_upper" in c:
            out["surface"] = surface_group_report(v, c["rho_upper"], M2)
        if "rho_lower" in c:
            gb = out["growth_bounds"]
            out["rho_lower_consistent"] = c["rho_lower"].value >= gb["rho_min"]
        out["report"] = {"rows": []}
        return out


def _amenable(group: WordGroup) -> bool:
    orders = [f.order for f in group.factors]
    return len(orders) == 1 or orders == [2, 2]


def _cutpoint_pairs(group: WordGroup) -> list:
    """Reduced products ``u v`` of syllables from different factors (or a letter and itself)."""
    gens = [g for g in group.generators]
    pairs = []
    for u in gens:
        for v in gens:
            if not group.same_factor(u[0], v[0]):
                pairs.append((u, v))
                break
        if len(pairs) >= 2:
            break
    if not pairs:
        for u in gens:
            if group.factors[group._atom_factor[u[0]]].order is None:
                pairs.append((u, u))
                break
    return pairs


def run(cfg: RunConfig) -> Bundle:
    """Execute the enabled stages and assemble the report bundle."""
    r = _Run(cfg)
    dispatch = {
        "census": r.census, "exact-walk": r.exact_walk, "monte-carlo": r.monte_carlo,
        "boundary": r.boundary, "chebyshev": r.chebyshev, "poisson": r.poisson, "bounds": r.bounds,
    }
    for name in STAGE_ORDER:
        if cfg.enabled(name):
            r.execute(name, dispatch[name])

    violated, cross = [], []
    b = r.stages.get("bounds", {})
    for row in (b.get("report") or {}).get("rows", []):
        if row["verdict"] == "violated":
            violated.append(row["name"])
    # the estimates-only cross-check flags unconverged estimates; it is
    # reported but does not override the verdict on the best inputs
    for row in (b.get("estimated_report") or {}).get("rows", []):
        if row["verdict"] == "violated":
            cross.append(row["name"])
    pw = r.stages.get("chebyshev", {}).get("pointwise", {})
    if pw.get("all_hold") is False:
        violated.append("chebyshev:pointwise")
    exit_code = 0 if not violated and not r.errors else 1

    report = {
        "header": {
            "tool": "walkbounds",
            "version": __version__,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "timings_s": r.timings,
        },
        "config": cfg.document,
        "name": cfg.name,
        "stages": r.stages,
        "status": {"exit_code": exit_code, "violated": violated, "cross_check_disagreements": cross,
                   "stage_errors": r.errors},
    }
    report = json.loads(dumps(report))  # same key order as report.json, so `report` re-renders identically
    return Bundle(report, r.series.to_csv() if r.series is not None else None, render_markdown(report), r.cheb_csv)


def render_markdown(report: dict) -> str:
    """``bounds.md`` from a report dict (also used by the ``report`` verb)."""
    lines = [f"# {report.get('name', 'run')}", ""]
    b = report.get("stages", {}).get("bounds")
    if b is None:
        lines.append("Bounds stage not run.")
    elif "error" in b:
        lines.append(f"Bounds stage failed: {b['error']}")
    else:
        if b.get("inputs"):
            lines += ["## Inputs", "", "| quantity | value | provenance |", "|---|---|---|"]
            for k, q in b["inputs"].items():
                lines.append(f"| {k} | {_fmt(q['value'])} | {_prov(q)} |")
            lines.append("")
        if b.get("growth_bounds"):
            gb = b["growth_bounds"]
            tag = _prov(b["inputs"]["v"]) if "v" in b.get("inputs", {}) else "exact"
            lines += ["## Growth bounds", "", "| bound | value | provenance |", "|---|---|---|",
                      f"| ℓ ≤ | {gb['ell_max']:.9f} | {tag} |",
                      f"| h ≤ | {gb['h_max']:.9f} | {tag} |",
                      f"| ρ ≥ | {gb['rho_min']:.9f} | {tag} |", ""]
        if b.get("surface"):
            s = b["surface"]
            tag = _prov(s["inputs"]["rho_upper"])
            lines += ["## Lower bounds from the ρ upper bound", "", "| bound | value | provenance |",
                      "|---|---|---|", f"| h ≥ | {s['h_min']:.9f} | {tag} |",
                      f"| ℓ ≥ h/v ≥ | {s['ell_min']:.9f} | {tag} |", ""]
        if b.get("report", {}).get("rows"):
            lines += ["## Inequalities (best available inputs)", "", markdown_table(b["report"])]
        if b.get("estimated_report"):
            lines += ["## Inequalities (estimated inputs only)", "",
                      "Cross-check on simulation and extrapolation estimates. A violated row here means an "
                      "estimate has not converged within its empirical error bar; it does not change the "
                      "exit status.", "", markdown_table(b["estimated_report"])]
    st = report.get("status", {})
    lines += ["## Status", "", f"exit code {st.get('exit_code')}; violated: {st.get('violated') or 'none'}; "
              f"cross-check disagreements: {st.get('cross_check_disagreements') or 'none'}; "
              f"stage errors: {st.get('stage_errors') or 'none'}", ""]
    return "\n".join(lines)


def _fmt(x):
    return f"{x:.10g}" if isinstance(x, (int, float)) else str(x)


def _prov(q: dict) -> str:
    if q["provenance"] == "exact":
        return "exact" + (f" ({q['method']})" if q.get("method") else "")
    if q["provenance"] == "estimated":
        return f"estimated ±{q['error']:.2g}" + (f" ({q['method']})" if q.get("method") else "")
    return f"external constant [{q.get('citation')}]"
