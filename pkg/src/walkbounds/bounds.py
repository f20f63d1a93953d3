"""Evaluation of the inequalities between entropy, drift, spectral radius and growth.

Every inequality is evaluated as a :class:`BoundRow` holding both sides,
the slack ``rhs - lhs`` (nonnegative when the inequality holds) and a
verdict that accounts for the uncertainty of the inputs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .special import A_carne, A_ledr, F, FG_inv

EQUALITY_TOL = 1e-9

STRICT = "satisfied-strict"
EQUALITY = "satisfied-equality"
VIOLATED = "violated"
SKIPPED = "skipped"


@dataclass(frozen=True)
class Quantity:
    """A number with its uncertainty and where it came from.

    Parameters
    ----------
    value : float
    error : float
        One-sigma (or empirical) uncertainty; zero for exact values.
    provenance : {"exact", "estimated", "external"}
    citation : str, optional
        Source of an external constant.
    method : str, optional
        How the value was obtained.
    """

    value: float
    error: float = 0.0
    provenance: str = "exact"
    citation: str | None = None
    method: str | None = None

    def __post_init__(self):
        if self.provenance not in ("exact", "estimated", "external"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "external" and not self.citation:
            raise ValueError("external constants need a citation")

    @classmethod
    def coerce(cls, x) -> "Quantity":
        if isinstance(x, Quantity):
            return x
        return cls(float(x))

    @property
    def tag(self) -> str:
        if self.provenance == "exact":
            return "exact"
        if self.provenance == "estimated":
            return f"est±{self.error:.2g}"
        return f"ext[{self.citation}]"

    def to_dict(self) -> dict:
        out = {"value": self.value, "error": self.error, "provenance": self.provenance}
        if self.citation:
            out["citation"] = self.citation
        if self.method:
            out["method"] = self.method
        return out


@dataclass
class BoundRow:
    """One evaluated inequality ``lhs <= rhs``."""

    name: str
    inequality: str
    lhs: float = math.nan
    rhs: float = math.nan
    slack: float = math.nan
    error: float = 0.0
    tol: float = EQUALITY_TOL
    verdict: str = SKIPPED
    reason: str | None = None
    inputs: dict = field(default_factory=dict)

    @property
    def violated(self) -> bool:
        return self.verdict == VIOLATED

    def to_dict(self) -> dict:
        return {
            "name": self.name, "inequality": self.inequality,
            "lhs": _num(self.lhs), "rhs": _num(self.rhs), "slack": _num(self.slack),
            "error": _num(self.error), "tol": self.tol, "verdict": self.verdict,
            "reason": self.reason,
            "inputs": {k: q.to_dict() for k, q in self.inputs.items()},
        }


def _num(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None if x is None or math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


@dataclass
class BoundReport:
    """A list of evaluated inequalities."""

    rows: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, name):
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def extend(self, rows):
        self.rows.extend(rows)
        return self

    @property
    def any_violated(self) -> bool:
        return any(r.violated for r in self.rows)

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_markdown(self) -> str:
        return markdown_table(self.to_dict())


def markdown_table(report: dict) -> str:
    """Markdown table of a serialized :class:`BoundReport`.

    Every number carries a provenance tag: ``exact``, ``est±err`` or
    ``ext[citation]``.
    """
    lines = ["| inequality | lhs | rhs | slack | verdict |", "|---|---|---|---|---|"]
    for r in report["rows"]:
        inputs = r.get("inputs", {})
        tags = ", ".join(f"{k}: {_tag(q)}" for k, q in inputs.items())
        verdict = r["verdict"]
        if verdict == SKIPPED:
            verdict = f"skipped ({r.get('reason')})"
        elif verdict == EQUALITY:
            verdict = f"{EQUALITY} (tol {r['tol']:.1e})"
        cells = [_cell(r[k], r.get("error") or 0.0, inputs) for k in ("lhs", "rhs", "slack")]
        head = f"{r['inequality']} [{tags}]" if tags else r["inequality"]
        lines.append(f"| {head} | {cells[0]} | {cells[1]} | {cells[2]} | {verdict} |")
    return "\n".join(lines) + "\n"


def _tag(q: dict) -> str:
    if q["provenance"] == "exact":
        return "exact"
    if q["provenance"] == "estimated":
        return f"est±{q['error']:.2g}"
    return f"ext[{q.get('citation')}]"


def _cell(x, err, inputs):
    if x is None:
        return "n/a"
    if isinstance(x, str):
        return x
    provs = {q["provenance"] for q in inputs.values()}
    if provs <= {"exact"}:
        tag = "exact"
    elif "estimated" in provs:
        tag = f"est±{err:.2g}"
    else:
        cites = sorted({q["citation"] for q in inputs.values() if q.get("citation")})
        tag = "ext[" + "; ".join(cites) + "]"
    return f"{x:.10g} ({tag})"


def evaluate_row(name: str, inequality: str, lhs_fn, rhs_fn, inputs: dict,
                 equality_tol: float = EQUALITY_TOL) -> BoundRow:
    """Evaluate ``lhs_fn(v) <= rhs_fn(v)`` at the input values ``v``.

    Input uncertainties are propagated to the slack by symmetric secants
    ``(s(x + e) - s(x - e)) / 2`` per input, combined in quadrature.  The
    verdict is *equality* when ``|slack| <= tol`` with ``tol`` the larger of
    ``equality_tol`` and three propagated errors, *strict* above that and
    *violated* below ``-tol``.
    """
    inputs = {k: Quantity.coerce(q) for k, q in inputs.items()}
    vals = {k: q.value for k, q in inputs.items()}
    row = BoundRow(name, inequality, inputs=inputs)
    try:
        lhs, rhs = float(lhs_fn(vals)), float(rhs_fn(vals))
    except (ValueError, ZeroDivisionError) as exc:
        row.reason = f"domain: {exc}"
        return row
    slack = rhs - lhs
    var = 0.0
    for k, q in inputs.items():
        if q.error > 0:
            up, dn = dict(vals), dict(vals)
            up[k] += q.error
            dn[k] -= q.error
            try:
                d = (float(rhs_fn(up)) - float(lhs_fn(up)) - float(rhs_fn(dn)) + float(lhs_fn(dn))) / 2
            except (ValueError, ZeroDivisionError):
                d = math.inf
            var += d * d
    err = math.sqrt(var)
    tol = max(equality_tol, 3 * err)
    row.lhs, row.rhs, row.slack, row.error, row.tol = lhs, rhs, slack, err, tol
    if math.isnan(slack):
        row.reason = "undefined slack"
    elif math.isinf(slack):
        row.verdict = STRICT if slack > 0 else VIOLATED
    elif abs(slack) <= tol:
        row.verdict = EQUALITY
    else:
        row.verdict = STRICT if slack > 0 else VIOLATED
    return row


def _skipped(name, inequality, reason, inputs=None):
    return BoundRow(name, inequality, reason=reason,
                    inputs={k: Quantity.coerce(q) for k, q in (inputs or {}).items()})


def _rho_lhs(rho):
    if rho >= 1.0:
        return 0.0
    return FG_inv(1.0 - rho)


def theorem2_check(h, rho, ell, M2, symmetric: bool = True, equality_tol: float = EQUALITY_TOL) -> BoundReport:
    """Rows of the sharp entropy inequalities for a symmetric measure.

    * ``rho_entropy``: ``2 sqrt(1 - rho^2) artanh sqrt(1 - rho^2) <= h``
    * ``drift_entropy``: ``F(ell / M2) <= h``
    * ``avez``: ``-2 log rho <= h``
    * ``ledrappier``: ``4 (1 - rho) <= h``
    * ``dominance``: ``max(-2 log rho, 4 (1 - rho)) <= FG_inv(1 - rho)``

    ``rho = 1`` is handled by continuity (left side 0).  For an asymmetric
    measure every row is skipped.  The drift row is skipped when
    ``ell / M2 >= 1``, which can only come from estimation error.
    """
    names = [
        ("rho_entropy", "2√(1−ρ²)·artanh√(1−ρ²) ≤ h"),
        ("drift_entropy", "F(ℓ/M₂) ≤ h"),
        ("avez", "−2 log ρ ≤ h"),
        ("ledrappier", "4(1−ρ) ≤ h"),
        ("dominance", "max(−2 log ρ, 4(1−ρ)) ≤ FG_inv(1−ρ)"),
    ]
    ins = {"h": h, "rho": rho, "ell": ell, "M2": M2}
    if not symmetric:
        return BoundReport([_skipped(n, t, "asymmetric measure", ins) for n, t in names])
    q = {k: Quantity.coerce(v) for k, v in ins.items()}
    if not (0 < q["rho"].value <= 1):
        raise ValueError(f"rho must lie in (0, 1], got {q['rho'].value}")
    if q["M2"].value <= 0:
        raise ValueError("M2 must be positive")
    rows = []
    hr = {"h": q["h"], "rho": q["rho"]}
    rows.append(evaluate_row(*names[0], lambda v: _rho_lhs(min(v["rho"], 1.0)), lambda v: v["h"], hr, equality_tol))
    hl = {"h": q["h"], "ell": q["ell"], "M2": q["M2"]}
    if q["ell"].value / q["M2"].value >= 1:
        rows.append(_skipped(*names[1], "ℓ/M₂ ≥ 1 (estimation artifact)", hl))
    else:
        rows.append(evaluate_row(*names[1], lambda v: F(min(v["ell"] / v["M2"], 1.0)), lambda v: v["h"], hl, equality_tol))
    rows.append(evaluate_row(*names[2], lambda v: -2 * math.log(min(v["rho"], 1.0)), lambda v: v["h"], hr, equality_tol))
    rows.append(evaluate_row(*names[3], lambda v: 4 * (1 - min(v["rho"], 1.0)), lambda v: v["h"], hr, equality_tol))
    rr = {"rho": q["rho"]}
    rows.append(evaluate_row(
        *names[4],
        lambda v: max(-2 * math.log(min(v["rho"], 1.0)), 4 * (1 - min(v["rho"], 1.0))),
        lambda v: _rho_lhs(min(v["rho"], 1.0)), rr, equality_tol))
    return BoundReport(rows)


@dataclass
class GrowthBounds:
    """Upper bounds on drift and entropy and lower bound on ``rho`` from growth."""

    v_tilde: float
    ell_max: float
    h_max: float
    rho_min: float
    identity_residual: float

    def to_dict(self):
        return dict(self.__dict__)


def theorem1_bounds(v, M2) -> GrowthBounds:
    """Bounds implied by volume growth, with ``v~ = M2 v``.

    ``ell <= M2 tanh(v~/2)``, ``h <= v~ tanh(v~/2)``, ``rho >= 1/cosh(v~/2)``.
    ``identity_residual`` checks ``FG_inv(1 - r) = v~ tanh(v~/2)`` at
    ``r = 1/cosh(v~/2)``.
    """
    v, M2 = float(v), float(M2)
    if v < 0 or M2 <= 0:
        raise ValueError("need v >= 0 and M2 > 0")
    vt = M2 * v
    th = math.tanh(vt / 2)
    r = 1.0 / math.cosh(vt / 2)
    # 1 - 1/cosh(u) = 2 sinh(u/2)^2 / cosh(u), exact for small u
    one_minus_r = 2 * math.sinh(vt / 4) ** 2 / math.cosh(vt / 2)
    resid = abs(FG_inv(one_minus_r) - vt * th) if vt > 0 else 0.0
    return GrowthBounds(vt, M2 * th, vt * th, r, resid)


def theorem1_rows(h, ell, rho, v, M2, symmetric: bool = True, equality_tol: float = EQUALITY_TOL) -> BoundReport:
    """The three growth bounds as rows, each compared with the actual invariant.

    Skipped for asymmetric measures, where a drift can coexist with ``v = 0``.
    """
    q = {k: Quantity.coerce(x) for k, x in dict(h=h, ell=ell, rho=rho, v=v, M2=M2).items()}
    names = [("growth_drift", "ℓ ≤ M₂·tanh(ṽ/2)"), ("growth_entropy", "h ≤ ṽ·tanh(ṽ/2)"),
             ("growth_rho", "1/cosh(ṽ/2) ≤ ρ")]
    if not symmetric:
        return BoundReport([_skipped(n, t, "asymmetric measure", q) for n, t in names])

    def b(vals):
        return theorem1_bounds(vals["v"], vals["M2"])

    vm = {"v": q["v"], "M2": q["M2"]}
    return BoundReport([
        evaluate_row("growth_drift", "ℓ ≤ M₂·tanh(ṽ/2)", lambda x: x["ell"], lambda x: b(x).ell_max,
                     {"ell": q["ell"], **vm}, equality_tol),
        evaluate_row("growth_entropy", "h ≤ ṽ·tanh(ṽ/2)", lambda x: x["h"], lambda x: b(x).h_max,
                     {"h": q["h"], **vm}, equality_tol),
        evaluate_row("growth_rho", "1/cosh(ṽ/2) ≤ ρ", lambda x: b(x).rho_min, lambda x: x["rho"],
                     {"rho": q["rho"], **vm}, equality_tol),
    ])


def auxiliary_checks(h, rho, ell, v=None, moments: dict | None = None, k=None, n_terms: int = 10,
                     symmetric: bool = True, equality_tol: float = EQUALITY_TOL) -> BoundReport:
    """Companion inequalities.

    * ``fundamental``: ``h <= ell v``
    * ``carne_avez``: ``A_carne(ell/M2) + 2 |log rho| <= h``
    * ``ledrappier_strong``: ``A_ledr(ell/M2) + 4 (1 - rho) <= h``
    * ``moment_series``: ``sum_{n<=N} 2/(2n-1) (ell / M_{1+1/(2n-1)})^{2n} <= h``
    * ``moment_monotone``: the same partial sum with ``M2`` in place of every
      moment is no larger
    * ``varopoulos_carne``: ``ell^2 / (2 k^2) <= h`` with ``k`` the support radius

    ``moments`` maps ``p`` to ``M_p``; missing moments skip the affected rows.
    """
    moments = dict(moments or {})
    q = {k_: Quantity.coerce(x) for k_, x in dict(h=h, rho=rho, ell=ell).items()}
    rows = []
    if v is None:
        rows.append(_skipped("fundamental", "h ≤ ℓ·v", "growth not supplied"))
    else:
        rows.append(evaluate_row("fundamental", "h ≤ ℓ·v", lambda x: x["h"], lambda x: x["ell"] * x["v"],
                                 {"h": q["h"], "ell": q["ell"], "v": Quantity.coerce(v)}, equality_tol))
    sym_rows = ["carne_avez", "ledrappier_strong", "moment_series", "moment_monotone", "varopoulos_carne"]
    if not symmetric:
        rows.extend(_skipped(n, n, "asymmetric measure") for n in sym_rows)
        return BoundReport(rows)

    M2 = moments.get(2)
    if M2 is None:
        rows.append(_skipped("carne_avez", "A_carne(ℓ/M₂) + 2|log ρ| ≤ h", "M₂ missing"))
        rows.append(_skipped("ledrappier_strong", "A_ledr(ℓ/M₂) + 4(1−ρ) ≤ h", "M₂ missing"))
    else:
        M2q = Quantity.coerce(M2)
        ins = {"h": q["h"], "rho": q["rho"], "ell": q["ell"], "M2": M2q}
        if q["ell"].value / M2q.value >= 1:
            rows.append(_skipped("carne_avez", "A_carne(ℓ/M₂) + 2|log ρ| ≤ h", "ℓ/M₂ ≥ 1", ins))
            rows.append(_skipped("ledrappier_strong", "A_ledr(ℓ/M₂) + 4(1−ρ) ≤ h", "ℓ/M₂ ≥ 1", ins))
        else:
            rows.append(evaluate_row(
                "carne_avez", "A_carne(ℓ/M₂) + 2|log ρ| ≤ h",
                lambda x: A_carne(min(x["ell"] / x["M2"], 1.0)) + 2 * abs(math.log(min(x["rho"], 1.0))),
                lambda x: x["h"], ins, equality_tol))
            rows.append(evaluate_row(
                "ledrappier_strong", "A_ledr(ℓ/M₂) + 4(1−ρ) ≤ h",
                lambda x: A_ledr(min(x["ell"] / x["M2"], 1 - 1e-16)) + 4 * (1 - min(x["rho"], 1.0)),
                lambda x: x["h"], ins, equality_tol))

    ps = [1 + 1 / (2 * n - 1) for n in range(1, n_terms + 1)]
    missing = [p for p in ps if _moment_lookup(moments, p) is None]
    text = f"Σ_{{n≤{n_terms}}} 2/(2n−1)·(ℓ/M_{{1+1/(2n−1)}})^{{2n}} ≤ h"
    if missing:
        rows.append(_skipped("moment_series", text, f"moments missing for p = {missing[0]:.6g}"))
        rows.append(_skipped("moment_monotone", "moment series with M₂ ≤ moment series", "moments missing"))
    else:
        mq = {f"M{p:.6g}": Quantity.coerce(_moment_lookup(moments, p)) for p in ps}
        keys = list(mq)

        def series(x, use=None):
            return math.fsum(2 / (2 * n - 1) * (x["ell"] / x[use or keys[n - 1]]) ** (2 * n)
                             for n in range(1, n_terms + 1))

        ins = {"h": q["h"], "ell": q["ell"], **mq}
        rows.append(evaluate_row("moment_series", text, series, lambda x: x["h"], ins, equality_tol))
        if M2 is not None:
            ins2 = {"ell": q["ell"], "M2": Quantity.coerce(M2), **mq}
            rows.append(evaluate_row("moment_monotone", "moment series with M₂ ≤ moment series",
                                     lambda x: series(x, "M2"), series, ins2, equality_tol))
        else:
            rows.append(_skipped("moment_monotone", "moment series with M₂ ≤ moment series", "M₂ missing"))

    if k is None:
        rows.append(_skipped("varopoulos_carne", "ℓ²/(2k²) ≤ h", "support radius not supplied"))
    else:
        rows.append(evaluate_row("varopoulos_carne", "ℓ²/(2k²) ≤ h",
                                 lambda x: x["ell"] ** 2 / (2 * x["k"] ** 2), lambda x: x["h"],
                                 {"h": q["h"], "ell": q["ell"], "k": Quantity.coerce(k)}, equality_tol))
    return BoundReport(rows)


def _moment_lookup(moments, p):
    for key, val in moments.items():
        if abs(float(key) - p) < 1e-12:
            return val
    return None


def free_group_exact(d: int) -> dict:
    """Closed-form invariants of the simple random walk on the free group ``F_d``."""
    if d < 1:
        raise ValueError("rank must be >= 1")
    return {
        "h": (1 - 1 / d) * math.log(2 * d - 1),
        "ell": 1 - 1 / d,
        "rho": math.sqrt(2 * d - 1) / d,
        "v": math.log(2 * d - 1),
        "M2": 1.0,
    }


def surface_group_report(v: Quantity, rho_upper: Quantity, M2: float = 1.0) -> dict:
    """Growth bounds for a group known only through ``v``, plus the lower bounds
    on ``h`` and ``ell`` implied by an upper bound on ``rho``.
    """
    gb = theorem1_bounds(v.value, M2)
    h_min = FG_inv(1 - rho_upper.value)
    return {
        "growth_bounds": gb.to_dict(),
        "h_min": h_min,
        "ell_min": h_min / v.value,
        "inputs": {"v": v.to_dict(), "rho_upper": rho_upper.to_dict(), "M2": M2},
    }
