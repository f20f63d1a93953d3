"""Run configuration: loading, schema validation and semantic checks."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .bounds import Quantity
from .groups import Group, group_from_config
from .walk import MASS_TOL, Measure, build_measure, uniform_measure

STAGES = ("census", "exact-walk", "monte-carlo", "bounds", "chebyshev", "boundary", "poisson")

DEFAULT_BUDGETS = {
    "n_max": 12,
    "ball_radius": 10,
    "max_elements": 20_000_000,
    "max_support": 5_000_000,
    "memory_bytes": 2e9,
    "mc_paths": 1000,
    "mc_steps": 1000,
    "mc_k0": 0,
    "hitting_samples": 100_000,
    "horizon": 2000,
    "cocycle_count": 2000,
    "chebyshev_n": 10,
    "poisson_t": [1.0, 2.0],
}

DEFAULT_TOLERANCES = {
    "equality": 1e-9,
    "prune_eps": 0.0,
    "poisson_prune_eps": 1e-14,
    "defect": 1e-12,
    "fd_delta": 1e-4,
    "detector": 1e-9,
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def schema() -> dict:
    text = resources.files("walkbounds").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


def load_document(path) -> dict:
    """Parse a YAML or JSON config file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a mapping")
    return doc


def bundled_configs() -> dict:
    """Names and paths of the example configs shipped with the package."""
    root = resources.files("walkbounds").joinpath("configs")
    return {p.name.rsplit(".", 1)[0]: p for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith((".yaml", ".yml", ".json"))}


def _field_path(err) -> str:
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<root>"


def schema_errors(doc: dict) -> list:
    validator = jsonschema.Draft202012Validator(schema())
    out = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        # report the deepest, most specific failure of a oneOf/allOf branch
        best = jsonschema.exceptions.best_match([err])
        out.append(ConfigError(_field_path(best), best.message))
    return out


@dataclass
class RunConfig:
    """Validated configuration with defaults filled in."""

    name: str
    stages: tuple
    group: Group | None
    measure: Measure | None
    seed: int | None
    budgets: dict
    tolerances: dict
    constants: dict = field(default_factory=dict)
    document: dict = field(default_factory=dict)

    def enabled(self, stage: str) -> bool:
        return stage in self.stages

    def with_overrides(self, seed=None, stages=None, memory_bytes=None) -> "RunConfig":
        doc = copy.deepcopy(self.document)
        if seed is not None:
            doc["seed"] = int(seed)
        if stages is not None:
            doc["stages"] = list(stages)
        if memory_bytes is not None:
            doc.setdefault("budgets", {})["memory_bytes"] = float(memory_bytes)
        return parse_config(doc)


def parse_config(doc: dict) -> RunConfig:
    """Validate a config document and build the group, measure and constants.

    Raises
    ------
    ConfigError
        On the first schema or semantic problem.
    """
    errs = diagnostics(doc)
    if errs:
        raise errs[0]
    return _build(doc)


def diagnostics(doc: dict) -> list:
    """All problems found in ``doc`` as :class:`ConfigError` objects (empty when valid)."""
    errs = schema_errors(doc)
    if errs:
        return errs
    try:
        _build(doc)
    except ConfigError as exc:
        return [exc]
    return []


def _build(doc: dict) -> RunConfig:
    stages = tuple(doc["stages"])
    budgets = {**DEFAULT_BUDGETS, **doc.get("budgets", {})}
    tolerances = {**DEFAULT_TOLERANCES, **doc.get("tolerances", {})}
    seed = doc.get("seed")
    if seed is None and ("monte-carlo" in stages):
        raise ConfigError("seed", "a seed is required when the monte-carlo stage is enabled")

    group = None
    if "group" in doc:
        try:
            group = group_from_config(doc["group"])
        except ValueError as exc:
            raise ConfigError("group", str(exc)) from None

    measure = None
    if "measure" in doc:
        if group is None:
            raise ConfigError("measure", "a measure needs a group block")
        mdoc = doc["measure"]
        if mdoc.get("uniform") and "support" in mdoc:
            raise ConfigError("measure", "give either uniform or support, not both")
        try:
            if mdoc.get("uniform"):
                measure = uniform_measure(group)
            elif "support" in mdoc:
                measure = build_measure(group, [(x, p) for x, p in mdoc["support"]], tol=MASS_TOL)
            else:
                raise ConfigError("measure", "set uniform: true or give a support list")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError("measure.support", str(exc)) from None
        if not _generates(group, set(measure.elements)):
            raise ConfigError("measure.support", "support does not generate the group")

    walk_stages = {"exact-walk", "monte-carlo", "chebyshev", "boundary", "poisson"}
    needs = sorted(walk_stages & set(stages))
    if needs and measure is None:
        raise ConfigError("measure", f"stages {needs} need a measure block")
    if "census" in stages and group is None:
        raise ConfigError("group", "the census stage needs a group block")

    constants = {}
    for key, c in doc.get("constants", {}).items():
        constants[key] = Quantity(float(c["value"]), float(c.get("error", 0.0)), "external", c["citation"])
    if "bounds" in stages and measure is None and "v" not in constants:
        raise ConfigError("constants.v", "a constants-only bounds run needs the growth constant v")

    return RunConfig(doc.get("name", "run"), stages, group, measure, seed, budgets, tolerances, constants,
                     copy.deepcopy(doc))


def _generates(group: Group, support: set) -> bool:
    """Every generator is reachable as a product of support elements and their inverses.

    Checked by breadth-first search in the subgroup up to a small depth;
    sufficient for the generating sets used in configs.
    """
    targets = set(group.generators)
    steps = support | {group.invert(x) for x in support}
    frontier = {group.identity()}
    seen = set(frontier)
    for _ in range(6):
        if targets <= seen:
            return True
        nxt = set()
        for x in frontier:
            for s in steps:
                y = group.compose(x, s)
                if y not in seen:
                    nxt.add(y)
        seen |= nxt
        frontier = nxt
        if len(seen) > 200_000:
            break
    return targets <= seen


def load_config(path) -> RunConfig:
    return parse_config(load_document(path))
