"""Declarative experiment configuration (JSON document, schema version 1).

A config names a list of scenarios; each scenario builds a prior and a
registry noise, picks a job kind, and sets seeds, sizes and tolerances.
Validation errors carry the scenario index and field path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .distributions import (NoiseSpec, Prior, beta_prior, binary_prior,
                            discrete_prior, gaussian_noise, gaussian_prior,
                            laplace_noise, mixture_prior, point_mass,
                            student_t_noise, uniform_noise, uniform_prior)
from .errors import ConfigError, InvalidSpecError

__all__ = ["JOB_KINDS", "ScenarioConfig", "ExperimentConfig",
           "build_prior", "build_noise", "parse_config", "load_config"]

JOB_KINDS = ("curve", "density", "normalized_density", "sweep",
             "decomposition", "mmse_dimension", "oracle")


def build_noise(cfg: dict, where: str = "noise") -> NoiseSpec:
    if not isinstance(cfg, dict) or "name" not in cfg:
        raise ConfigError(f"{where}: expected an object with a 'name' field")
    name = cfg["name"]
    try:
        if name == "gaussian":
            return gaussian_noise()
        if name == "laplace":
            return laplace_noise()
        if name == "uniform":
            return uniform_noise(float(cfg.get("half_width", 1.0)))
        if name == "student_t":
            return student_t_noise(float(cfg.get("df", 3.0)))
    except InvalidSpecError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.name: unknown registry noise {name!r}")


def build_prior(cfg: dict, where: str = "prior") -> Prior:
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError(f"{where}: expected an object with a 'kind' field")
    kind = cfg["kind"]
    try:
        if kind == "discrete":
            return discrete_prior([(float(a), float(m)) for a, m in cfg["atoms"]])
        if kind == "point":
            return point_mass(float(cfg["value"]))
        if kind == "binary":
            return binary_prior(float(cfg["p"]),
                                float(cfg.get("lo", -1.0)), float(cfg.get("hi", 1.0)))
        if kind == "gaussian":
            return gaussian_prior(float(cfg.get("mean", 0.0)), float(cfg.get("sd", 1.0)))
        if kind == "uniform":
            return uniform_prior(float(cfg["lo"]), float(cfg["hi"]))
        if kind == "beta":
            return beta_prior(float(cfg.get("a", 2.0)), float(cfg.get("b", 2.0)),
                              float(cfg.get("lo", -1.0)), float(cfg.get("hi", 1.0)))
        if kind == "mixture":
            comps = cfg["components"]
            if not isinstance(comps, list) or len(comps) != 2:
                raise ConfigError(f"{where}.components: need exactly two priors")
            return mixture_prior(build_prior(comps[0], f"{where}.components[0]"),
                                 build_prior(comps[1], f"{where}.components[1]"),
                                 float(cfg["alpha"]))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, InvalidSpecError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.kind: unknown prior kind {kind!r}")


@dataclass
class ScenarioConfig:
    name: str
    job: str
    prior: Prior
    noise: NoiseSpec
    out: str
    seed: int
    sigmas: list[float] = field(default_factory=list)
    sigma_grid: Optional[dict] = None
    n: int = 10 ** 6
    n_paths: int = 256
    grid_points: int = 512
    tolerances: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    version: int
    scenarios: list[ScenarioConfig]


def _parse_scenario(doc: dict, idx: int) -> ScenarioConfig:
    where = f"scenarios[{idx}]"
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    for key in ("name", "job"):
        if key not in doc:
            raise ConfigError(f"{where}.{key}: required field missing")
    job = doc["job"]
    if job not in JOB_KINDS:
        raise ConfigError(f"{where}.job: {job!r} not one of {JOB_KINDS}")
    prior = build_prior(doc.get("prior", {}), f"{where}.prior")
    noise = build_noise(doc.get("noise", {}), f"{where}.noise")

    sigmas: list[float] = []
    sigma_grid = None
    if job in ("sweep", "decomposition"):
        sigma_grid = doc.get("sigma_grid", {"hi": 1.0, "lo": 1e-3, "n": 40})
        for k in ("hi", "lo", "n"):
            if k not in sigma_grid:
                raise ConfigError(f"{where}.sigma_grid.{k}: required field missing")
        if not 0 < float(sigma_grid["lo"]) < float(sigma_grid["hi"]):
            raise ConfigError(f"{where}.sigma_grid: need 0 < lo < hi")
    else:
        raw_sigma = doc.get("sigma")
        if raw_sigma is None:
            raise ConfigError(f"{where}.sigma: required for job {job!r}")
        sigmas = [float(s) for s in (raw_sigma if isinstance(raw_sigma, list) else [raw_sigma])]
        if any(not (s > 0 and math.isfinite(s)) for s in sigmas):
            raise ConfigError(f"{where}.sigma: all values must be positive and finite")

    if job in ("density", "normalized_density") and prior.kind == "discrete" \
            and np.asarray(prior.locs).size < 2:
        raise ConfigError(f"{where}: density jobs need a non-degenerate prior")

    return ScenarioConfig(
        name=str(doc["name"]),
        job=job,
        prior=prior,
        noise=noise,
        out=str(doc.get("out", doc["name"])),
        seed=int(doc.get("seed", 0)),
        sigmas=sigmas,
        sigma_grid=sigma_grid,
        n=int(doc.get("n", 10 ** 6)),
        n_paths=int(doc.get("paths", 256)),
        grid_points=int(doc.get("grid_points", 512)),
        tolerances=dict(doc.get("tolerances", {})),
        raw=doc,
    )


def parse_config(doc: Any) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    if doc.get("version") != 1:
        raise ConfigError(f"version: expected 1, got {doc.get('version')!r}")
    scenarios_doc = doc.get("scenarios", [])
    if not isinstance(scenarios_doc, list):
        raise ConfigError("scenarios: expected a list")
    names = set()
    scenarios = []
    for i, sdoc in enumerate(scenarios_doc):
        sc = _parse_scenario(sdoc, i)
        if sc.name in names:
            raise ConfigError(f"scenarios[{i}].name: duplicate name {sc.name!r}")
        names.add(sc.name)
        scenarios.append(sc)
    return ExperimentConfig(version=1, scenarios=scenarios)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} line {exc.lineno}: {exc.msg}") from exc
    return parse_config(doc)
