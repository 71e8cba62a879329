"""Curated experiment scenarios used by the CLI, calibration and acceptance.

One list per experiment family: invertible density scenarios (closed-form
cross-checks and the Monte-Carlo closure), the four limit-table sweep rows,
the mixture decomposition cases, and the limiting-second-moment targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .distributions import (NoiseSpec, Prior, beta_prior, binary_prior,
                            discrete_prior, gaussian_noise, gaussian_prior,
                            mixture_prior, point_mass, student_t_noise,
                            uniform_prior)

__all__ = [
    "DensityScenario",
    "SweepScenario",
    "DecompositionScenario",
    "SecondMomentScenario",
    "density_scenarios",
    "table1_scenarios",
    "decomposition_scenarios",
    "second_moment_scenarios",
]


@dataclass(frozen=True)
class DensityScenario:
    key: str
    prior: Prior
    noise: NoiseSpec
    sigma: float
    seed: int
    closed_form: Optional[str] = None  # "gaussian" | ("binary", p)
    p: Optional[float] = None


@dataclass(frozen=True)
class SweepScenario:
    key: str
    prior: Prior
    noise: NoiseSpec
    row: str
    base_seed: int
    n_paths: int = 256


@dataclass(frozen=True)
class DecompositionScenario:
    key: str
    prior: Prior
    noise: NoiseSpec
    base_seed: int
    n_paths: int = 256
    separated: bool = True  # mutually singular components


@dataclass(frozen=True)
class SecondMomentScenario:
    key: str
    prior: Prior
    noise: NoiseSpec
    sigma: float
    alpha: float  # continuous-component weight
    seed: int

    @property
    def target(self) -> float:
        return self.alpha * self.noise.variance


def density_scenarios() -> list[DensityScenario]:
    g = gaussian_noise()
    return [
        DensityScenario("gauss_gauss_s1", gaussian_prior(), g, 1.0, 211,
                        closed_form="gaussian"),
        DensityScenario("binary_half_s1", binary_prior(0.5), g, 1.0, 212,
                        closed_form="binary", p=0.5),
        DensityScenario("binary_half_s04", binary_prior(0.5), g, 0.4, 213,
                        closed_form="binary", p=0.5),
        DensityScenario("binary_p03_s04", binary_prior(0.3), g, 0.4, 214,
                        closed_form="binary", p=0.3),
        DensityScenario("binary_p03_s1", binary_prior(0.3), g, 1.0, 215,
                        closed_form="binary", p=0.3),
        DensityScenario("uniform01_gauss_s05", uniform_prior(0.0, 1.0), g, 0.5, 216),
        DensityScenario("beta22_gauss_s05", beta_prior(2.0, 2.0, -1.0, 1.0), g, 0.5, 217),
    ]


def table1_scenarios() -> list[SweepScenario]:
    g = gaussian_noise()
    return [
        SweepScenario("discrete_binary_gaussian", binary_prior(0.5), g,
                      row="discrete", base_seed=1100),
        SweepScenario("bounded_continuous_gaussian", gaussian_prior(), g,
                      row="bounded_continuous", base_seed=2200),
        SweepScenario("abs_continuous_student_t", uniform_prior(0.0, 1.0),
                      student_t_noise(3.0), row="abs_continuous_heavy_noise",
                      base_seed=3300),
        SweepScenario("mixture_atom_uniform_gaussian",
                      mixture_prior(point_mass(0.0), uniform_prior(2.0, 3.0), 0.5),
                      g, row="mixture", base_seed=4400),
    ]


def decomposition_scenarios() -> list[DecompositionScenario]:
    g = gaussian_noise()
    return [
        DecompositionScenario("sep_atoms_uniform56",
                              mixture_prior(discrete_prior([(-1.0, 0.5), (1.0, 0.5)]),
                                            uniform_prior(5.0, 6.0), 0.5),
                              g, base_seed=5500),
        DecompositionScenario("sep_atom0_uniform23",
                              mixture_prior(point_mass(0.0), uniform_prior(2.0, 3.0), 0.5),
                              g, base_seed=6600),
        DecompositionScenario("nested_uniform01_uniform02",
                              mixture_prior(uniform_prior(0.0, 1.0),
                                            uniform_prior(0.0, 2.0), 0.5),
                              g, base_seed=7700, separated=False),
    ]


def second_moment_scenarios() -> list[SecondMomentScenario]:
    g = gaussian_noise()
    return [
        SecondMomentScenario("alpha0_binary", binary_prior(0.5), g, 1e-2,
                             alpha=0.0, seed=810),
        SecondMomentScenario("alpha05_mixture",
                             mixture_prior(point_mass(0.0), uniform_prior(2.0, 3.0), 0.5),
                             g, 1e-2, alpha=0.5, seed=811),
        SecondMomentScenario("alpha1_gaussian", gaussian_prior(), g, 1e-2,
                             alpha=1.0, seed=812),
    ]
