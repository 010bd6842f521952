"""Run configuration for the command-line front end.

A run is described by one TOML or JSON document.  See README.md for the
grammar; :func:`load_config` parses a file into :class:`RunConfig`, and
:meth:`RunConfig.dump` writes the effective configuration (every default
resolved) as JSON, which loads back to an identical config.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from lineint.errors import ConfigurationError
from lineint.methods import gauss, hbvm, lim, trapezoidal_tableau
from lineint.systems import Benchmark, kepler, lotka_volterra, poly_hamiltonian, poly_initial_points
from lineint.types.methods import Method
from lineint.types.runs import AdaptiveSettings
from lineint.types.solvers import JacobianPolicy, SolverKind, SolverSettings

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

OutputSeries = Literal["invariants", "per_period_error", "trajectory", "step_sizes"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# ----------------------------------------------------------------------
# Problems
# ----------------------------------------------------------------------


class KeplerProblem(_Section):
    name: Literal["kepler"] = "kepler"
    eps: float = Field(default=0.6, ge=0.0, lt=1.0)

    def build(self) -> Benchmark:
        return kepler(self.eps)


class LotkaVolterraProblem(_Section):
    name: Literal["lotka_volterra"] = "lotka_volterra"
    a: float = -2.0
    b: float = -1.0
    c: float = -0.5
    nu_p: float = 1.0
    mu_p: float = 2.0

    def build(self) -> Benchmark:
        return lotka_volterra(self.a, self.b, self.c, self.nu_p, self.mu_p)


class PolyHamiltonianProblem(_Section):
    name: Literal["poly_hamiltonian"] = "poly_hamiltonian"
    alpha: float = 1.0
    beta: float = 10.0
    n: int = 4
    start: int = Field(default=1, ge=1, description="level-curve start point (i, -i)")

    def build(self) -> Benchmark:
        problem, invariants = poly_hamiltonian(self.alpha, self.beta, self.n)
        y0 = poly_initial_points(self.start)[-1]
        return Benchmark(problem, invariants, y0, float("nan"))


ProblemConfig = Annotated[
    Union[KeplerProblem, LotkaVolterraProblem, PolyHamiltonianProblem],
    Field(discriminator="name"),
]


# ----------------------------------------------------------------------
# Methods
# ----------------------------------------------------------------------


class GaussMethod(_Section):
    name: Literal["gauss"] = "gauss"
    s: int = Field(default=2, ge=1)

    def build(self) -> Method:
        return gauss(self.s)


class HBVMMethod(_Section):
    name: Literal["hbvm"] = "hbvm"
    k: int = Field(ge=1)
    s: int = Field(ge=1)

    def build(self) -> Method:
        return hbvm(self.k, self.s)


class LIMMethod(_Section):
    name: Literal["lim"] = "lim"
    r: int = Field(ge=0)
    k: int = Field(ge=1)
    s: int = Field(ge=1)

    def build(self) -> Method:
        return lim(self.r, self.k, self.s)


class TrapezoidalMethod(_Section):
    name: Literal["trapezoidal"] = "trapezoidal"
    nu: int = Field(ge=1)

    def build(self) -> Method:
        return trapezoidal_tableau(self.nu)


MethodConfig = Annotated[
    Union[GaussMethod, HBVMMethod, LIMMethod, TrapezoidalMethod],
    Field(discriminator="name"),
]


class SolverConfig(_Section):
    kind: SolverKind = "simplified_newton"
    tol: float = 1e-13
    max_outer: int = 100
    max_inner: int = 5
    jacobian_policy: JacobianPolicy = "analytic"
    reuse_jacobian: bool = False
    reuse_threshold: int = 10

    def build(self) -> SolverSettings:
        return SolverSettings(**self.model_dump())


# ----------------------------------------------------------------------
# Modes and studies
# ----------------------------------------------------------------------


class FixedMode(_Section):
    kind: Literal["fixed"] = "fixed"
    h: float = Field(gt=0)
    n_steps: int = Field(ge=0)
    sample_every: int = Field(default=1, ge=1)


class AdaptiveMode(_Section):
    kind: Literal["adaptive"] = "adaptive"
    tol: float = Field(default=1e-8, gt=0)
    t_end: float = Field(gt=0)
    safety: float = 0.85
    h_init: float = 1e-2
    h_min: float = 1e-12
    h_max: float = 1.0
    growth_cap: float = 5.0
    max_rejections: int = 20
    checkpoint_periods: bool = True

    def settings(self) -> AdaptiveSettings:
        return AdaptiveSettings(**self.model_dump(exclude={"kind", "t_end", "checkpoint_periods"}))


ModeConfig = Annotated[Union[FixedMode, AdaptiveMode], Field(discriminator="kind")]


class ConvergenceConfig(_Section):
    t_end: float = Field(default=1.0, gt=0)
    h: list[float] = Field(default_factory=lambda: [0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125])


class StabilityConfig(_Section):
    re_min: float = -10.0
    re_max: float = -1e-3
    im_min: float = -10.0
    im_max: float = 10.0
    points: int = Field(default=20, ge=1)

    def grid(self) -> np.ndarray:
        re = np.linspace(self.re_min, self.re_max, self.points)
        im = np.linspace(self.im_min, self.im_max, self.points)
        return (re[:, None] + 1j * im[None, :]).ravel()


class SymmetryConfig(_Section):
    h: list[float] = Field(default_factory=lambda: [1e-2])


class RunConfig(_Section):
    """One CLI run: problem, method, solver, mode, enforced invariants and outputs."""

    problem: ProblemConfig = Field(default_factory=KeplerProblem)
    method: MethodConfig = Field(default_factory=GaussMethod)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    mode: ModeConfig = Field(default_factory=lambda: FixedMode(h=1e-2, n_steps=100))
    enforce: list[str] | None = None
    outputs: list[OutputSeries] = Field(default_factory=lambda: ["invariants"])
    convergence: ConvergenceConfig = Field(default_factory=ConvergenceConfig)
    stability: StabilityConfig = Field(default_factory=StabilityConfig)
    symmetry: SymmetryConfig = Field(default_factory=SymmetryConfig)

    @model_validator(mode="after")
    def _unique_outputs(self) -> RunConfig:
        if len(set(self.outputs)) != len(self.outputs):
            raise ValueError("outputs lists a series twice")
        return self

    def benchmark(self) -> Benchmark:
        """Build the problem, applying the ``enforce`` mask to its invariants."""
        bench = self.problem.build()
        if self.enforce is None:
            return bench
        return bench._replace(invariants=bench.invariants.select(self.enforce))

    def dump(self, path: Path) -> None:
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")


def load_config(path: str | Path) -> RunConfig:
    """Parse a TOML (or ``.json``) run configuration.

    Raises:
        ConfigurationError: If the file cannot be read or parsed, or fails
            validation.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigurationError(f"cannot parse config {path}: {exc}") from exc
    return parse_config(data)


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid run config: {exc}") from exc
