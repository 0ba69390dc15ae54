"""Symplectic integrators for the molecular dynamics half of HMC.

Two reversible, volume-preserving schemes:

* second-order leapfrog, splitting exp(dt T/2) exp(dt V) exp(dt T/2),
  one force evaluation per step;
* second-order minimum-norm, splitting
  exp(lam dt T) exp(dt V/2) exp((1-2 lam) dt T) exp(dt V/2) exp(lam dt T),
  two force evaluations per step.

T-stages advance positions by momenta, V-stages kick momenta by the
(negative) force. The force evaluator returns dV/dh, so kicks subtract.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import PhaseState

# near-optimal error constant for the 2nd-order minimum-norm scheme
DEFAULT_LAMBDA = 0.193183327

Force = Callable[[np.ndarray], np.ndarray]


class Scheme(enum.Enum):
    LEAPFROG2 = "2lfi"
    MINIMUM_NORM2 = "2mni"

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        key = name.strip().lower()
        aliases = {
            "2lfi": cls.LEAPFROG2,
            "leapfrog": cls.LEAPFROG2,
            "leapfrog2": cls.LEAPFROG2,
            "2mni": cls.MINIMUM_NORM2,
            "minimum_norm": cls.MINIMUM_NORM2,
            "minimum_norm2": cls.MINIMUM_NORM2,
        }
        if key not in aliases:
            raise ValueError(f"unknown integrator scheme {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class TrajectoryConfig:
    scheme: Scheme
    step_size: float
    n_steps: int
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if self.step_size <= 0.0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.scheme is Scheme.MINIMUM_NORM2 and not (0.0 < self.lam < 0.5):
            raise ValueError(f"lambda must lie in (0, 0.5), got {self.lam}")

    @property
    def total_length(self) -> float:
        return self.step_size * self.n_steps

    @property
    def force_evals_per_step(self) -> int:
        return 2 if self.scheme is Scheme.MINIMUM_NORM2 else 1

    @classmethod
    def from_length(
        cls,
        scheme: Scheme,
        total_length: float,
        step_size: float,
        lam: float = DEFAULT_LAMBDA,
    ) -> "TrajectoryConfig":
        """Fix the total length exactly: n_steps = round(l / dt), dt = l / n_steps."""
        if total_length <= 0.0 or step_size <= 0.0:
            raise ValueError("total_length and step_size must be > 0")
        n_steps = max(1, round(total_length / step_size))
        return cls(scheme, total_length / n_steps, n_steps, lam)


def leapfrog_step(state: PhaseState, step_size: float, force: Force) -> PhaseState:
    """One leapfrog step: half drift, full kick, half drift."""
    if step_size <= 0.0:
        raise ValueError("step_size must be > 0")
    h = state.h + 0.5 * step_size * state.p
    p = state.p - step_size * force(h)
    h = h + 0.5 * step_size * p
    return PhaseState(h, p)


def minimum_norm_step(
    state: PhaseState, step_size: float, lam: float, force: Force
) -> PhaseState:
    """One minimum-norm step: the five-stage T-V-T-V-T splitting."""
    if step_size <= 0.0:
        raise ValueError("step_size must be > 0")
    if not (0.0 < lam < 0.5):
        raise ValueError(f"lambda must lie in (0, 0.5), got {lam}")
    h = state.h + lam * step_size * state.p
    p = state.p - 0.5 * step_size * force(h)
    h = h + (1.0 - 2.0 * lam) * step_size * p
    p = p - 0.5 * step_size * force(h)
    h = h + lam * step_size * p
    return PhaseState(h, p)


def integrate(state: PhaseState, cfg: TrajectoryConfig, force: Force) -> PhaseState:
    """Apply the configured step n_steps times and return the final state."""
    current = state
    if cfg.scheme is Scheme.LEAPFROG2:
        for _ in range(cfg.n_steps):
            current = leapfrog_step(current, cfg.step_size, force)
    else:
        for _ in range(cfg.n_steps):
            current = minimum_norm_step(current, cfg.step_size, cfg.lam, force)
    return current


@dataclass
class CountingForce:
    """Wraps a force evaluator and counts calls (cost accounting in scans/tests)."""

    force: Force
    calls: int = field(default=0)

    def __call__(self, h: np.ndarray) -> np.ndarray:
        self.calls += 1
        return self.force(h)
