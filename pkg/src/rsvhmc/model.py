"""Realized stochastic volatility model: data containers, energies, gradients.

The model couples a daily return y_t, a daily log realized volatility
ln RV_t, and a latent log-variance h_t:

    y_t      = exp(h_t / 2) * eps_t,          eps_t ~ N(0, 1)
    ln RV_t  = xi + h_t + u_t,                u_t   ~ N(0, sigma_u2)
    h_{t+1}  = mu + phi * (h_t - mu) + eta_t, eta_t ~ N(0, sigma_eta2)

with h_1 drawn from the stationary AR(1) distribution
N(mu, sigma_eta2 / (1 - phi^2)).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

# exp(x) overflows float64 just above x = 709; keep a little margin
_EXP_LIMIT = 700.0

_LOG_2PI = math.log(2.0 * math.pi)


class DomainError(ValueError):
    """An input drove the model density out of float64 range.

    ``index`` is the time index (0-based) of the offending term when it
    can be attributed to a single observation, else None.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class ModelParams:
    """The five model parameters (phi, mu, xi, sigma_eta2, sigma_u2)."""

    phi: float
    mu: float
    xi: float
    sigma_eta2: float
    sigma_u2: float

    def __post_init__(self):
        vals = (self.phi, self.mu, self.xi, self.sigma_eta2, self.sigma_u2)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite parameter in {vals}")
        if abs(self.phi) >= 1.0:
            raise ValueError(f"|phi| must be < 1, got {self.phi}")
        if self.sigma_eta2 <= 0.0:
            raise ValueError(f"sigma_eta2 must be > 0, got {self.sigma_eta2}")
        if self.sigma_u2 <= 0.0:
            raise ValueError(f"sigma_u2 must be > 0, got {self.sigma_u2}")

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)

    @property
    def names(self) -> tuple[str, ...]:
        return ("phi", "mu", "xi", "sigma_eta2", "sigma_u2")


@dataclass(frozen=True)
class ObservedSeries:
    """Paired daily returns and log realized volatilities."""

    y: np.ndarray
    ln_rv: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        ln_rv = np.asarray(self.ln_rv, dtype=np.float64)
        if y.ndim != 1 or ln_rv.ndim != 1:
            raise ValueError("y and ln_rv must be 1-dimensional")
        if len(y) != len(ln_rv):
            raise ValueError(f"length mismatch: {len(y)} vs {len(ln_rv)}")
        if len(y) < 1:
            raise ValueError("series must contain at least one observation")
        if not np.all(np.isfinite(y)) or not np.all(np.isfinite(ln_rv)):
            raise ValueError("series contains non-finite entries")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "ln_rv", ln_rv)

    @property
    def n(self) -> int:
        return len(self.y)


@dataclass
class PhaseState:
    """Latent path h with conjugate momenta p."""

    h: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=np.float64)
        self.p = np.asarray(self.p, dtype=np.float64)
        if self.h.shape != self.p.shape:
            raise ValueError("h and p must have the same shape")

    def copy(self) -> "PhaseState":
        return PhaseState(self.h.copy(), self.p.copy())


def _as_path(h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1 or len(h) < 1:
        raise ValueError("latent path must be a non-empty 1-d array")
    return h


def _check_exp_range(h: np.ndarray):
    # e^{-h_t} appears in the return likelihood; refuse silent overflow
    if np.any(-h > _EXP_LIMIT):
        idx = int(np.argmax(-h))
        raise DomainError(f"exp(-h[{idx}]) overflows float64 (h={h[idx]})", index=idx)


def _check_match(h: np.ndarray, data: ObservedSeries):
    if len(h) != data.n:
        raise ValueError(f"path length {len(h)} != series length {data.n}")


def potential(h, theta: ModelParams, data: ObservedSeries) -> float:
    """Negative log conditional posterior of h, up to an h-independent constant.

    V(h) = sum_t [ h_t/2 + (y_t^2/2) e^{-h_t} ]
         + sum_t (ln RV_t - xi - h_t)^2 / (2 sigma_u2)
         + (1 - phi^2)(h_1 - mu)^2 / (2 sigma_eta2)
         + sum_{t<n} (h_{t+1} - mu - phi (h_t - mu))^2 / (2 sigma_eta2)
    """
    h = _as_path(h)
    _check_match(h, data)
    _check_exp_range(h)
    obs = 0.5 * h + 0.5 * data.y**2 * np.exp(-h)
    meas = (data.ln_rv - theta.xi - h) ** 2 / (2.0 * theta.sigma_u2)
    v = float(np.sum(obs) + np.sum(meas))
    v += (1.0 - theta.phi**2) * (h[0] - theta.mu) ** 2 / (2.0 * theta.sigma_eta2)
    if len(h) > 1:
        r = h[1:] - theta.mu - theta.phi * (h[:-1] - theta.mu)
        v += float(np.sum(r**2)) / (2.0 * theta.sigma_eta2)
    if not math.isfinite(v):
        per_t = obs + meas
        bad = np.flatnonzero(~np.isfinite(per_t))
        idx = int(bad[0]) if len(bad) else None
        raise DomainError("potential is non-finite", index=idx)
    return v


def grad_potential(h, theta: ModelParams, data: ObservedSeries) -> np.ndarray:
    """Componentwise derivative dV/dh_t of :func:`potential`."""
    h = _as_path(h)
    _check_match(h, data)
    _check_exp_range(h)
    se2 = theta.sigma_eta2
    g = 0.5 - 0.5 * data.y**2 * np.exp(-h) - (data.ln_rv - theta.xi - h) / theta.sigma_u2
    g[0] += (1.0 - theta.phi**2) * (h[0] - theta.mu) / se2
    if len(h) > 1:
        r = h[1:] - theta.mu - theta.phi * (h[:-1] - theta.mu)
        g[1:] += r / se2
        g[:-1] -= theta.phi * r / se2
    if not np.all(np.isfinite(g)):
        idx = int(np.flatnonzero(~np.isfinite(g))[0])
        raise DomainError("gradient is non-finite", index=idx)
    return g


def kinetic(p) -> float:
    p = np.asarray(p, dtype=np.float64)
    return 0.5 * float(np.sum(p**2))


def hamiltonian(state: PhaseState, theta: ModelParams, data: ObservedSeries) -> float:
    """H(p, h) = (1/2) sum p_i^2 + V(h)."""
    return kinetic(state.p) + potential(state.h, theta, data)


def joint_log_density(h, theta: ModelParams, data: ObservedSeries) -> float:
    """Exact log joint density of (y, ln RV, h), all constants included.

    This is the fully normalized counterpart of ``-potential``; it is used
    by sampler validation, never in the HMC hot loop.
    """
    h = _as_path(h)
    _check_match(h, data)
    _check_exp_range(h)
    n = len(h)
    se2, su2 = theta.sigma_eta2, theta.sigma_u2
    # returns: y_t ~ N(0, e^{h_t})
    lp = -0.5 * n * _LOG_2PI - 0.5 * float(np.sum(h)) - 0.5 * float(
        np.sum(data.y**2 * np.exp(-h))
    )
    # measurement: ln RV_t ~ N(xi + h_t, sigma_u2)
    lp += -0.5 * n * (_LOG_2PI + math.log(su2)) - float(
        np.sum((data.ln_rv - theta.xi - h) ** 2)
    ) / (2.0 * su2)
    # stationary h_1 ~ N(mu, sigma_eta2 / (1 - phi^2))
    var1 = se2 / (1.0 - theta.phi**2)
    lp += -0.5 * (_LOG_2PI + math.log(var1)) - (h[0] - theta.mu) ** 2 / (2.0 * var1)
    # transitions h_{t+1} ~ N(mu + phi (h_t - mu), sigma_eta2)
    if n > 1:
        r = h[1:] - theta.mu - theta.phi * (h[:-1] - theta.mu)
        lp += -0.5 * (n - 1) * (_LOG_2PI + math.log(se2)) - float(np.sum(r**2)) / (
            2.0 * se2
        )
    if not math.isfinite(lp):
        raise DomainError("joint log density is non-finite")
    return lp
