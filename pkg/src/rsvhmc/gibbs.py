"""Full-conditional samplers for the five model parameters.

Conventions:
* flat (improper) priors for mu and xi by default, with optional Gaussian
  priors for validation runs that need proper priors;
* flat prior on (-1, 1) for phi;
* inverse-gamma priors for both variances.

phi is updated by Metropolis-Hastings within Gibbs: the AR-regression
Gaussian proposal absorbs the transition quadratic exactly, leaving only
the stationary-distribution factor sqrt(1 - phi^2) exp(...) in the
acceptance ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, ObservedSeries


@dataclass(frozen=True)
class PriorConfig:
    """Prior hyperparameters for the parameter sweep.

    ``mu_prior`` / ``xi_prior`` are (mean, variance) tuples for Gaussian
    priors, or None for the flat prior.
    """

    a_eta: float = 2.5
    b_eta: float = 0.025
    a_u: float = 2.5
    b_u: float = 0.025
    mu_prior: tuple[float, float] | None = None
    xi_prior: tuple[float, float] | None = None

    def __post_init__(self):
        for name in ("a_eta", "b_eta", "a_u", "b_u"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")
        for name in ("mu_prior", "xi_prior"):
            pr = getattr(self, name)
            if pr is not None and pr[1] <= 0.0:
                raise ValueError(f"{name} variance must be > 0")


def _inverse_gamma(shape: float, scale: float, rng: np.random.Generator) -> float:
    return scale / rng.gamma(shape)


def _posterior_normal(
    like_mean: float,
    like_var: float,
    prior: tuple[float, float] | None,
    rng: np.random.Generator,
) -> float:
    if prior is None:
        return rng.normal(like_mean, math.sqrt(like_var))
    m0, v0 = prior
    prec = 1.0 / like_var + 1.0 / v0
    mean = (like_mean / like_var + m0 / v0) / prec
    return rng.normal(mean, math.sqrt(1.0 / prec))


def sample_xi(
    h: np.ndarray,
    theta: ModelParams,
    data: ObservedSeries,
    rng: np.random.Generator,
    prior: tuple[float, float] | None = None,
) -> float:
    """xi | rest ~ N(mean(ln RV - h), sigma_u2 / n) under the flat prior."""
    n = data.n
    resid_mean = float(np.mean(data.ln_rv - h))
    return _posterior_normal(resid_mean, theta.sigma_u2 / n, prior, rng)


def sigma_u2_conditional(
    h: np.ndarray, theta: ModelParams, data: ObservedSeries, prior: PriorConfig
) -> tuple[float, float]:
    """(shape, scale) of the inverse-gamma conditional for sigma_u2."""
    resid = data.ln_rv - theta.xi - h
    shape = data.n / 2.0 + prior.a_u
    scale = prior.b_u + 0.5 * float(np.sum(resid**2))
    return shape, scale


def sample_sigma_u2(
    h: np.ndarray,
    theta: ModelParams,
    data: ObservedSeries,
    prior: PriorConfig,
    rng: np.random.Generator,
) -> float:
    shape, scale = sigma_u2_conditional(h, theta, data, prior)
    return _inverse_gamma(shape, scale, rng)


def sigma_eta2_conditional(
    h: np.ndarray, theta: ModelParams, prior: PriorConfig
) -> tuple[float, float]:
    """(shape, scale) of the inverse-gamma conditional for sigma_eta2."""
    n = len(h)
    ss = (1.0 - theta.phi**2) * (h[0] - theta.mu) ** 2
    if n > 1:
        r = h[1:] - theta.mu - theta.phi * (h[:-1] - theta.mu)
        ss += float(np.sum(r**2))
    return n / 2.0 + prior.a_eta, prior.b_eta + 0.5 * ss


def sample_sigma_eta2(
    h: np.ndarray,
    theta: ModelParams,
    prior: PriorConfig,
    rng: np.random.Generator,
) -> float:
    shape, scale = sigma_eta2_conditional(h, theta, prior)
    return _inverse_gamma(shape, scale, rng)


def mu_conditional(h: np.ndarray, theta: ModelParams) -> tuple[float, float]:
    """Flat-prior conditional mu | rest ~ N(m, sigma_eta2 / A); returns (m, A)."""
    n = len(h)
    phi = theta.phi
    a = (1.0 - phi**2) + (n - 1) * (1.0 - phi) ** 2
    m = (1.0 - phi**2) * h[0]
    if n > 1:
        m += (1.0 - phi) * float(np.sum(h[1:] - phi * h[:-1]))
    return m / a, a


def sample_mu(
    h: np.ndarray,
    theta: ModelParams,
    rng: np.random.Generator,
    prior: tuple[float, float] | None = None,
) -> float:
    m, a = mu_conditional(h, theta)
    return _posterior_normal(m, theta.sigma_eta2 / a, prior, rng)


def _stationary_factor_log(phi: float, h1: float, mu: float, se2: float) -> float:
    # log g(phi): the part of the conditional not captured by the AR proposal
    return 0.5 * math.log(1.0 - phi**2) - (1.0 - phi**2) * (h1 - mu) ** 2 / (2.0 * se2)


def sample_phi(
    h: np.ndarray,
    theta: ModelParams,
    rng: np.random.Generator,
) -> float:
    """One MH-within-Gibbs update of phi; returns the new (or retained) value."""
    mu, se2 = theta.mu, theta.sigma_eta2
    d = h - mu
    denom = float(np.sum(d[:-1] ** 2))
    if denom <= 0.0:
        # degenerate path: fall back to an independence uniform proposal
        prop = rng.uniform(-1.0, 1.0)
        log_ratio = _log_phi_conditional(prop, h, mu, se2) - _log_phi_conditional(
            theta.phi, h, mu, se2
        )
        if math.log(rng.uniform()) < log_ratio:
            return prop
        return theta.phi
    phi_hat = float(np.sum(d[1:] * d[:-1])) / denom
    s = math.sqrt(se2 / denom)
    prop = rng.normal(phi_hat, s)
    if abs(prop) >= 1.0:
        return theta.phi
    log_ratio = _stationary_factor_log(prop, h[0], mu, se2) - _stationary_factor_log(
        theta.phi, h[0], mu, se2
    )
    if log_ratio >= 0.0 or math.log(rng.uniform()) < log_ratio:
        return prop
    return theta.phi


def _log_phi_conditional(phi: float, h: np.ndarray, mu: float, se2: float) -> float:
    """Unnormalized log full conditional of phi on (-1, 1)."""
    if abs(phi) >= 1.0:
        return -math.inf
    r = h[1:] - mu - phi * (h[:-1] - mu)
    quad = (1.0 - phi**2) * (h[0] - mu) ** 2 + float(np.sum(r**2))
    return 0.5 * math.log(1.0 - phi**2) - quad / (2.0 * se2)


def gibbs_sweep(
    h: np.ndarray,
    theta: ModelParams,
    data: ObservedSeries,
    prior: PriorConfig,
    rng: np.random.Generator,
) -> ModelParams:
    """One full parameter sweep in the fixed order phi, mu, xi, sigma_eta2, sigma_u2."""
    theta = theta.replace(phi=sample_phi(h, theta, rng))
    theta = theta.replace(mu=sample_mu(h, theta, rng, prior.mu_prior))
    theta = theta.replace(xi=sample_xi(h, theta, data, rng, prior.xi_prior))
    theta = theta.replace(sigma_eta2=sample_sigma_eta2(h, theta, prior, rng))
    theta = theta.replace(sigma_u2=sample_sigma_u2(h, theta, data, prior, rng))
    return theta
