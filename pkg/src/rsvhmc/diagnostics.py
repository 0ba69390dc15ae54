"""Chain analysis: autocorrelation, integrated autocorrelation time,
posterior summaries, delta-H statistics, and the step-size efficiency scan."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gibbs import PriorConfig
from .hmc import default_init, hmc_update, run_chain
from .integrators import Scheme, TrajectoryConfig
from .model import ModelParams, ObservedSeries


class DegenerateSeriesError(ValueError):
    """Series has zero variance; autocorrelation is undefined."""


@dataclass(frozen=True)
class ActEstimate:
    two_tau_int: float
    error: float
    window: int


@dataclass(frozen=True)
class ScanRow:
    step_size: float
    n_steps: int
    acceptance: float
    rms_dh: float
    efficiency: float  # acceptance * step_size


@dataclass(frozen=True)
class ScanResult:
    rows: tuple[ScanRow, ...]
    optimum: ScanRow
    force_evals_per_step: int
    warnings: tuple[str, ...] = ()

    @property
    def cost_normalized_optimum(self) -> float:
        return self.optimum.efficiency / self.force_evals_per_step


def acf(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelation function at lags 0..max_lag.

    C(t) = (1/(N-t)) sum_i (x_i - xbar)(x_{i+t} - xbar), normalized by C(0).
    """
    x = np.asarray(series, dtype=np.float64)
    n = len(x)
    if max_lag < 1 or n <= max_lag:
        raise ValueError(f"need len(series) > max_lag >= 1, got {n}, {max_lag}")
    d = x - np.mean(x)
    c0 = float(np.mean(d * d))
    if c0 <= 0.0:
        raise DegenerateSeriesError("series has zero variance")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for t in range(1, max_lag + 1):
        out[t] = float(np.mean(d[: n - t] * d[t:])) / c0
    return out


def integrated_act(series, window_factor: float = 5.0, n_bins: int = 20) -> ActEstimate:
    """Integrated autocorrelation time 2*tau_int = 1 + 2 sum_{t<=W} ACF(t).

    The window W is the smallest lag with W >= window_factor * running
    estimate; the error is a jackknife over n_bins leave-one-bin-out
    re-estimates at the same window.
    """
    x = np.asarray(series, dtype=np.float64)
    n = len(x)
    if n < 100:
        raise ValueError(f"need at least 100 samples, got {n}")
    max_lag = n // 2
    rho = acf(x, max_lag)
    running = 1.0
    window = None
    for t in range(1, max_lag + 1):
        running += 2.0 * rho[t]
        if t >= window_factor * running:
            window = t
            break
    if window is None:
        raise ValueError(
            f"no self-consistent window up to lag {max_lag}; series too short "
            "for its correlation length"
        )
    estimate = 1.0 + 2.0 * float(np.sum(rho[1 : window + 1]))

    bin_len = n // n_bins
    if bin_len < window:
        raise ValueError(
            f"bin length {bin_len} shorter than window {window}; "
            "series too short for a jackknife error"
        )
    replicates = []
    for b in range(n_bins):
        keep = np.concatenate([x[: b * bin_len], x[(b + 1) * bin_len :]])
        replicates.append(_act_at_window(keep, window))
    reps = np.array(replicates)
    err = math.sqrt((n_bins - 1) / n_bins * float(np.sum((reps - np.mean(reps)) ** 2)))
    return ActEstimate(two_tau_int=estimate, error=err, window=window)


def _act_at_window(x: np.ndarray, window: int) -> float:
    rho = acf(x, window)
    return 1.0 + 2.0 * float(np.sum(rho[1:]))


def rms_dh(dh_samples) -> float:
    """Root mean square of the Hamiltonian violations."""
    dh = np.asarray(dh_samples, dtype=np.float64)
    if len(dh) == 0:
        raise ValueError("need at least one sample")
    return math.sqrt(float(np.mean(dh**2)))


@dataclass(frozen=True)
class ParamSummary:
    name: str
    mean: float
    sd: float
    act: ActEstimate | None
    note: str = ""


def posterior_summary(columns: dict[str, np.ndarray], min_samples: int = 1000) -> list[ParamSummary]:
    """Mean, standard deviation (n-1 denominator) and ACT per chain column."""
    out = []
    for name, col in columns.items():
        col = np.asarray(col, dtype=np.float64)
        if len(col) < min_samples:
            raise ValueError(f"column {name}: need >= {min_samples} samples")
        mean = float(np.mean(col))
        sd = float(np.std(col, ddof=1))
        try:
            act = integrated_act(col)
            note = ""
        except DegenerateSeriesError:
            act, note = None, "degenerate column"
        except ValueError as exc:
            act, note = None, str(exc)
        out.append(ParamSummary(name=name, mean=mean, sd=sd, act=act, note=note))
    return out


def stepsize_scan(
    data: ObservedSeries,
    theta: ModelParams,
    scheme: Scheme,
    grid,
    total_length: float = 2.0,
    n_traj: int = 2000,
    n_warm: int = 500,
    seed: int = 0,
    h0: np.ndarray | None = None,
    lam: float | None = None,
    update_params: bool = False,
    prior: PriorConfig | None = None,
) -> ScanResult:
    """Acceptance, RMS delta-H and efficiency over a grid of step sizes.

    Each grid point runs ``n_warm`` discarded trajectories followed by
    ``n_traj`` measured ones, at fixed theta by default. The latent path
    carries over between grid points so later points start equilibrated.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("grid must be non-empty")
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    rng = np.random.default_rng(seed)
    if h0 is None:
        _, h = default_init(data)
    else:
        h = np.asarray(h0, dtype=np.float64).copy()
    if prior is None:
        prior = PriorConfig()

    rows = []
    warnings = []
    evals_per_step = 2 if scheme is Scheme.MINIMUM_NORM2 else 1
    for dt in grid:
        kwargs = {} if lam is None else {"lam": lam}
        cfg = TrajectoryConfig.from_length(scheme, total_length, dt, **kwargs)
        # short pre-warm at a fifth of the step size: a rough starting path can
        # have uniformly large delta-H at the target step, stalling the warm-up
        pre_cfg = TrajectoryConfig(scheme, cfg.step_size / 5.0, cfg.n_steps, cfg.lam)
        for _ in range(min(100, n_warm)):
            h = hmc_update(h, theta, data, pre_cfg, rng).h_new
        for _ in range(n_warm):
            h = hmc_update(h, theta, data, cfg, rng).h_new
        dh = np.empty(n_traj)
        acc = np.empty(n_traj, dtype=bool)
        for i in range(n_traj):
            out = hmc_update(h, theta, data, cfg, rng)
            h = out.h_new
            dh[i] = out.delta_h
            acc[i] = out.accepted
        p = float(np.mean(acc))
        finite = dh[np.isfinite(dh)]
        if len(finite) < len(dh):
            warnings.append(
                f"step_size={cfg.step_size:.6g}: {len(dh) - len(finite)} "
                "trajectories left float64 range (counted as rejections)"
            )
        rows.append(
            ScanRow(
                step_size=cfg.step_size,
                n_steps=cfg.n_steps,
                acceptance=p,
                rms_dh=rms_dh(finite) if len(finite) else math.inf,
                efficiency=p * cfg.step_size,
            )
        )
        warn = _acceptance_trend_warning(acc, cfg.step_size)
        if warn:
            warnings.append(warn)
    optimum = max(rows, key=lambda r: r.efficiency)
    return ScanResult(
        rows=tuple(rows),
        optimum=optimum,
        force_evals_per_step=evals_per_step,
        warnings=tuple(warnings),
    )


def _acceptance_trend_warning(acc: np.ndarray, step_size: float) -> str | None:
    """Flag a drifting acceptance rate (sign of unfinished warm-up)."""
    m = len(acc) // 2
    if m < 50:
        return None
    p1, p2 = float(np.mean(acc[:m])), float(np.mean(acc[m:]))
    p = (p1 + p2) / 2.0
    se = math.sqrt(max(p * (1.0 - p), 1e-12) * 2.0 / m)
    if abs(p1 - p2) > 4.0 * se:
        return (
            f"step_size={step_size:.6g}: acceptance drifted from {p1:.3f} to "
            f"{p2:.3f}; warm-up may be insufficient"
        )
    return None
