"""Post-processing of energy estimates: Trotter extrapolation and outlier filtering."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import InsufficientPoints, InsufficientSamples, SingularDesign

HARTREE_TO_EV = 27.211386245988
CHEMICAL_ACCURACY = 1e-3
EXCLUSION_REASONS = ("none", "large_trotter_error", "excited_state", "user")


@dataclass(frozen=True)
class SweepPoint:
    trotter_number: int
    energy: float
    sigma: float
    reason: str = "none"

    @property
    def excluded(self) -> bool:
        return self.reason != "none"


@dataclass(frozen=True)
class FitResult:
    e0: float
    m: float
    sigma_e0: float
    sigma_m: float
    covariance: np.ndarray
    n_points_used: int
    chi2: float

    @property
    def dof(self) -> int:
        return self.n_points_used - 2

    @property
    def r_star(self) -> int:
        return chemical_accuracy_trotter_number(self.m)


def _design(points: Sequence[SweepPoint]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = np.array([p.trotter_number for p in points], dtype=float)
    a = np.column_stack([np.ones_like(r), 1.0 / r**2])
    y = np.array([p.energy for p in points])
    return a, y, r


def fit_inverse_square(points: Sequence[SweepPoint]) -> FitResult:
    """Weighted least squares for ``E = E0 + m / r^2`` over non-excluded points.

    Weights are ``1 / sigma^2`` and the covariance is ``(A^T W A)^-1`` with the
    sigmas taken as known. With exactly two points the fit interpolates and
    the reported sigmas are infinite.
    """
    used = [p for p in points if not p.excluded]
    if len(used) < 2:
        raise InsufficientPoints(f"need at least 2 usable points, got {len(used)}")
    if len({p.trotter_number for p in used}) < 2:
        raise SingularDesign("all usable points share one Trotter number")
    if any(not p.sigma > 0 for p in used):
        raise ValueError("every fitted point needs sigma > 0")
    a, y, _ = _design(used)
    w = np.array([1.0 / p.sigma**2 for p in used])
    normal = a.T @ (w[:, None] * a)
    rhs = a.T @ (w * y)
    try:
        cov = np.linalg.inv(normal)
    except np.linalg.LinAlgError:
        raise SingularDesign("normal equations are singular") from None
    beta = np.linalg.solve(normal, rhs)
    resid = y - a @ beta
    chi2 = float(np.sum(w * resid**2))
    if len(used) == 2:
        sig = (math.inf, math.inf)
    else:
        sig = (math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1]))
    return FitResult(
        e0=float(beta[0]),
        m=float(beta[1]),
        sigma_e0=sig[0],
        sigma_m=sig[1],
        covariance=cov,
        n_points_used=len(used),
        chi2=chi2,
    )


def _unweighted_slope(points: Sequence[SweepPoint]) -> float | None:
    if len(points) < 2 or len({p.trotter_number for p in points}) < 2:
        return None
    a, y, _ = _design(points)
    beta, *_ = np.linalg.lstsq(a, y, rcond=None)
    return float(beta[1])


def apply_exclusion_rules(
    points: Sequence[SweepPoint],
    ground_energy_hint: float | None = None,
    trotter_error_cap: float | None = None,
    gap_threshold: float | None = None,
) -> list[SweepPoint]:
    """Flag excited-state hits and points dominated by Trotter error.

    A point is an excited-state hit when it lies more than ``gap_threshold``
    above or below the hint (default: ten times the point's sigma). Trotter
    error is judged from an unweighted preliminary fit of the remaining
    points: ``|m| / r^2 > trotter_error_cap`` excludes the point. Points
    already flagged keep their reason.
    """
    out = list(points)
    if ground_energy_hint is not None:
        for i, p in enumerate(out):
            gap = gap_threshold if gap_threshold is not None else 10.0 * p.sigma
            if not p.excluded and abs(p.energy - ground_energy_hint) > gap:
                out[i] = replace(p, reason="excited_state")
    if trotter_error_cap is not None:
        slope = _unweighted_slope([p for p in out if not p.excluded])
        if slope is not None:
            for i, p in enumerate(out):
                if not p.excluded and abs(slope) / p.trotter_number**2 > trotter_error_cap:
                    out[i] = replace(p, reason="large_trotter_error")
    return out


def chemical_accuracy_trotter_number(m: float, accuracy: float = CHEMICAL_ACCURACY) -> int:
    """Smallest ``r >= 1`` with ``|m| / r^2 <= accuracy``."""
    m = abs(m)
    r = max(1, math.ceil(math.sqrt(m / accuracy)))
    # correct floating-point misses on either side
    while r > 1 and m / (r - 1) ** 2 <= accuracy:
        r -= 1
    while m / r**2 > accuracy:
        r += 1
    return r


def grubbs_critical(n: int, alpha: float = 0.05) -> float:
    """Two-sided Grubbs critical value for ``n`` samples."""
    if n < 3:
        raise InsufficientSamples("Grubbs test needs at least 3 samples")
    t = stats.t.ppf(1 - alpha / (2 * n), n - 2)
    return (n - 1) / math.sqrt(n) * math.sqrt(t * t / (n - 2 + t * t))


def grubbs_filter(samples: Sequence[float], alpha: float = 0.05) -> tuple[list[float], list[float]]:
    """Iteratively drop the most extreme sample while it fails the Grubbs test.

    Returns ``(kept, removed)``; ``kept`` preserves input order.
    """
    kept = [float(x) for x in samples]
    if len(kept) < 3:
        raise InsufficientSamples(f"Grubbs test needs at least 3 samples, got {len(kept)}")
    removed: list[float] = []
    while len(kept) > 2:
        x = np.asarray(kept)
        s = x.std(ddof=1)
        if s == 0:
            break
        dev = np.abs(x - x.mean())
        i = int(np.argmax(dev))
        if dev[i] / s <= grubbs_critical(len(kept), alpha):
            break
        removed.append(kept.pop(i))
    return kept, removed


@dataclass(frozen=True)
class EnergyDifference:
    delta_ev: float
    sigma_ev: float
    kept_a: int
    kept_b: int


def energy_difference_report(
    samples_a: Sequence[float], samples_b: Sequence[float], alpha: float = 0.05
) -> EnergyDifference:
    """Difference of Grubbs-filtered means in eV, errors added in quadrature."""
    a, _ = grubbs_filter(samples_a, alpha)
    b, _ = grubbs_filter(samples_b, alpha)
    diff = (np.mean(a) - np.mean(b)) * HARTREE_TO_EV
    var = np.var(a, ddof=1) / len(a) + np.var(b, ddof=1) / len(b)
    return EnergyDifference(float(diff), float(math.sqrt(var) * HARTREE_TO_EV), len(a), len(b))


def fit_report_csv(fit: FitResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["e0", "sigma_e0", "m", "sigma_m", "r_star", "n_used"])
    w.writerow([repr(fit.e0), repr(fit.sigma_e0), repr(fit.m), repr(fit.sigma_m), fit.r_star, fit.n_points_used])
    return buf.getvalue()


def sweep_csv(points: Sequence[SweepPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "energy", "sigma", "excluded", "reason"])
    for p in points:
        w.writerow([p.trotter_number, repr(p.energy), repr(p.sigma), int(p.excluded), p.reason])
    return buf.getvalue()
