"""Small statistics helpers: binomial intervals, autocorrelation, fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def wilson_interval(successes: float, n: float, z: float = 1.959964
                    ) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    n may be a non-integer effective sample size; successes likewise.
    """
    if n <= 0:
        return 0.0, 1.0
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


def autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of a 1-d series via FFT."""
    x = np.asarray(x, dtype=float)
    n = x.size
    xc = x - x.mean()
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:n].real
    return acov / n


def integrated_autocorr_time(x: np.ndarray) -> float:
    """Integrated autocorrelation time with Geyer's initial-positive-sequence
    truncation; returns 1.0 for uncorrelated or constant series."""
    x = np.asarray(x, dtype=float)
    if x.size < 4 or np.allclose(x, x[0]):
        return 1.0
    acov = autocovariance(x)
    if acov[0] <= 0:
        return 1.0
    rho = acov / acov[0]
    # sum consecutive pairs until one goes nonpositive
    tau = 1.0
    for k in range(1, (x.size - 1) // 2):
        pair = rho[2 * k - 1] + rho[2 * k]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(max(tau, 1.0))


def effective_sample_size(x: np.ndarray) -> float:
    return x.size / integrated_autocorr_time(x)


def pooled_ess(series: list[np.ndarray]) -> float:
    """Effective sample size summed over independent chains."""
    return float(sum(effective_sample_size(s) for s in series))


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    stderr: float
    r_squared: float

    def as_dict(self):
        return {"slope": self.slope, "intercept": self.intercept,
                "stderr": self.stderr, "r_squared": self.r_squared}


def least_squares_line(x: np.ndarray, y: np.ndarray) -> LineFit:
    """Ordinary least squares y = a x + b with the slope's standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValueError("need at least 3 points for a slope with error")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = x.size - 2
    sxx = np.sum((x - x.mean()) ** 2)
    stderr = float(np.sqrt(np.sum(resid ** 2) / dof / sxx)) if dof > 0 else np.inf
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid ** 2) / ss_tot) if ss_tot > 0 else 1.0
    return LineFit(slope=float(slope), intercept=float(intercept),
                   stderr=max(stderr, np.finfo(float).tiny), r_squared=r2)
