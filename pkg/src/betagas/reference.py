"""Closed-form reference solutions for the two classical confinement cases.

Used as independent oracles: the quadratic confinement V(x) = x^2 has the
semicircle solution on [-sqrt(2), sqrt(2)], and zero confinement on [-1, 1]
has the arcsine solution with hard edges.
"""
from __future__ import annotations

import numpy as np

SEMICIRCLE_EDGE = np.sqrt(2.0)
SEMICIRCLE_CONSTANT = -(1.0 + np.log(2.0))
ARCSINE_CONSTANT = -2.0 * np.log(2.0)


def semicircle_density(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) < SEMICIRCLE_EDGE,
                    np.sqrt(np.maximum(2.0 - x * x, 0.0)) / np.pi, 0.0)


def semicircle_cdf(x):
    x = np.asarray(x, dtype=float)
    t = np.clip(x / SEMICIRCLE_EDGE, -1.0, 1.0)
    return 0.5 + (t * np.sqrt(1.0 - t * t) + np.arcsin(t)) / np.pi


def semicircle_log_potential(x):
    """integral of log|x-s| against the semicircle on [-sqrt2, sqrt2]."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    inside = ax <= SEMICIRCLE_EDGE
    out = np.empty(x.shape)
    out[inside] = 0.5 * x[inside] ** 2 - 0.5 - 0.5 * np.log(2.0)
    xo = ax[~inside]
    root = np.sqrt(xo * xo - 2.0)
    out[~inside] = (0.5 * xo * xo - 0.5 - 0.5 * np.log(2.0)
                    - 0.5 * xo * root + np.log((xo + root) / np.sqrt(2.0)))
    return out


def semicircle_stieltjes(x):
    """per-particle limit of sum 1/(x - lambda) for |x| > sqrt(2)."""
    x = np.asarray(x, dtype=float)
    return x - np.sign(x) * np.sqrt(x * x - 2.0)


def quadratic_escape_cost(x):
    """V(x)=x^2 landscape: zero on the support, x*sqrt(x^2-2) -
    2*log((|x|+sqrt(x^2-2))/sqrt(2)) outside."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.zeros(x.shape)
    o = ax > SEMICIRCLE_EDGE
    root = np.sqrt(ax[o] ** 2 - 2.0)
    out[o] = ax[o] * root - 2.0 * np.log((ax[o] + root) / np.sqrt(2.0))
    return out


def arcsine_density(x):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    out = np.zeros(x.shape)
    out[inside] = 1.0 / (np.pi * np.sqrt(1.0 - x[inside] ** 2))
    return out


def arcsine_cdf(x):
    x = np.asarray(x, dtype=float)
    t = np.clip(x, -1.0, 1.0)
    return 0.5 + np.arcsin(t) / np.pi


def arcsine_log_potential(x):
    """integral of log|x-s| against the arcsine law on [-1, 1]: the constant
    -log 2 on the interval, log((|x|+sqrt(x^2-1))/2) outside."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.full(x.shape, -np.log(2.0))
    o = ax > 1.0
    out[o] = np.log((ax[o] + np.sqrt(ax[o] ** 2 - 1.0)) / 2.0)
    return out
