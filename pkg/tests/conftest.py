"""Shared statistical helpers for the test suite."""

import math

import numpy as np


def mean_se(samples):
    """Sample mean and its standard error."""
    samples = np.asarray(samples, dtype=float)
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(samples.size))


def var_se(samples):
    """Sample variance and its (fourth-moment) standard error."""
    samples = np.asarray(samples, dtype=float)
    centred = samples - samples.mean()
    m2 = float(np.mean(centred ** 2))
    m4 = float(np.mean(centred ** 4))
    return m2, math.sqrt(max(m4 - m2 * m2, 0.0) / samples.size)


def moment_se(samples, p):
    """Sample p-th raw moment and its standard error."""
    powered = np.asarray(samples, dtype=float) ** p
    return mean_se(powered)


def ks_critical(n, m=None, alpha=0.01):
    """Asymptotic Kolmogorov-Smirnov critical value.

    One-sample when m is None, two-sample otherwise; 1.628 is the 1%
    coefficient.
    """
    coef = math.sqrt(-0.5 * math.log(alpha / 2.0))
    if m is None:
        return coef / math.sqrt(n)
    return coef * math.sqrt((n + m) / (n * m))
