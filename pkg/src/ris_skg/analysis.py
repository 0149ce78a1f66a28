"""Closed-form performance expressions for the correlation-only design.

These functions quantify, without running any solver, what the design that
uses only channel statistics achieves: bounds on the combiner gain over the
exponential-correlation planar array, the legitimate effective gain, and
each eavesdropper's leakage term.
"""

from __future__ import annotations

import numpy as np

from .kgr_core import kgr_from_summary


def _factor_lower(n, rho):
    """Rayleigh-quotient lower bound on the top eigenvalue of one
    exponential-correlation factor (the all-ones direction)."""
    if rho == 0.0:
        return 1.0
    return (n * (1.0 - rho ** 2) - 2.0 * rho * (1.0 - rho ** n)) \
        / (n * (1.0 - rho) ** 2)


def _factor_upper(n, rho):
    """Row-sum (Gershgorin) upper bound on the same top eigenvalue."""
    if rho == 0.0:
        return 1.0
    return (1.0 + rho) * (1.0 - rho ** n) / (1.0 - rho)


def bs_gain_bounds(shape, rho, power):
    """Closed-form bracket (lower, upper) for the full-power combiner gain
    power * lam_max of the planar-array correlation.

    Both bounds factor over the horizontal/vertical dimensions and are
    exact at rho = 0; at rho = 1 the correlation is all-ones and both
    collapse to the exact value power * M.
    """
    n_h, n_v = int(shape[0]), int(shape[1])
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if rho == 1.0:
        exact = power * n_h * n_v
        return exact, exact
    lower = power * _factor_lower(n_h, rho) * _factor_lower(n_v, rho)
    upper = power * _factor_upper(n_h, rho) * _factor_upper(n_v, rho)
    return lower, upper


def bs_gain_asymptote(rho, power):
    """Large-array limit of the combiner gain, power ((1+rho)/(1-rho))^2."""
    return power * ((1.0 + rho) / (1.0 - rho)) ** 2


def eigen_bs_gain(shape, rho, power):
    """Exact combiner gain power * lam_max via the Kronecker factors."""
    from .channel_model import exp_corr_matrix

    lam_h = np.linalg.eigvalsh(exp_corr_matrix(int(shape[0]), rho))[-1]
    lam_v = np.linalg.eigvalsh(exp_corr_matrix(int(shape[1]), rho))[-1]
    return power * lam_h * lam_v


def _stat_design_scalars(corr):
    x = corr.power_alice * float(np.linalg.eigvalsh(corr.bs_corr)[-1])
    q = float(np.sum(corr.ris_corr ** 2))   # ||R||_F^2 = all-ones form of RoR
    return x, q


def legit_channel_gain(corr):
    """Legitimate effective gain achieved by the correlation-only design."""
    x, q = _stat_design_scalars(corr)
    return x * (corr.beta_cascade * q + corr.beta_ab)


def worst_case_leakage(corr):
    """Per-eavesdropper leakage term of the correlation-only design,
    |cross gain|^2 / (eve gain + noise), as an explicit expression."""
    x, q = _stat_design_scalars(corr)
    num = (corr.rho_eve ** 2) * x ** 2 * (
        q * np.sqrt(corr.beta_cascade * corr.beta_cascade_eve)
        + np.sqrt(corr.beta_ab * corr.beta_ae)) ** 2
    den = x * (corr.beta_cascade_eve * q + corr.beta_ae) + corr.noise_power
    return num / den


def statistical_design_rate(corr):
    """Per-eavesdropper key rates of the correlation-only design from the
    closed forms alone (no sampling, no solver)."""
    f = legit_channel_gain(corr) - worst_case_leakage(corr)
    return kgr_from_summary(f, corr.power_bob, corr.power_alice,
                            corr.noise_power)
