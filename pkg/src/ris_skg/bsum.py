"""Alternating block maximization of the worst-case effective gain.

Each outer iteration replaces every per-eavesdropper gain f_k by a
quadratic minorant that is tangent at the current point - the curvature
constant is a closed-form upper bound on the block Hessian over the
feasible set - and solves the resulting max-min subproblem exactly-enough
with the mirror-prox inner solver, first in the reflection block, then in
the combiner block.  Because the surrogates are tangent minorants and the
inner solver never returns a point worse than its warm start, the true
worst-case gain is non-decreasing across iterations; a guard re-checks
that on the actual objective and keeps the previous block value if
floating-point noise ever breaks the chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import problem_lift as pl
from .mirror_prox import from_minorants, mirror_prox_solve

CURVATURE_FLOOR = 1e-12


def curvature_v(prob, wt):
    """Per-eavesdropper curvature bounds for the reflection block.

    Polynomial in the combiner-side scalars (m = wt'Rs wt and the direct
    cross forms) and the cached spectra of the surface-side matrices;
    floored at a tiny positive value so the surrogates stay strongly
    concave even when every cross term vanishes.
    """
    wt = np.asarray(wt, dtype=float)
    n = float(prob.n_ris)
    sig2 = prob.noise_power
    m_w = float(wt @ prob.r_s @ wt)
    q_w = np.einsum("i,kij,j->k", wt, prob.q_bs, wt)
    p_w = np.einsum("i,kij,j->k", wt, prob.p_bs, wt)

    lam_qhat = m_w * prob.lam_q_ris
    lam_phat = m_w * prob.lam_p_ris
    qhat_sym = 2.0 * m_w ** 2 * prob.lam2_q_ris   # lam_max(Qh (Qh + Qh'))
    phat_sym = 2.0 * m_w ** 2 * prob.lam2_p_ris
    top_q = q_w + n * lam_qhat
    top_p = p_w + n * lam_phat

    bound = (n / sig2) * (
        4.0 * (top_q ** 2 + top_p ** 2) / sig2 ** 2
        * m_w ** 2 * n * prob.lam_r_e ** 2
        + 2.0 * n * (qhat_sym + phat_sym)
        + top_q * 2.0 * lam_qhat
        + top_p * 2.0 * lam_phat
    )
    return np.maximum(bound, CURVATURE_FLOOR)


def curvature_w(prob, vt):
    """Per-eavesdropper curvature bounds for the combiner block.

    Built from the spectra of the aggregated matrices
    Qbar_k = (vt'Qr_k vt) Rs + Qd_k (and the skew analogue), which depend
    on the current reflection vector; same floor as the other block.
    """
    vt = np.asarray(vt, dtype=float)
    pa = prob.power_alice
    sig2 = prob.noise_power
    q_v = np.einsum("i,kij,j->k", vt, prob.q_ris, vt)
    p_v = np.einsum("i,kij,j->k", vt, prob.p_ris, vt)
    r_v = np.einsum("i,kij,j->k", vt, prob.r_e, vt)

    qbar = q_v[:, None, None] * prob.r_s[None, :, :] + prob.q_bs
    pbar = p_v[:, None, None] * prob.r_s[None, :, :] + prob.p_bs
    lam_qbar, lam2_qbar = pl.sym_eig_stats(qbar)
    lam_pbar, lam2_pbar = pl.sym_eig_stats(pbar)

    first_q = 4.0 * lam2_qbar                      # lam_max of 4 Qbar^2
    bound = (2.0 * pa / sig2) * (
        first_q
        + lam_qbar * 2.0 * lam_qbar
        + r_v ** 2 * (4.0 * pa ** 3 / sig2 ** 2) * prob.lam_r_s ** 2
        * (lam_qbar ** 2 + lam_pbar ** 2)
        + lam_pbar * 2.0 * lam_pbar
        + first_q
    )
    return np.maximum(bound, CURVATURE_FLOOR)


def build_surrogate_v(prob, vt, wt, terms=None):
    t = pl.objective_terms(prob, vt, wt) if terms is None else terms
    return from_minorants(
        curvature=curvature_v(prob, wt),
        grads=pl.grad_v(prob, vt, wt, terms=t),
        values=t.f,
        x0=vt,
        domain="discs",
    )


def build_surrogate_w(prob, vt, wt, terms=None):
    t = pl.objective_terms(prob, vt, wt) if terms is None else terms
    return from_minorants(
        curvature=curvature_w(prob, vt),
        grads=pl.grad_w(prob, vt, wt, terms=t),
        values=t.f,
        x0=wt,
        domain="ball",
        power=prob.power_alice,
    )


def statistical_design(corr):
    """Correlation-only design: combiner along the top base-station
    eigenvector at full power, all reflection phases aligned at zero."""
    vals, vecs = np.linalg.eigh(corr.bs_corr)
    w = np.sqrt(corr.power_alice) * vecs[:, -1].astype(complex)
    v = np.ones(corr.n_ris, dtype=complex)
    return w, v


@dataclass
class BsumResult:
    vt: np.ndarray
    wt: np.ndarray
    objective: float
    trace: np.ndarray            # worst-case gain after each outer iteration
    trace_wsq: np.ndarray        # combiner power along the same trace
    iterations: int
    converged: bool
    inner_iterations: int = 0
    rejected_steps: int = 0
    inner_converged: bool = True
    iterates: list = None       # (block, vt, wt) expansion points if recorded

    @property
    def v(self):
        return pl.unlift_vector(self.vt)

    @property
    def w(self):
        return pl.combiner_from_lifted(self.wt)


def bsum_solve(prob, vt0, wt0, blocks="vw", tol=1e-4, max_iters=200,
               inner_tol=1e-6, inner_max_iters=2000, keep_iterates=False):
    """Alternating surrogate maximization from a feasible start.

    ``blocks`` selects which variables move: "vw" (reflection then
    combiner each outer iteration), "v", or "w".  Stops when one outer
    iteration improves the worst-case gain by at most ``tol``.
    ``keep_iterates`` records every surrogate expansion point as
    (block, vt, wt) tuples for diagnostics.
    """
    if blocks not in ("vw", "v", "w"):
        raise ValueError(f"blocks must be 'vw', 'v' or 'w', got {blocks!r}")
    vt = pl.project_discs(np.asarray(vt0, dtype=float))
    wt = pl.project_ball(np.asarray(wt0, dtype=float), prob.power_alice)

    current = pl.min_objective(prob, vt, wt)
    trace = [current]
    trace_wsq = [float(wt @ wt)]
    iterates = [] if keep_iterates else None
    inner_total = 0
    rejected = 0
    inner_ok = True
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        if "v" in blocks:
            if keep_iterates:
                iterates.append(("v", vt.copy(), wt.copy()))
            sp = build_surrogate_v(prob, vt, wt)
            res = mirror_prox_solve(sp, vt, tol=inner_tol,
                                    max_iters=inner_max_iters)
            inner_total += res.iterations
            inner_ok = inner_ok and res.converged
            cand = pl.min_objective(prob, res.x, wt)
            if cand >= current:
                vt, current = res.x, cand
            else:
                rejected += 1
        if "w" in blocks:
            if keep_iterates:
                iterates.append(("w", vt.copy(), wt.copy()))
            sp = build_surrogate_w(prob, vt, wt)
            res = mirror_prox_solve(sp, wt, tol=inner_tol,
                                    max_iters=inner_max_iters)
            inner_total += res.iterations
            inner_ok = inner_ok and res.converged
            cand = pl.min_objective(prob, vt, res.x)
            if cand >= current:
                wt, current = res.x, cand
            else:
                rejected += 1
        trace.append(current)
        trace_wsq.append(float(wt @ wt))
        if trace[-1] - trace[-2] <= tol:
            converged = True
            break

    return BsumResult(
        vt=vt,
        wt=wt,
        objective=current,
        trace=np.asarray(trace),
        trace_wsq=np.asarray(trace_wsq),
        iterations=it,
        converged=converged,
        inner_iterations=inner_total,
        rejected_steps=rejected,
        inner_converged=inner_ok,
        iterates=iterates,
    )


def optimize_design(corr, blocks="vw", tol=None, max_iters=None,
                    inner_tol=1e-6, inner_max_iters=2000, init=None,
                    keep_iterates=False):
    """Optimize the design for a correlation set and return (w, v, result).

    ``init`` may supply a complex (w, v) warm start; the default is the
    correlation-only design.
    """
    prob = pl.build_lifted(corr)
    w0, v0 = statistical_design(corr) if init is None else init
    res = bsum_solve(
        prob,
        pl.lift_vector(v0),
        pl.lift_combiner(w0),
        blocks=blocks,
        tol=1e-4 if tol is None else tol,
        max_iters=200 if max_iters is None else max_iters,
        inner_tol=inner_tol,
        inner_max_iters=inner_max_iters,
        keep_iterates=keep_iterates,
    )
    return res.w, res.v, res
