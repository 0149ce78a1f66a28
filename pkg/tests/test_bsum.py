"""Alternating surrogate maximization: curvature, minorants, monotonicity."""

import numpy as np
import pytest

from ris_skg import bsum
from ris_skg import mirror_prox as mp
from ris_skg import problem_lift as pl

import oracles


def _normalized_problem(seed, n_bs=3, n_ris=4, n_eve=3):
    rng = np.random.default_rng(seed)
    corr = oracles.random_corr(rng, n_bs=n_bs, n_ris=n_ris, n_eve=n_eve)
    prob = pl.build_lifted(corr)
    vt = pl.project_discs(rng.standard_normal(2 * n_ris))
    wt = pl.project_ball(rng.standard_normal(2 * n_bs), prob.power_alice)
    return rng, corr, prob, vt, wt


# ---------------------------------------------------------------------------
# curvature constants


def test_curvature_constants_positive():
    for seed in range(10):
        _, _, prob, vt, wt = _normalized_problem(seed)
        assert np.all(bsum.curvature_v(prob, wt) >= bsum.CURVATURE_FLOOR)
        assert np.all(bsum.curvature_w(prob, vt) >= bsum.CURVATURE_FLOOR)


def test_curvature_floor_kicks_in_without_cross_terms():
    rng = np.random.default_rng(0)
    corr = oracles.recovery_corr(rng)
    prob = pl.build_lifted(corr)
    wt = pl.project_ball(rng.standard_normal(2 * corr.n_bs),
                         prob.power_alice)
    # with an independent eavesdropper the bound collapses to the floor
    assert np.all(bsum.curvature_v(prob, wt) == bsum.CURVATURE_FLOOR)


# ---------------------------------------------------------------------------
# surrogates


def _reconstruction_scale(sp, x0):
    """Size of the terms the surrogate evaluation adds and cancels; the
    curvature constants dwarf the objective, so tangency can only be exact
    relative to this scale."""
    return (1.0 + sp.quad * float(x0 @ x0) + np.abs(sp.lin @ x0)
            + np.abs(sp.const))


def test_surrogate_v_touches_and_minorizes():
    for seed in range(15):
        rng, corr, prob, vt, wt = _normalized_problem(seed)
        sp = bsum.build_surrogate_v(prob, vt, wt)
        truth = pl.objective(prob, vt, wt)
        scale = _reconstruction_scale(sp, vt)
        assert np.all(np.abs(mp.minorant_values(sp, vt) - truth)
                      <= 1e-9 * scale)
        slope = -(2.0 * sp.quad[:, None] * vt[None, :] + sp.lin)
        assert np.all(np.abs(slope - pl.grad_v(prob, vt, wt))
                      <= 1e-9 * (1.0 + sp.quad[:, None]))
        for _ in range(20):
            x = pl.project_discs(rng.standard_normal(vt.shape[0]) * 1.5)
            gap = pl.objective(prob, x, wt) - mp.minorant_values(sp, x)
            assert np.all(gap >= -1e-9 * _reconstruction_scale(sp, x))


def test_surrogate_w_touches_and_minorizes():
    for seed in range(15):
        rng, corr, prob, vt, wt = _normalized_problem(seed)
        sp = bsum.build_surrogate_w(prob, vt, wt)
        truth = pl.objective(prob, vt, wt)
        scale = _reconstruction_scale(sp, wt)
        assert np.all(np.abs(mp.minorant_values(sp, wt) - truth)
                      <= 1e-9 * scale)
        slope = -(2.0 * sp.quad[:, None] * wt[None, :] + sp.lin)
        assert np.all(np.abs(slope - pl.grad_w(prob, vt, wt))
                      <= 1e-9 * (1.0 + sp.quad[:, None]))
        assert sp.domain == "ball" and sp.power == prob.power_alice
        for _ in range(20):
            x = pl.project_ball(rng.standard_normal(wt.shape[0]) * 1.5,
                                prob.power_alice)
            gap = pl.objective(prob, vt, x) - mp.minorant_values(sp, x)
            assert np.all(gap >= -1e-9 * _reconstruction_scale(sp, x))


# ---------------------------------------------------------------------------
# outer loop


def test_solver_trace_is_monotone_from_any_start():
    for seed in range(12):
        _, _, prob, vt, wt = _normalized_problem(seed)
        res = bsum.bsum_solve(prob, vt, wt, tol=1e-4, max_iters=60)
        assert np.all(np.diff(res.trace) >= -1e-8)
        assert res.objective == pytest.approx(res.trace[-1])
        assert res.objective >= res.trace[0] - 1e-12
        assert float(res.wt @ res.wt) <= prob.power_alice + 1e-9


def test_deployed_pipeline_converges_quickly():
    for seed in range(12):
        rng = np.random.default_rng(seed)
        corr = oracles.random_corr(rng)
        _, _, res = bsum.optimize_design(corr, tol=1e-4, max_iters=200)
        assert res.converged and res.iterations <= 200
        assert np.all(np.diff(res.trace) >= -1e-8)


def test_single_block_modes_leave_other_block_fixed():
    _, _, prob, vt, wt = _normalized_problem(3)
    res_v = bsum.bsum_solve(prob, vt, wt, blocks="v", tol=1e-8)
    assert np.allclose(res_v.wt, pl.project_ball(wt, prob.power_alice))
    res_w = bsum.bsum_solve(prob, vt, wt, blocks="w", tol=1e-8)
    assert np.allclose(res_w.vt, pl.project_discs(vt))
    with pytest.raises(ValueError):
        bsum.bsum_solve(prob, vt, wt, blocks="x")


def test_recorded_iterates_are_expansion_points():
    _, _, prob, vt, wt = _normalized_problem(5)
    res = bsum.bsum_solve(prob, vt, wt, tol=1e-6, max_iters=50,
                          keep_iterates=True)
    assert len(res.iterates) == 2 * res.iterations
    assert [b for b, _, _ in res.iterates[:2]] == ["v", "w"]
    b0, vt0, wt0 = res.iterates[0]
    assert np.allclose(vt0, pl.project_discs(vt))
    # every recorded point stays feasible
    for _, vti, wti in res.iterates:
        assert np.all(np.hypot(*np.split(vti, 2)) <= 1 + 1e-9)
        assert float(wti @ wti) <= prob.power_alice + 1e-9


def test_result_exposes_complex_design():
    _, corr, prob, vt, wt = _normalized_problem(6)
    res = bsum.bsum_solve(prob, vt, wt, tol=1e-6)
    assert res.v.shape == (corr.n_ris,)
    assert res.w.shape == (corr.n_bs,)
    assert res.v.dtype.kind == "c" and res.w.dtype.kind == "c"
    assert np.allclose(pl.lift_vector(res.v), res.vt)


def test_independent_eavesdropper_recovery_small():
    worst = 0.0
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        corr = oracles.recovery_corr(rng)
        prob = pl.build_lifted(corr)
        w_opt, v_opt = bsum.statistical_design(corr)
        target = pl.min_objective(prob, pl.lift_vector(v_opt),
                                  pl.lift_combiner(w_opt))
        w0 = oracles.random_combiner(rng, corr)
        v0 = oracles.random_reflect(rng, corr)
        _, _, res = bsum.optimize_design(
            corr, tol=1e-13, max_iters=1000, init=(w0, v0))
        worst = max(worst, (target - res.objective) / abs(target))
    assert worst <= 1e-3


def test_statistical_design_structure():
    rng = np.random.default_rng(1)
    corr = oracles.random_corr(rng)
    w, v = bsum.statistical_design(corr)
    assert np.allclose(v, 1.0)
    assert np.vdot(w, w).real == pytest.approx(corr.power_alice)
    vals, vecs = np.linalg.eigh(corr.bs_corr)
    overlap = abs(np.vdot(vecs[:, -1], w)) / np.linalg.norm(w)
    assert overlap == pytest.approx(1.0)


def test_optimize_design_returns_feasible_pair():
    rng = np.random.default_rng(2)
    corr = oracles.random_corr(rng)
    w, v, res = bsum.optimize_design(corr)
    assert np.vdot(w, w).real <= corr.power_alice + 1e-9
    assert np.all(np.abs(v) <= 1 + 1e-9)
    assert res.objective >= res.trace[0] - 1e-12
