"""Sampling determinism, distributional checks, SURE and domination runs."""

import math

import numpy as np
import pytest
from scipy import stats

from sure_boundary.boundary import DominatorSpec, construct_dominator
from sure_boundary.core import ProblemDims, constants
from sure_boundary.families import GBUnknown, PositivePartJS, Zero, make_shrinkage
from sure_boundary.montecarlo import (
    Normal,
    SimConfig,
    StudentT,
    domination_mc,
    encode_model,
    estimate_risk,
    parse_model,
    sample_all,
    sample_model,
    sure_unbiasedness_test,
)

DIMS = ProblemDims(5, 6)
K = constants(DIMS)
BASE = SimConfig(dims=DIMS, theta_norm=0.0, sigma=1.0, reps=10**5, seed=20240817)


class TestSampling:
    def test_bit_identical_across_calls(self):
        x1, s1 = sample_all(BASE)
        x2, s2 = sample_all(BASE)
        assert np.array_equal(x1, x2) and np.array_equal(s1, s2)

    def test_chunking_does_not_change_values(self):
        x_all, s_all = sample_all(BASE)
        xs, ss = [], []
        for start, x, s in sample_model(BASE, chunk_size=10_001):
            xs.append(x)
            ss.append(s)
        assert np.array_equal(np.concatenate(xs), x_all)
        assert np.array_equal(np.concatenate(ss), s_all)

    def test_replication_block_is_pure_function_of_seed_and_index(self):
        short = SimConfig(dims=DIMS, theta_norm=0.0, sigma=1.0, reps=1000, seed=BASE.seed)
        x_long, s_long = sample_all(BASE)
        x_short, s_short = sample_all(short)
        assert np.array_equal(x_short, x_long[:1000])
        assert np.array_equal(s_short, s_long[:1000])

    def test_chi2_mean(self):
        _, s = sample_all(BASE)
        se = s.std(ddof=1) / math.sqrt(len(s))
        assert abs(s.mean() - DIMS.n) <= 3.0 * se

    def test_w_has_scaled_f_distribution(self):
        x, s = sample_all(BASE)
        w = np.einsum("ij,ij->i", x, x) / s
        d_stat, _ = stats.kstest(
            w, lambda t: stats.f.cdf(t * DIMS.n / DIMS.p, DIMS.p, DIMS.n)
        )
        assert d_stat < 1.627624 / math.sqrt(BASE.reps)  # 1% critical value

    def test_sigma_invariance_of_w(self):
        # W = ||X||^2/S is scale-free under theta = 0
        a = SimConfig(dims=DIMS, theta_norm=0.0, sigma=0.5, reps=1000, seed=3)
        b = SimConfig(dims=DIMS, theta_norm=0.0, sigma=2.0, reps=1000, seed=3)
        xa, sa = sample_all(a)
        xb, sb = sample_all(b)
        wa = np.einsum("ij,ij->i", xa, xa) / sa
        wb = np.einsum("ij,ij->i", xb, xb) / sb
        assert wa == pytest.approx(wb, rel=1e-12)

    def test_orbit_invariance_of_loss(self):
        # rotating theta to another axis together with the noise leaves the
        # loss invariant; permutation of coordinates is such a rotation
        cfg = SimConfig(dims=DIMS, theta_norm=2.0, sigma=1.0, reps=2000, seed=5)
        phi = make_shrinkage(PositivePartJS(a=K.c_pn), DIMS)
        x, s = sample_all(cfg)
        w = np.einsum("ij,ij->i", x, x) / s
        shrink = 1.0 - np.asarray(phi.eval(w)) / w
        theta = np.zeros(DIMS.p)
        theta[0] = cfg.theta_norm
        loss = np.sum((shrink[:, None] * x - theta) ** 2, axis=1)
        perm = [4, 0, 3, 1, 2]
        loss_rot = np.sum((shrink[:, None] * x[:, perm] - theta[perm]) ** 2, axis=1)
        assert loss_rot == pytest.approx(loss, rel=1e-12)

    def test_model_encoding(self):
        assert parse_model("normal") == Normal()
        assert parse_model("student-t:df=5") == StudentT(df=5.0)
        assert encode_model(StudentT(df=5.0)) == "student-t:df=5.0"
        with pytest.raises(ValueError):
            parse_model("cauchy")
        with pytest.raises(ValueError):
            StudentT(df=2.0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SimConfig(dims=DIMS, sigma=0.0)
        with pytest.raises(ValueError):
            SimConfig(dims=DIMS, reps=0)
        with pytest.raises(ValueError):
            SimConfig(dims=DIMS, theta_norm=-1.0)


class TestRisk:
    def test_mle_risk_is_p(self):
        r = estimate_risk(make_shrinkage(Zero(), DIMS), BASE)
        assert abs(r.mean_loss - DIMS.p) <= 3.0 * r.se_loss
        assert r.sure_mean == DIMS.p
        assert r.se_sure == 0.0

    def test_jsplus_strictly_improves_at_origin(self):
        r = estimate_risk(make_shrinkage(PositivePartJS(a=K.c_pn), DIMS), BASE)
        assert r.mean_loss < DIMS.p - 10.0 * r.se_loss

    def test_thread_cap_does_not_change_report(self):
        phi = make_shrinkage(PositivePartJS(a=K.c_pn), DIMS)
        assert estimate_risk(phi, BASE, threads=1) == estimate_risk(phi, BASE, threads=4)


class TestSureCheck:
    def test_zero_phi_unbiased(self):
        chk = sure_unbiasedness_test(make_shrinkage(Zero(), DIMS), BASE)
        assert not chk.flagged

    def test_gb_cells_unbiased(self):
        phi = make_shrinkage(GBUnknown(a=-2.0, b=1.0), DIMS)
        for theta in (0.0, 2.0, 10.0):
            for sigma in (0.5, 1.0, 2.0):
                cfg = SimConfig(dims=DIMS, theta_norm=theta, sigma=sigma,
                                reps=10**5, seed=99)
                chk = sure_unbiasedness_test(phi, cfg)
                assert abs(chk.z) < 4.0

    def test_gap_shrinks_with_replications(self):
        phi = make_shrinkage(PositivePartJS(a=K.c_pn), DIMS)
        gaps = []
        for reps in (2000, 16000, 128000):
            cfg = SimConfig(dims=DIMS, theta_norm=1.0, sigma=1.0, reps=reps, seed=301)
            chk = sure_unbiasedness_test(phi, cfg)
            gaps.append(abs(chk.mean_loss - chk.sure_mean))
        assert gaps[-1] < gaps[0]

    def test_student_t_refused(self):
        cfg = SimConfig(dims=DIMS, reps=100, model=StudentT(df=5.0))
        with pytest.raises(ValueError):
            sure_unbiasedness_test(make_shrinkage(Zero(), DIMS), cfg)


class TestDomination:
    def test_degenerate_g_gives_identically_zero_diff(self):
        phi = make_shrinkage(Zero(), DIMS)
        spec = DominatorSpec(nu=0.5, w_sharp=1e15, ramp_width=1e15, b=1.5, w_star=4.0)
        rep = domination_mc(phi, spec, [SimConfig(dims=DIMS, reps=5000, seed=2)])[0]
        assert rep.mean_diff == 0.0
        assert rep.se_diff == 0.0

    def test_mle_dominated_and_paired_beats_unpaired(self):
        phi = make_shrinkage(Zero(), DIMS)
        spec = construct_dominator(phi, DIMS, 1.5)
        configs = [
            SimConfig(dims=DIMS, theta_norm=t, sigma=1.0, reps=10**5, seed=7)
            for t in (0.0, 1.0, 5.0, 20.0)
        ]
        for rep in domination_mc(phi, spec, configs):
            assert rep.mean_diff >= -3.0 * rep.se_diff
            assert rep.se_diff < rep.se_unpaired

    def test_student_t_extension(self):
        phi = make_shrinkage(Zero(), DIMS)
        spec = construct_dominator(phi, DIMS, 1.5)
        cfg = SimConfig(dims=DIMS, theta_norm=1.0, sigma=1.0, reps=10**5,
                        seed=8, model=StudentT(df=5.0))
        rep = domination_mc(phi, spec, [cfg])[0]
        assert rep.mean_diff >= -3.0 * rep.se_diff
