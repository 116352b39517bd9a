import math

import numpy as np
import pytest

from driftbench.subroutines import Awv, MovingAverage, Ogd, Ons, _project_weighted


def _dense_awv_prediction(xs, ys, x, lam):
    """Direct regularized least squares with the query point in the penalty."""
    d = x.shape[0]
    gram = lam * np.eye(d) + np.outer(x, x)
    for xi in xs:
        gram += np.outer(xi, xi)
    b = np.zeros(d)
    for xi, yi in zip(xs, ys):
        b += yi * xi
    return float(x @ np.linalg.solve(gram, b))


def _replay(make, history, probe):
    """Predictions of a fresh instance fed the same history."""
    sub = make()
    out = []
    for x, y in history:
        out.append(sub.predict(probe))
        sub.observe(x, y)
    out.append(sub.predict(probe))
    return out


class TestMovingAverage:
    def test_empty_history_convention(self):
        assert MovingAverage().predict(None) == 0.0

    def test_arithmetic(self):
        ma = MovingAverage()
        for y in (1.0, 2.0, 3.0):
            ma.observe(None, y)
        assert ma.predict(None) == 2.0

    def test_symmetry(self):
        ma = MovingAverage()
        ma.observe(None, -1.0)
        ma.observe(None, 1.0)
        assert ma.predict(None) == 0.0

    def test_constant_stream_exact_after_one(self):
        ma = MovingAverage()
        ma.observe(None, 0.1)
        assert ma.predict(None) == 0.1

    def test_replay_bitwise(self):
        rng = np.random.default_rng(42)
        history = [(None, float(rng.normal())) for _ in range(30)]
        a = _replay(MovingAverage, history, None)
        b = _replay(MovingAverage, history, None)
        assert a == b


class TestOgd:
    def test_zero_gradient(self):
        ogd = Ogd(1, 10.0)
        ogd.observe(np.zeros(1), 5.0)
        assert ogd.theta[0] == 0.0

    def test_hand_evaluated_step_with_projection(self):
        # B=10, G=1, k=1: eta=10, g=-2, raw step to 20, projected to 10.
        ogd = Ogd(1, 10.0, grad_bound=1.0)
        ogd.observe(np.array([1.0]), 1.0)
        assert ogd.theta[0] == pytest.approx(10.0, abs=1e-15)

    def test_stationary_point(self):
        ogd = Ogd(2, 5.0)
        ogd.theta = np.array([1.0, 2.0])
        x = np.array([2.0, -1.0])
        ogd.observe(x, float(x @ ogd.theta))
        assert np.array_equal(ogd.theta, np.array([1.0, 2.0]))

    def test_iterates_stay_in_ball(self):
        rng = np.random.default_rng(3)
        ogd = Ogd(3, 1.5)
        for _ in range(300):
            x = rng.uniform(-1, 1, 3)
            ogd.observe(x, float(rng.normal(scale=3.0)))
            assert np.linalg.norm(ogd.theta) <= 1.5 + 1e-12

    def test_replay_bitwise(self):
        rng = np.random.default_rng(4)
        history = [(rng.uniform(-1, 1, 2), float(rng.normal())) for _ in range(50)]
        probe = np.array([0.3, -0.7])
        a = _replay(lambda: Ogd(2, 2.0), history, probe)
        b = _replay(lambda: Ogd(2, 2.0), history, probe)
        assert a == b


class TestOns:
    def test_perfect_fit_no_update(self):
        ons = Ons(2, 5.0, gamma=1.0, epsilon=1.0)
        ons.theta = np.array([1.0, 1.0])
        a_inv_before = ons.a_inv.copy()
        x = np.array([1.0, -1.0])
        ons.observe(x, float(x @ ons.theta))
        assert np.array_equal(ons.theta, np.array([1.0, 1.0]))
        assert np.array_equal(ons.a_inv, a_inv_before)

    def test_hand_evaluated_scalar_step(self):
        # d=1, eps=1, gamma=1, B=10: g=-2, A=5, theta = 0 + (1/5)*2 = 0.4
        ons = Ons(1, 10.0, gamma=1.0, epsilon=1.0)
        ons.observe(np.array([1.0]), 1.0)
        assert ons.theta[0] == pytest.approx(0.4, abs=1e-15)
        assert ons.a_mat[0, 0] == pytest.approx(5.0, abs=1e-15)

    def test_projection_noop_inside_ball(self):
        a = np.array([[2.0, 0.3], [0.3, 1.0]])
        z = np.array([0.1, -0.2])
        assert np.array_equal(_project_weighted(z, a, 1.0), z)

    def test_weighted_projection_kkt(self):
        # On the boundary, A(u-z) must be antiparallel to u (multiplier >= 0).
        rng = np.random.default_rng(5)
        for _ in range(20):
            m = rng.normal(size=(3, 3))
            a = m @ m.T + 0.1 * np.eye(3)
            z = rng.normal(size=3) * 5.0
            if np.linalg.norm(z) <= 1.0:
                continue
            u = _project_weighted(z, a, 1.0)
            assert np.linalg.norm(u) == pytest.approx(1.0, abs=1e-6)
            resid = a @ (u - z)
            mu = -float(resid @ u)  # from resid = -mu*u with ||u||=1
            assert mu >= -1e-8
            assert np.linalg.norm(resid + mu * u) <= 1e-6 * max(1.0, mu)

    def test_iterates_stay_in_ball(self):
        rng = np.random.default_rng(6)
        ons = Ons(3, 1.2)
        for _ in range(300):
            x = rng.uniform(-1, 1, 3)
            ons.observe(x, float(rng.normal(scale=3.0)))
            assert np.linalg.norm(ons.theta) <= 1.2 + 1e-9

    def test_sherman_morrison_tracks_inverse(self):
        rng = np.random.default_rng(7)
        ons = Ons(2, 4.0, gamma=0.5, epsilon=2.0)
        for _ in range(40):
            x = rng.uniform(-1, 1, 2)
            ons.observe(x, float(rng.normal()))
        np.testing.assert_allclose(
            ons.a_inv @ ons.a_mat, np.eye(2), atol=1e-8
        )

    def test_replay_close(self):
        rng = np.random.default_rng(8)
        history = [(rng.uniform(-1, 1, 2), float(rng.normal())) for _ in range(80)]
        probe = np.array([0.5, 0.5])
        a = _replay(lambda: Ons(2, 2.0), history, probe)
        b = _replay(lambda: Ons(2, 2.0), history, probe)
        np.testing.assert_allclose(a, b, atol=1e-12)


class TestAwv:
    def test_birth_round_predicts_zero(self):
        assert Awv(3, 1.0).predict(np.array([1.0, 2.0, 3.0])) == 0.0

    def test_hand_evaluated_closed_form(self):
        # lam=1, history {(1,1)}: prediction 1/(1+1+1) = 1/3.
        awv = Awv(1, 1.0)
        awv.observe(np.array([1.0]), 1.0)
        assert awv.predict(np.array([1.0])) == pytest.approx(1 / 3, abs=1e-15)

    def test_zero_feature_predicts_zero(self):
        awv = Awv(2, 1.0)
        awv.observe(np.array([1.0, -1.0]), 2.0)
        assert awv.predict(np.zeros(2)) == 0.0

    def test_null_update(self):
        awv = Awv(2, 1.0)
        p_before = awv.p_mat.copy()
        awv.observe(np.zeros(2), 5.0)
        assert np.array_equal(awv.p_mat, p_before)
        assert np.array_equal(awv.b_vec, np.zeros(2))

    def test_scalar_sherman_morrison(self):
        awv = Awv(1, 1.0)
        awv.observe(np.array([1.0]), 1.0)
        assert awv.p_mat[0, 0] == pytest.approx(0.5, abs=1e-15)
        assert awv.b_vec[0] == 1.0

    def test_doubled_weight_inverse(self):
        lam, x = 1.0, 1.7
        awv = Awv(1, lam)
        awv.observe(np.array([x]), 0.3)
        awv.observe(np.array([x]), 0.3)
        assert awv.p_mat[0, 0] == pytest.approx(1.0 / (lam + 2 * x * x), rel=1e-12)

    def test_oracle_equivalence_randomized(self):
        rng = np.random.default_rng(9)
        for trial in range(30):
            d = int(rng.integers(1, 6))
            t = int(rng.integers(1, 51))
            lam = float(rng.choice([0.1, 1.0, 10.0]))
            awv = Awv(d, lam)
            xs, ys = [], []
            for _ in range(t):
                x = rng.uniform(-1, 1, d)
                y = float(rng.normal())
                query = rng.uniform(-1, 1, d)
                expected = _dense_awv_prediction(xs, ys, query, lam)
                assert awv.predict(query) == pytest.approx(expected, abs=1e-8)
                awv.observe(x, y)
                xs.append(x)
                ys.append(y)

    def test_replay_close(self):
        rng = np.random.default_rng(10)
        history = [(rng.uniform(-1, 1, 3), float(rng.normal())) for _ in range(60)]
        probe = np.array([0.2, 0.4, -0.1])
        a = _replay(lambda: Awv(3, 0.5), history, probe)
        b = _replay(lambda: Awv(3, 0.5), history, probe)
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_parameter_validation():
    with pytest.raises(ValueError):
        Ogd(1, 0.0)
    with pytest.raises(ValueError):
        Ons(1, -1.0)
    with pytest.raises(ValueError):
        Awv(1, 0.0)
    with pytest.raises(ValueError):
        Ons(1, 1.0, gamma=1.0, epsilon=0.0)
