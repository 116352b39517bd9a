import math

import numpy as np
import pytest

from driftbench.datagen import (
    ParameterPath,
    ShiftSpec,
    Stream,
    StreamSpec,
    gen_dictionary_stream,
    gen_dictionary_truth,
    gen_hard_shifts,
    gen_soft_shifts,
    gen_stream,
    normalize_starts,
    random_anchors,
    read_stream_csv,
    total_variation,
    write_stream_csv,
)
from driftbench.kernel import gaussian_kernel


class TestSoftShifts:
    def test_single_round_is_origin(self):
        path = gen_soft_shifts(1, 3, 1.0, seed=0)
        assert path.n == 1
        assert np.array_equal(path.thetas, np.zeros((1, 3)))
        assert path.tv_l1 == 0.0

    def test_tv_matches_innovation_sums(self):
        path = gen_soft_shifts(200, 2, 0.3, seed=1)
        eps = np.diff(path.thetas, axis=0)
        assert path.tv_l1 == pytest.approx(np.abs(eps).sum(), abs=0)
        assert path.tv_l2 == pytest.approx(np.linalg.norm(eps, axis=1).sum(), abs=0)

    def test_innovation_scale_half_normal(self):
        # |eps_t| for alpha=1 has mean sqrt(2/pi) * t^(-1/2)
        t_probe = 50
        samples = []
        for seed in range(1000):
            path = gen_soft_shifts(t_probe, 1, 1.0, seed=seed)
            samples.append(abs(path.thetas[-1, 0] - path.thetas[-2, 0]))
        expected = math.sqrt(2 / math.pi) * t_probe ** -0.5
        assert np.mean(samples) == pytest.approx(expected, rel=0.05)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            gen_soft_shifts(0, 1, 1.0, seed=0)
        with pytest.raises(ValueError):
            gen_soft_shifts(5, 1, 0.0, seed=0)


class TestHardShifts:
    def test_single_chunk_constant(self):
        path = gen_hard_shifts(40, 3, [1], seed=2)
        assert path.tv_l1 == 0.0
        assert np.all(path.thetas == path.thetas[0])

    def test_rademacher_support(self):
        path = gen_hard_shifts(60, 4, [1, 20, 40], seed=3)
        assert set(np.unique(path.thetas)) <= {-1.0, 1.0}

    def test_tv_identity_even_jumps(self):
        starts = [1, 10, 20, 30]
        path = gen_hard_shifts(50, 3, starts, seed=4)
        jumps = [
            np.abs(path.thetas[s - 1] - path.thetas[s - 2]).sum() for s in starts[1:]
        ]
        assert path.tv_l1 == pytest.approx(sum(jumps), abs=0)
        for j in jumps:
            assert j % 2 == 0 and j <= 2 * 3

    def test_piecewise_constant_except_at_starts(self):
        starts = [1, 16, 33]
        path = gen_hard_shifts(64, 2, starts, seed=5)
        diffs = np.abs(np.diff(path.thetas, axis=0)).sum(axis=1)
        for t in range(2, 65):
            if t in starts:
                continue
            assert diffs[t - 2] == 0.0

    def test_starts_normalized(self):
        assert normalize_starts([100, 2, 100, 9999], 1000) == [1, 2, 100]


class TestGenStream:
    def test_noiseless(self):
        path = gen_soft_shifts(30, 2, 1.0, seed=6)
        spec = StreamSpec(n=30, d=2, sigma=0.0, seed=6)
        stream = gen_stream(path, spec)
        assert np.array_equal(stream.ys, stream.y_true)

    def test_constant_one_mode(self):
        path = gen_soft_shifts(25, 1, 0.5, seed=7)
        spec = StreamSpec(n=25, d=1, sigma=1.0, input_mode="constant-one", seed=7)
        stream = gen_stream(path, spec)
        assert np.all(stream.xs == 1.0)
        assert np.array_equal(stream.y_true, path.thetas[:, 0])

    def test_noise_variance_monte_carlo(self):
        sigma = 0.7
        path = ParameterPath.from_thetas(np.zeros((100_000, 1)))
        spec = StreamSpec(n=100_000, d=1, sigma=sigma, seed=8)
        stream = gen_stream(path, spec)
        var = np.var(stream.ys - stream.y_true)
        assert var == pytest.approx(sigma ** 2, rel=0.02)

    def test_seed_determinism_and_distinctness(self):
        path = gen_soft_shifts(50, 2, 1.0, seed=9)
        a = gen_stream(path, StreamSpec(n=50, d=2, sigma=1.0, seed=9))
        b = gen_stream(path, StreamSpec(n=50, d=2, sigma=1.0, seed=9))
        c = gen_stream(path, StreamSpec(n=50, d=2, sigma=1.0, seed=10))
        assert np.array_equal(a.xs, b.xs) and np.array_equal(a.ys, b.ys)
        assert not np.array_equal(a.ys, c.ys)

    def test_paths_differ_across_seeds(self):
        a = gen_soft_shifts(50, 2, 1.0, seed=11)
        b = gen_soft_shifts(50, 2, 1.0, seed=12)
        assert not np.array_equal(a.thetas, b.thetas)

    def test_noise_independent_of_path_stream(self):
        # the path and the noise use disjoint sub-streams of the same seed
        path1 = gen_soft_shifts(50, 1, 1.0, seed=13)
        path2 = gen_hard_shifts(50, 1, [1, 25], seed=13)
        s1 = gen_stream(path1, StreamSpec(n=50, d=1, sigma=1.0, seed=13))
        s2 = gen_stream(path2, StreamSpec(n=50, d=1, sigma=1.0, seed=13))
        np.testing.assert_allclose(s1.ys - s1.y_true, s2.ys - s2.y_true, atol=1e-12)

    def test_shape_mismatch_rejected(self):
        path = gen_soft_shifts(10, 2, 1.0, seed=0)
        with pytest.raises(ValueError):
            gen_stream(path, StreamSpec(n=11, d=2, sigma=1.0, seed=0))


class TestTotalVariation:
    def test_constant_path(self):
        assert total_variation(np.zeros((5, 2))) == 0.0

    def test_one_dim_updown(self):
        path = np.array([[0.0], [1.0], [0.0]])
        assert total_variation(path, "l1") == 2.0
        assert total_variation(path, "l2") == 2.0

    def test_norm_definitions(self):
        path = np.array([[0.0, 0.0], [1.0, 1.0]])
        assert total_variation(path, "l1") == 2.0
        assert total_variation(path, "l2") == pytest.approx(math.sqrt(2))

    def test_norm_inequalities(self):
        for seed in range(10):
            path = gen_soft_shifts(100, 3, 0.5, seed=seed)
            l1, l2 = path.tv_l1, path.tv_l2
            assert l2 <= l1 + 1e-12
            assert l1 <= math.sqrt(3) * l2 + 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            total_variation(np.zeros((0, 2)))

    def test_unknown_norm_rejected(self):
        with pytest.raises(ValueError):
            total_variation(np.zeros((3, 1)), "linf")


class TestSpecValidation:
    def test_constant_one_forces_d1(self):
        with pytest.raises(ValueError):
            StreamSpec(n=10, d=2, sigma=1.0, input_mode="constant-one", seed=0)

    def test_shift_spec_kinds(self):
        with pytest.raises(ValueError):
            ShiftSpec(kind="wobble")
        with pytest.raises(ValueError):
            ShiftSpec(kind="soft", alpha=0.0)


class TestDictionaryTruth:
    def test_norm_bound_respected(self):
        kern = gaussian_kernel(0.8)
        anchors = random_anchors(5, 2, seed=14)
        truth = gen_dictionary_truth(100, anchors, kern, [1, 50], seed=14, norm_bound=1.0)
        norms = np.linalg.norm(truth.whitened.thetas, axis=1)
        assert norms.max() == pytest.approx(1.0, rel=1e-9)

    def test_whitened_tv_is_function_space_tv(self):
        kern = gaussian_kernel(0.8)
        anchors = random_anchors(4, 2, seed=15)
        truth = gen_dictionary_truth(60, anchors, kern, [1, 20, 40], seed=15)
        gram = kern.pairwise(anchors, anchors)
        diffs = np.diff(truth.coeffs.thetas, axis=0)
        direct = sum(math.sqrt(max(0.0, d @ gram @ d)) for d in diffs)
        assert truth.whitened.tv_l2 == pytest.approx(direct, rel=1e-9)

    def test_stream_truth_matches_dictionary_evaluation(self):
        kern = gaussian_kernel(0.8)
        anchors = random_anchors(4, 2, seed=16)
        truth = gen_dictionary_truth(30, anchors, kern, [1, 15], seed=16)
        spec = StreamSpec(n=30, d=2, sigma=0.0, seed=16)
        stream = gen_dictionary_stream(truth, spec)
        for t in (0, 14, 29):
            direct = truth.evaluate(truth.coeffs.thetas[t], stream.xs[t])
            assert stream.y_true[t] == pytest.approx(direct, rel=1e-12)


class TestStreamCsv:
    def test_round_trip(self, tmp_path):
        path = gen_hard_shifts(20, 2, [1, 10], seed=17)
        stream = gen_stream(path, StreamSpec(n=20, d=2, sigma=1.0, seed=17))
        out = tmp_path / "stream.csv"
        write_stream_csv(stream, str(out))
        text = out.read_bytes().decode("utf-8")
        assert text.splitlines()[0] == "t,x_1,x_2,y,y_true"
        assert "\r" not in text
        back = read_stream_csv(str(out))
        np.testing.assert_array_equal(back.xs, stream.xs)
        np.testing.assert_array_equal(back.ys, stream.ys)
        np.testing.assert_array_equal(back.y_true, stream.y_true)

    def test_observations_iterator(self):
        path = gen_hard_shifts(5, 1, [1], seed=18)
        stream = gen_stream(path, StreamSpec(n=5, d=1, sigma=0.5, seed=18))
        obs = list(stream.observations())
        assert [o.t for o in obs] == [1, 2, 3, 4, 5]
        assert obs[2].y == stream.ys[2]
        assert obs[2].y_true == stream.y_true[2]
