import math

import numpy as np
import pytest

from driftbench.core import (
    Observation,
    OutputBound,
    clip_to_bound,
    square_loss,
    update_output_bound,
)


class TestSquareLoss:
    def test_identity_case(self):
        assert square_loss(0.0, 0.0) == 0.0

    def test_forced_arithmetic(self):
        assert square_loss(3.0, 1.0) == 4.0
        assert square_loss(-1.0, 2.0) == 9.0

    def test_non_finite_rejected(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                square_loss(bad, 0.0)
            with pytest.raises(ValueError):
                square_loss(0.0, bad)

    def test_sign_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            y_hat, y = rng.normal(size=2)
            mirrored = square_loss(2 * y - y_hat, y)
            assert square_loss(y_hat, y) == pytest.approx(mirrored, rel=1e-12)

    def test_convex_along_prediction(self):
        # three-point midpoint test: f((a+b)/2) <= (f(a)+f(b))/2
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, b, y = rng.normal(size=3)
            mid = square_loss(0.5 * (a + b), y)
            assert mid <= 0.5 * (square_loss(a, y) + square_loss(b, y)) + 1e-12


class TestClipToBound:
    def test_identity_inside(self):
        assert clip_to_bound(0.5, OutputBound(1.0)) == 0.5

    def test_clamps(self):
        assert clip_to_bound(5.0, OutputBound(1.0)) == 1.0
        assert clip_to_bound(-5.0, OutputBound(2.0)) == -2.0

    def test_accepts_plain_float_bound(self):
        assert clip_to_bound(3.0, 1.5) == 1.5

    def test_zero_bound_pins_to_zero(self):
        assert clip_to_bound(12.0, OutputBound()) == 0.0


class TestOutputBound:
    def test_identity_case(self):
        b = OutputBound()
        assert update_output_bound(b, 0.0).y_max == 0.0

    def test_max_forced(self):
        assert update_output_bound(OutputBound(1.0), -3.0).y_max == 3.0
        assert update_output_bound(OutputBound(4.0), 2.0).y_max == 4.0

    def test_idempotent_on_repeats(self):
        b = OutputBound()
        update_output_bound(b, 2.5)
        first = b.y_max
        update_output_bound(b, 2.5)
        assert b.y_max == first

    def test_non_decreasing(self):
        rng = np.random.default_rng(2)
        b = OutputBound()
        prev = 0.0
        for y in rng.normal(size=200):
            update_output_bound(b, float(y))
            assert b.y_max >= prev
            prev = b.y_max

    def test_negative_init_rejected(self):
        with pytest.raises(ValueError):
            OutputBound(-1.0)


def test_observation_holds_optional_truth():
    obs = Observation(t=1, x=np.array([1.0]), y=0.5)
    assert obs.y_true is None
    obs2 = Observation(t=2, x=np.array([1.0]), y=0.5, y_true=0.4)
    assert obs2.y_true == 0.4
