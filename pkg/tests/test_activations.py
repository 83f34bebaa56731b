import numpy as np
import pytest

from fmmnn.activations import (ActivationKind, act_arrays, act_eval,
                               parse_activation)
from fmmnn.core import NumericError, RangeError

ALL_NAMES = ["relu", "gelu", "elu", "sigmoid", "tanh", "sine", "cosine",
             "sintu:0.0", "sintu:-3.141592653589793"]


class TestParse:
    def test_simple_tags(self):
        for name in ("relu", "sine", "tanh"):
            assert parse_activation(name).tag == name

    def test_sintu_threshold(self):
        k = parse_activation("sintu:-3.14159")
        assert k.tag == "sintu" and k.s == -3.14159

    def test_name_round_trip(self):
        for name in ALL_NAMES:
            k = parse_activation(name)
            assert parse_activation(k.name) == k

    def test_unknown_tag(self):
        with pytest.raises(RangeError):
            parse_activation("swish")

    def test_bad_threshold(self):
        with pytest.raises(RangeError):
            parse_activation("sintu:abc")

    def test_nonfinite_threshold(self):
        with pytest.raises(RangeError):
            ActivationKind("sintu", float("inf"))


class TestPointValues:
    def test_sine_at_half_pi(self):
        v, d1, d2 = act_eval(parse_activation("sine"), np.pi / 2)
        assert v == pytest.approx(1.0, abs=1e-15)
        assert d1 == pytest.approx(0.0, abs=1e-15)
        assert d2 == pytest.approx(-1.0, abs=1e-15)

    def test_sintu_constant_branch(self):
        assert act_eval(parse_activation("sintu:0.0"), -1.0) == (0.0, 0.0, 0.0)

    def test_relu_zero_branch(self):
        assert act_eval(parse_activation("relu"), -2.0) == (0.0, 0.0, 0.0)

    def test_relu_kink_right_derivative(self):
        assert act_eval(parse_activation("relu"), 0.0)[1] == 1.0

    def test_gelu_at_zero(self):
        v, d1, d2 = act_eval(parse_activation("gelu"), 0.0)
        assert v == 0.0
        assert d1 == pytest.approx(0.5, abs=1e-12)
        # centered second difference of the exact Gaussian-CDF GELU
        h = 1e-5
        fp = act_eval(parse_activation("gelu"), h)[0]
        fm = act_eval(parse_activation("gelu"), -h)[0]
        assert d2 == pytest.approx((fp - 2 * 0.0 + fm) / h**2, abs=1e-4)

    def test_non_finite_input(self):
        with pytest.raises(NumericError):
            act_eval(parse_activation("sine"), float("nan"))


class TestInvariants:
    def test_sintu_equals_sine_above_threshold(self):
        x = np.linspace(0.5, 10.0, 200)
        s = act_arrays(parse_activation("sintu:0.5"), x)[0]
        assert np.array_equal(s, np.sin(x))

    def test_sintu_constant_below_threshold(self):
        x = np.linspace(-10.0, 0.49, 200)
        v, d1, d2 = act_arrays(parse_activation("sintu:0.5"), x)
        assert np.allclose(v, np.sin(0.5), atol=0)
        assert np.all(d1 == 0) and np.all(d2 == 0)

    def test_bounded_by_one(self):
        x = np.linspace(-50, 50, 1001)
        for name in ("sine", "cosine", "sintu:-1.0"):
            assert np.max(np.abs(act_arrays(parse_activation(name), x)[0])) <= 1.0

    @pytest.mark.parametrize("name", ALL_NAMES)
    def test_d1_matches_finite_difference(self, name):
        kind = parse_activation(name)
        rng = np.random.default_rng(0)
        x = rng.uniform(-10, 10, 1000)
        h = 1e-6
        if kind.tag == "relu":
            x = x[np.abs(x) > 2 * h]
        if kind.tag == "sintu":
            x = x[np.abs(x - kind.s) > 2 * h]
        d1 = act_arrays(kind, x)[1]
        fd = (act_arrays(kind, x + h)[0] - act_arrays(kind, x - h)[0]) / (2 * h)
        assert np.max(np.abs(d1 - fd)) < 1e-6

    @pytest.mark.parametrize("name", ["gelu", "sigmoid", "tanh", "sine",
                                      "cosine"])
    def test_d2_matches_finite_difference(self, name):
        kind = parse_activation(name)
        rng = np.random.default_rng(1)
        x = rng.uniform(-5, 5, 500)
        h = 1e-4
        v, _, d2 = act_arrays(kind, x)
        fd = (act_arrays(kind, x + h)[0] - 2 * v
              + act_arrays(kind, x - h)[0]) / h**2
        assert np.max(np.abs(d2 - fd)) < 1e-5
