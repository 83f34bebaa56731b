import numpy as np
import pytest

from fmmnn.activations import parse_activation
from fmmnn.core import RangeError
from fmmnn.landscape import (ParamCoord, analytic_landscape, resolve_coord,
                             scan_pair)
from fmmnn.models import ModelSpec, build_model, forward_batch

SINE = parse_activation("sine")


def mse(model, X, Y):
    r = forward_batch(model, X) - Y
    return float(np.mean(np.sum(r * r, axis=1)))


class TestAnalytic:
    def test_zero_at_optimum(self):
        for case, w in (("L1", (0.7, -1.2)), ("L2", (2.0, 3.0)),
                        ("L3", (1.5, 0.4))):
            assert abs(analytic_landscape(case, w[0], w[1], w)) < 1e-10

    def test_l2_four_pi(self):
        val = analytic_landscape("L2", 3.0, 4.0, (1.0, 2.0))
        assert abs(val - 4 * np.pi) < 1e-6

    def test_l2_swap_symmetry(self):
        assert abs(analytic_landscape("L2", 2.0, 1.0, (1.0, 2.0))) < 1e-12
        a = analytic_landscape("L2", 2.5, 0.3, (1.0, 2.0))
        b = analytic_landscape("L2", 0.3, 2.5, (2.0, 1.0))
        assert a == pytest.approx(b, abs=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            w1, w2 = rng.uniform(-3, 3, 2)
            for case in ("L1", "L2", "L3"):
                assert analytic_landscape(case, w1, w2, (1.0, 2.0)) >= 0.0

    def test_unknown_case(self):
        with pytest.raises(RangeError):
            analytic_landscape("L4", 0.0, 0.0, (0.0, 0.0))


class TestScanPair:
    def setup_method(self):
        self.model = build_model(ModelSpec(kind="mmnn", width=8, rank=2,
                                           depth=2, activation=SINE), seed=3)
        x = np.linspace(-1, 1, 64)[:, None]
        self.data = (x, np.sin(3 * x))

    def test_resolution_one_is_current_loss(self):
        grid = scan_pair(self.model, self.data, ParamCoord(0, "A", 0, 0),
                         ParamCoord(0, "c", 0), resolution=1)
        assert grid.values.shape == (1, 1)
        assert grid.values[0, 0] == mse(self.model, *self.data)

    def test_restore_bit_exact(self):
        before = [a.copy() for a in (self.model.trainable_arrays()
                                     + self.model.frozen_arrays())]
        grid = scan_pair(self.model, self.data, ParamCoord(0, "W", 1, 0),
                         ParamCoord(1, "A", 0, 3), resolution=5)
        after = (self.model.trainable_arrays()
                 + self.model.frozen_arrays())
        for a, b in zip(before, after):
            assert np.array_equal(a, b)
        assert grid.base_loss == mse(self.model, *self.data)

    def test_grid_shape_and_axes(self):
        grid = scan_pair(self.model, self.data, ParamCoord(0, "A", 0, 0),
                         ParamCoord(0, "A", 1, 1),
                         ranges=((-2, 2), (-1, 1)), resolution=7)
        assert grid.values.shape == (7, 7)
        assert grid.axis1[0] == -2 and grid.axis1[-1] == 2
        assert grid.axis2[0] == -1 and grid.axis2[-1] == 1
        assert np.all(np.isfinite(grid.values))

    def test_out_of_range_coordinate(self):
        with pytest.raises(RangeError):
            scan_pair(self.model, self.data, ParamCoord(5, "A", 0, 0),
                      ParamCoord(0, "c", 0), resolution=2)
        with pytest.raises(RangeError):
            scan_pair(self.model, self.data, ParamCoord(0, "A", 99, 0),
                      ParamCoord(0, "c", 0), resolution=2)
        with pytest.raises(RangeError):
            resolve_coord(self.model, ParamCoord(0, "Q", 0, 0))

    def test_fcnn_coords(self):
        m = build_model(ModelSpec(kind="fcnn", width=8, depth=2,
                                  activation=SINE), seed=1)
        grid = scan_pair(m, self.data, ParamCoord(0, "W", 0, 0),
                         ParamCoord(2, "b", 0), resolution=3)
        assert grid.values.shape == (3, 3)
