"""Table-lookup kernels: exact values by hand, smoothed kernels by finite differences."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hevopt.maps import Grid1D, Grid2D, interp1, interp2, interp1_c1, interp2_c1, pwl_c1


@pytest.fixture
def g1():
    return Grid1D(np.array([0.0, 2.0, 5.0]), np.array([1.0, 5.0, -1.0]))


@pytest.fixture
def g2():
    # values[i, j] = 10*x_i + y_j so bilinear interpolation is exact
    xb = np.array([0.0, 1.0, 3.0])
    yb = np.array([0.0, 2.0])
    vals = 10.0 * xb[:, None] + yb[None, :]
    return Grid2D(xb, yb, vals)


class TestExactInterp:
    def test_node_values_exact(self, g1):
        # stored values reproduced exactly at breakpoints
        assert interp1(g1, g1.breaks).tolist() == g1.values.tolist()

    def test_midpoint_hand_values(self, g1):
        # hand: 1 + (5-1)/2 * 1 = 3 ; 5 + (-1-5)/3 * 1 = 3
        assert interp1(g1, 1.0) == 3.0
        assert interp1(g1, 3.0) == 3.0

    def test_clamped_extrapolation(self, g1):
        assert interp1(g1, -4.0) == 1.0
        assert interp1(g1, 99.0) == -1.0

    def test_bilinear_exact_on_affine(self, g2):
        rng = np.random.default_rng(3)
        x = rng.uniform(0.0, 3.0, 40)
        y = rng.uniform(0.0, 2.0, 40)
        np.testing.assert_allclose(interp2(g2, x, y), 10.0 * x + y, rtol=0, atol=1e-12)

    def test_bilinear_cell_center_hand(self):
        g = Grid2D(np.array([0.0, 1.0]), np.array([0.0, 1.0]), np.array([[0.0, 2.0], [4.0, 10.0]]))
        # hand: mean of the four corners at the cell center
        assert interp2(g, 0.5, 0.5) == 4.0

    def test_bilinear_clamped_corners(self, g2):
        assert interp2(g2, -1.0, -1.0) == 0.0
        assert interp2(g2, 9.0, 9.0) == 32.0

    def test_monotone_breaks_rejected(self):
        with pytest.raises(ValueError):
            Grid1D(np.array([0.0, 0.0, 1.0]), np.zeros(3))
        with pytest.raises(ValueError):
            Grid2D(np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.zeros((2, 2)))

    def test_json_round_trip_bit_exact(self, g2):
        import json

        blob = json.dumps(g2.to_json())
        back = Grid2D.from_json(json.loads(blob))
        assert back.values.tolist() == g2.values.tolist()
        assert back.xbreaks.tolist() == g2.xbreaks.tolist()

    @given(st.floats(min_value=-1.0, max_value=6.0, allow_nan=False))
    @settings(max_examples=60, deadline=None)
    def test_within_hull(self, x):
        g = Grid1D(np.array([0.0, 2.0, 5.0]), np.array([1.0, 5.0, -1.0]))
        y = float(interp1(g, x))
        assert g.values.min() - 1e-12 <= y <= g.values.max() + 1e-12


class TestSmoothedKernels:
    WIDTH = 0.05

    def test_matches_exact_outside_bands(self, g1):
        q = np.array([0.5, 1.0, 3.5, 4.0])  # all far from breakpoints
        y, dy, d2 = interp1_c1(g1, q, self.WIDTH)
        np.testing.assert_allclose(y, interp1(g1, q), atol=1e-14)
        np.testing.assert_allclose(d2, 0.0, atol=1e-14)

    def test_cell_slope_exact_inside_cells(self, g1):
        _, dy, _ = interp1_c1(g1, np.array([1.0, 3.5]), self.WIDTH)
        np.testing.assert_allclose(dy, [2.0, -2.0], atol=1e-14)

    def test_node_offset_is_quarter_slope_jump(self, g1):
        # value at a smoothed corner sits (s2-s1)*w/4 off the stored node
        w = self.WIDTH * 2.0  # min adjacent cell at breakpoint 2.0 is 2.0
        y, _, _ = interp1_c1(g1, np.array([2.0]), self.WIDTH)
        s1, s2 = 2.0, -2.0
        assert abs(y[0] - (5.0 + (s2 - s1) * w / 4.0)) < 1e-13

    def test_derivative_is_fd_of_value_everywhere(self, g1):
        rng = np.random.default_rng(11)
        q = rng.uniform(-0.5, 5.5, 500)
        h = 1e-7
        y0, dy, d2 = interp1_c1(g1, q, self.WIDTH)
        yp, _, _ = interp1_c1(g1, q + h, self.WIDTH)
        ym, _, _ = interp1_c1(g1, q - h, self.WIDTH)
        np.testing.assert_allclose(dy, (yp - ym) / (2 * h), atol=5e-6)

    def test_derivative_blend_linear_in_band(self, g1):
        # inside the band the derivative interpolates the two cell slopes linearly
        w = self.WIDTH * 2.0
        t = np.linspace(-w, w, 9)
        _, dy, _ = interp1_c1(g1, 2.0 + t, self.WIDTH)
        expect = 0.5 * (2.0 + -2.0) + (-2.0 - 2.0) * t / (2 * w)
        np.testing.assert_allclose(dy, expect, atol=1e-12)

    def test_width_zero_is_exact_pwl(self, g1):
        q = np.linspace(-1, 6, 101)
        y, dy, d2 = interp1_c1(g1, q, 0.0)
        np.testing.assert_allclose(y, interp1(g1, q), atol=0)
        assert np.all(d2 == 0.0)

    def test_c1_continuity_across_band_edges(self, g1):
        w = self.WIDTH * 2.0
        for edge in (2.0 - w, 2.0 + w):
            ya, da, _ = interp1_c1(g1, np.array([edge - 1e-10]), self.WIDTH)
            yb, db, _ = interp1_c1(g1, np.array([edge + 1e-10]), self.WIDTH)
            assert abs(ya[0] - yb[0]) < 1e-8
            assert abs(da[0] - db[0]) < 1e-6

    def test_per_query_values_path(self, g1):
        # (S, nb) node values: each row an independent curve
        vals = np.stack([g1.values, 2.0 * g1.values])
        q = np.array([1.0, 1.0])
        y, dy, _ = pwl_c1(g1.breaks, vals, q, self.WIDTH)
        np.testing.assert_allclose(y, [3.0, 6.0])
        np.testing.assert_allclose(dy, [2.0, 4.0])


class TestSmoothedBilinear:
    WIDTH = 0.05

    @pytest.fixture
    def g2r(self):
        rng = np.random.default_rng(5)
        xb = np.array([0.0, 1.0, 2.5, 4.0])
        yb = np.array([-1.0, 0.0, 2.0])
        return Grid2D(xb, yb, rng.uniform(-2, 2, (4, 3)))

    def test_matches_bilinear_away_from_grid_lines(self, g2r):
        q = [(0.5, -0.5), (1.7, 1.0), (3.2, 0.7)]
        for x, y in q:
            f = interp2_c1(g2r, np.array([x]), np.array([y]), self.WIDTH)[0]
            assert abs(f[0] - interp2(g2r, x, y)) < 1e-13

    def test_gradients_match_fd(self, g2r):
        rng = np.random.default_rng(7)
        x = rng.uniform(-0.5, 4.5, 400)
        y = rng.uniform(-1.5, 2.5, 400)
        h = 1e-6
        f, fx, fy, fxx, fxy, fyy = interp2_c1(g2r, x, y, self.WIDTH)
        fp = interp2_c1(g2r, x + h, y, self.WIDTH)[0]
        fm = interp2_c1(g2r, x - h, y, self.WIDTH)[0]
        np.testing.assert_allclose(fx, (fp - fm) / (2 * h), atol=2e-5)
        gp = interp2_c1(g2r, x, y + h, self.WIDTH)[0]
        gm = interp2_c1(g2r, x, y - h, self.WIDTH)[0]
        np.testing.assert_allclose(fy, (gp - gm) / (2 * h), atol=2e-5)

    def test_mixed_second_matches_fd(self, g2r):
        rng = np.random.default_rng(9)
        x = rng.uniform(0.2, 3.8, 200)
        y = rng.uniform(-0.8, 1.8, 200)
        h = 1e-5
        _, fx, _, _, fxy, _ = interp2_c1(g2r, x, y, self.WIDTH)
        fxp = interp2_c1(g2r, x, y + h, self.WIDTH)[1]
        fxm = interp2_c1(g2r, x, y - h, self.WIDTH)[1]
        np.testing.assert_allclose(fxy, (fxp - fxm) / (2 * h), atol=2e-4)

    def test_clamped_outside_domain(self, g2r):
        f = interp2_c1(g2r, np.array([-3.0]), np.array([9.0]), self.WIDTH)[0]
        assert abs(f[0] - interp2(g2r, -3.0, 9.0)) < 1e-13
