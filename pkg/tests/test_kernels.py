import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from optspline.errors import DegreeTooLarge, GridMismatch
from optspline.kernels import (CompactKernel, SampledFunction, bspline_eval, bspline_kernel,
                               cardinal_spline, check_degree, derivative_jumps, hat_transform,
                               kernel_eval)
from optspline.metrics import hat_snr
from optspline.resample import baseline_kernels
from optspline.seqalg import DiscreteSequence

from oracles import bspline_cox_de_boor

DEGREES = [1, 3, 5, 7]


class TestBspline:
    @pytest.mark.parametrize("m,t,want", [(3, 2.0, 2 / 3), (1, 1.0, 1.0), (3, -0.5, 0.0), (3, 4.0, 0.0)])
    def test_values(self, m, t, want):
        assert bspline_eval(m, t) == pytest.approx(want, abs=1e-15)

    @pytest.mark.parametrize("m", DEGREES + [9, 11, 21])
    def test_matches_recursion(self, m):
        t = np.linspace(-1, m + 2, 997)
        np.testing.assert_allclose(bspline_eval(m, t), bspline_cox_de_boor(m, t), atol=1e-12)
        np.testing.assert_allclose(bspline_kernel(m)(t), bspline_cox_de_boor(m, t), atol=1e-12)

    @pytest.mark.parametrize("m", DEGREES)
    def test_partition_of_unity(self, m):
        k = bspline_kernel(m)
        t = np.random.default_rng(m).uniform(-50, 50, 200)
        total = sum(k(t - n) for n in range(-60, 60))
        assert np.max(np.abs(total - 1.0)) < 1e-12

    @pytest.mark.parametrize("m", DEGREES)
    def test_support_minimal(self, m):
        k = bspline_kernel(m)
        eps = 1e-3
        assert k(m + 1 - eps) > 0 and k(eps) > 0
        assert k(m + 1) == 0 and k(m + 1.5) == 0 and k(0.0) == 0 and k(-0.1) == 0

    @pytest.mark.parametrize("m", DEGREES + [9])
    def test_smoothness_exact(self, m):
        k = bspline_kernel(m)
        for order in range(m):
            assert np.max(np.abs(derivative_jumps(k, order))) < 1e-9, order
        assert np.min(np.abs(derivative_jumps(k, m))) > 1e-3

    def test_smoothness_finite_difference(self):
        # one-sided second-order differences at resolution 1e-4 on both sides of each knot
        h = 1e-4
        f = lambda t: bspline_eval(3, t)
        for knot in range(5):
            left = [f(knot - i * h) for i in range(4)]
            right = [f(knot + i * h) for i in range(4)]
            d1l = (3 * left[0] - 4 * left[1] + left[2]) / (2 * h)
            d1r = -(3 * right[0] - 4 * right[1] + right[2]) / (2 * h)
            d2l = (2 * left[0] - 5 * left[1] + 4 * left[2] - left[3]) / h ** 2
            d2r = (2 * right[0] - 5 * right[1] + 4 * right[2] - right[3]) / h ** 2
            assert abs(d1l - d1r) < 1e-6
            assert abs(d2l - d2r) < 1e-6

    def test_integer_samples(self):
        k = bspline_kernel(3)
        assert k.integer_samples.offset == 1
        np.testing.assert_allclose(k.integer_samples.values, [1 / 6, 4 / 6, 1 / 6], atol=1e-16)
        assert bspline_kernel(1).integer_samples.values.tolist() == [1.0]

    def test_degree_checks(self):
        for bad in (0, 2, -1, 4):
            with pytest.raises(ValueError):
                check_degree(bad)
        with pytest.raises(DegreeTooLarge):
            check_degree(23)
        assert check_degree(21) == 21


class TestKernelEval:
    def test_outside(self):
        for k in [bspline_kernel(3), bspline_kernel(3).sampled(16)]:
            assert kernel_eval(k, -1.0) == 0.0 and kernel_eval(k, 4.5) == 0.0

    def test_sampled_grid_exact(self):
        k = bspline_kernel(5).sampled(32)
        i = np.arange(1, 6 * 32)
        np.testing.assert_array_equal(kernel_eval(k, i / 32), np.concatenate(k.segments[:, :32])[1:] if False else
                                      np.array([k.segments[j // 32, j % 32] for j in i]))

    def test_sampled_linear_between(self):
        k = bspline_kernel(1).sampled(4)
        assert kernel_eval(k, 0.125) == pytest.approx(0.125)

    def test_json_round_trip(self):
        for k in [bspline_kernel(3), bspline_kernel(3).sampled(8)]:
            k2 = CompactKernel.from_dict(json.loads(json.dumps(k.to_dict())))
            t = np.linspace(-1, 5, 301)
            np.testing.assert_array_equal(k(t), k2(t))

    def test_bad_shapes(self):
        with pytest.raises(ValueError):
            CompactKernel(3, "sampled", np.zeros((4, 5)), DiscreteSequence(1, [1.0]), q=8)
        with pytest.raises(ValueError):
            CompactKernel(3, "weird", np.zeros((4, 4)), DiscreteSequence(1, [1.0]))


class TestHat:
    KERNELS = {
        "bspline1": bspline_kernel(1),
        "bspline3": bspline_kernel(3),
        "bspline5": bspline_kernel(5),
        "keys": baseline_kernels()["bicubic"],
        "sampled_rho": CompactKernel(
            3, "sampled",
            np.array([[0, .1, .235], [.235, .4, .484], [.484, .4, .235], [.235, .1, 0]]),
            DiscreteSequence(1, [.235, .484, .235]), q=2),
    }

    @pytest.mark.parametrize("name", sorted(KERNELS))
    def test_interpolation_property(self, name):
        tol = 1e-10
        h = hat_transform(self.KERNELS[name], tol, 16, 8)
        lat = h.lattice(0)
        delta = np.zeros(len(lat))
        delta[-lat.offset] = 1.0
        assert np.max(np.abs(lat.values - delta)) <= 10 * tol

    def test_linear_is_centred_hat(self):
        h = cardinal_spline(1, halfwidth=4, q=8)
        np.testing.assert_allclose(h.values, np.maximum(1 - np.abs(h.t), 0.0), atol=1e-15)

    def test_cardinal_interpolates(self):
        h = cardinal_spline(3)
        lat = h.lattice(0)
        assert lat[0] == pytest.approx(1.0, abs=1e-9)
        assert max(abs(lat[n]) for n in range(-16, 17) if n) < 1e-9

    @pytest.mark.parametrize("c", [2.0, -0.5, 1e-3, 37.0])
    def test_scale_invariance(self, c):
        k = bspline_kernel(3)
        ck = CompactKernel(3, "poly", k.segments * c, k.integer_samples.scaled(c))
        a, b = hat_transform(k), hat_transform(ck)
        np.testing.assert_allclose(a.values, b.values, atol=1e-9)

    def test_cardinal_snr_grows_with_degree(self):
        s = [hat_snr(bspline_kernel(m)) for m in (1, 3, 5)]
        assert s[0] < s[1] < s[2]

    def test_cardinal_cubic_snr(self):
        # whole-line SNR against sinc with the window [-16, 16] at Q = 64
        assert hat_snr(bspline_kernel(3)) == pytest.approx(13.15, abs=0.05)

    def test_halfwidth_too_small(self):
        with pytest.raises(ValueError):
            hat_transform(bspline_kernel(5), halfwidth=3)


class TestSampledFunction:
    def test_grid(self):
        f = SampledFunction.from_function(np.sinc, -2, 2, 4)
        assert f.start == -8 and len(f) == 17 and f.origin == -2.0
        assert f(0.0) == 1.0

    def test_lattice_phase(self):
        f = SampledFunction(-8, 4, np.arange(17.0))
        lat = f.lattice(1)
        assert lat.offset == -2 and lat.values.tolist() == [1.0, 5.0, 9.0, 13.0]

    @given(st.integers(-20, 20), st.integers(2, 16), st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=40))
    def test_csv_round_trip(self, start, q, vals):
        f = SampledFunction(start, q, np.array(vals))
        g = SampledFunction.from_csv(f.to_csv())
        assert g.same_grid(f) and np.array_equal(g.values, f.values)

    def test_csv_off_lattice(self):
        with pytest.raises(GridMismatch):
            SampledFunction.from_csv("t,value\n0.1,1\n0.35,2\n0.6,3\n")

    def test_energy(self):
        f = SampledFunction(0, 4, np.ones(8))
        assert f.energy() == 2.0
