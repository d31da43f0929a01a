"""Each compiled kernel against its pure-numpy twin."""

import numpy as np
import pytest
import scipy.signal

from ccbr import kernels
from ccbr._accel import HAVE_NUMBA
from ccbr.features import butter_bandpass_sos

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


class TestKernelAgreement:
    def test_jacobi(self, rng):
        a = rng.standard_normal((25, 25))
        a = a + a.T
        w1, v1, s1 = kernels.jacobi_eigh_nb(a.copy(), 1e-12, 100)
        w2, v2, s2 = kernels.jacobi_eigh_np(a.copy(), 1e-12, 100)
        np.testing.assert_allclose(w1, w2, atol=1e-10)
        np.testing.assert_allclose(np.abs(v1), np.abs(v2), atol=1e-8)
        np.testing.assert_allclose(np.sort(w1), np.linalg.eigvalsh(a), atol=1e-10)
        assert s1 == s2

    def test_sosfilt(self, rng):
        sos = butter_bandpass_sos(300.0, 1000.0, 10000.0)
        x = rng.standard_normal((3, 4000))
        a = kernels.sosfilt_nb(sos, x)
        b = kernels.sosfilt_np(sos, x)
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(a, scipy.signal.sosfilt(sos, x, axis=-1), rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("refractory", [0, 3, 30])
    def test_threshold_crossings(self, rng, refractory):
        x = rng.standard_normal(5000)
        a = kernels.threshold_crossings_nb(x, -1.5, refractory)
        b = kernels.threshold_crossings_np(x, -1.5, refractory)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("min_leaf", [1, 5])
    def test_best_axis_split(self, rng, min_leaf):
        x = np.round(rng.standard_normal((120, 4)), 1)
        y = rng.integers(0, 3, 120)
        fa, ta, ia = kernels.best_axis_split_nb(x, y, 3, min_leaf)
        fb, tb, ib = kernels.best_axis_split_np(x, y, 3, min_leaf)
        assert fa == fb
        assert ta == pytest.approx(tb)
        assert ia == pytest.approx(ib, rel=1e-12)

    def test_l1_distances(self, rng):
        x, c = rng.standard_normal((50, 6)), rng.standard_normal((4, 6))
        np.testing.assert_allclose(kernels.l1_distances_nb(x, c), kernels.l1_distances_np(x, c), rtol=1e-12)
        np.testing.assert_allclose(kernels.l1_distances_np(x, c), np.abs(x[:, None] - c[None]).sum(-1), rtol=1e-12)

    def test_svm_dual_cd(self, rng):
        x = rng.standard_normal((80, 3))
        y = np.where(x[:, 0] + 0.3 * rng.standard_normal(80) > 0, 1.0, -1.0)
        order = np.arange(80, dtype=np.int64)
        wa, aa, ea = kernels.svm_dual_cd_nb(x, y, 1.0, 1e-6, 1000, order)
        wb, ab, eb = kernels.svm_dual_cd_np(x, y, 1.0, 1e-6, 1000, order)
        np.testing.assert_allclose(wa, wb, atol=1e-9)
        np.testing.assert_allclose(aa, ab, atol=1e-9)
        assert ea == eb

    def test_softmax_residual(self, rng):
        z = rng.standard_normal((200, 7)) * 5
        labels = rng.integers(0, 7, 200)
        za, zb = z.copy(), z.copy()
        la = kernels.softmax_residual_nb(za, labels)
        lb = kernels.softmax_residual_np(zb, labels)
        np.testing.assert_allclose(za, zb, rtol=1e-12, atol=1e-15)
        assert la == pytest.approx(lb, rel=1e-12)
        p = np.exp(z - z.max(1, keepdims=True))
        p /= p.sum(1, keepdims=True)
        np.testing.assert_allclose(zb + np.eye(7)[labels], p, atol=1e-12)
        assert lb == pytest.approx(-np.log(p[np.arange(200), labels]).sum(), rel=1e-10)
