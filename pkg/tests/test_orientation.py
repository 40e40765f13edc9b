import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinclock import orientation as ori
from spinclock import spincore, thermo
from spinclock.spincore import SpinSystem
from spinclock.thermo import DomainError


def distinct_spectra(sys, frames, h_lab, tol=1e-9):
    specs = [spincore.levels(sys, R.T @ h_lab, vectors=False).energies for R in frames]
    out = []
    for s in specs:
        if not any(np.allclose(s, o, atol=tol) for o in out):
            out.append(s)
    return len(out)


class TestSampling:
    def test_degenerate_cone(self):
        o = ori.generate_orientations(ori.Cone(0.0))
        assert len(o) == 1
        np.testing.assert_allclose(o[0][0], np.eye(3))

    @pytest.mark.parametrize("ap", [-0.1, np.pi / 2 + 0.01, np.pi])
    def test_aperture_domain(self, ap):
        with pytest.raises(DomainError):
            ori.generate_orientations(ori.Cone(ap))

    @pytest.mark.parametrize("n", [10, 100, 350, 1000])
    def test_powder_mean_projection(self, n):
        o = ori.generate_orientations(ori.RandomPowder(n))
        z = np.array([(R.T @ [0, 0, 1.0])[2] for R, _ in o])
        assert abs(z.mean()) < 3 / np.sqrt(n)
        assert sum(w for _, w in o) == pytest.approx(1.0)

    def test_default_resolution_integral(self):
        o = ori.generate_orientations(ori.RandomPowder())
        z = np.array([(R.T @ [0, 0, 1.0])[2] for R, _ in o])
        assert np.mean(z**2) == pytest.approx(1 / 3, rel=0.005)

    def test_cone_points_inside_aperture(self):
        ap = np.radians(30)
        for R, _ in ori.generate_orientations(ori.Cone(ap, 200)):
            assert (R.T @ [0, 0, 1.0])[2] >= np.cos(ap) - 1e-12

    def test_rotation_to_maps_field(self):
        R = ori.rotation_to(0.3, 1.1)
        np.testing.assert_allclose(R.T @ [0, 0, 1.0], [np.sin(0.3) * np.cos(1.1), np.sin(0.3) * np.sin(1.1), np.cos(0.3)])
        np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-14)


class TestCrystalSites:
    def test_ops_orthogonal(self):
        for op in ori.P21N_OPS:
            np.testing.assert_allclose(op.matrix.T @ op.matrix, np.eye(3), atol=1e-12)
            assert abs(op.det) == 1
        with pytest.raises(ValueError):
            ori.SymmetryOp(np.diag([1.0, 2.0, 1.0]), "bad")

    @pytest.fixture
    def c4(self):
        return SpinSystem.from_units(1, -2.71, 0.105, 2.16)

    def test_field_along_b(self, c4):
        frames = ori.crystal_site_frames(52.6)
        assert len(frames) == 4
        assert distinct_spectra(c4, frames, np.array([0, 0.7, 0])) == 1

    @given(st.floats(0, 2 * np.pi), st.floats(0.05, 3))
    def test_field_in_ac_plane(self, phi, H):
        c4 = SpinSystem.from_units(1, -2.71, 0.105, 2.16)
        h = H * np.array([np.cos(phi), 0.0, np.sin(phi)])
        assert distinct_spectra(c4, ori.crystal_site_frames(52.6), h) == 1

    def test_generic_frame_at_most_two(self, c4, rng):
        # a reference frame with no special relation to b
        R0 = ori.axis_rotation(rng.normal(size=3), 1.0)
        frames = [op.det * op.matrix @ R0 for op in ori.P21N_OPS]
        for _ in range(5):
            assert distinct_spectra(c4, frames, rng.normal(size=3)) <= 2

    def test_frames_are_rotations(self):
        for R in ori.crystal_site_frames(52.6):
            np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
            assert np.linalg.det(R) == pytest.approx(1.0)


class TestAveraging:
    def test_single_orientation_equals_direct(self):
        sys = SpinSystem(1, -3.0, 0.3, (2.0, 2.1, 2.2))
        T = thermo.log_grid(0.2, 10, 50)
        th = np.radians(40)
        c = ori.averaged_observable(sys, ori.SingleAngle(th), "specific_heat", T, 0.8)
        field = 0.8 * np.array([np.sin(th), 0, np.cos(th)])
        direct = thermo.specific_heat(spincore.levels(sys, field, vectors=False), T)
        np.testing.assert_allclose(c.values, direct.values, rtol=1e-12)

    @pytest.mark.parametrize("scheme", [ori.RandomPowder(60), ori.Cone(0.7, 40), ori.SingleAngle(1.0, 0.4)])
    def test_isotropic_invariance(self, scheme):
        sys = SpinSystem(1.5, 0.0, 0.0, 2.0)
        T = thermo.log_grid(0.2, 10, 30)
        ref = ori.averaged_observable(sys, ori.SingleAngle(0.0), "specific_heat", T, 1.3)
        avg = ori.averaged_observable(sys, scheme, "specific_heat", T, 1.3)
        np.testing.assert_allclose(avg.values, ref.values, atol=1e-10)
        m_ref = ori.averaged_observable(sys, ori.SingleAngle(0.0), "magnetization", [0.5, 2.0], T=2.0)
        m = ori.averaged_observable(sys, scheme, "magnetization", [0.5, 2.0], T=2.0)
        np.testing.assert_allclose(m.values, m_ref.values, atol=1e-10)

    def test_hemisphere_cone_equals_powder(self):
        sys = SpinSystem.from_units(1, -100, 1.45, 2.2)
        T = thermo.log_grid(0.5, 10, 60)
        a = ori.averaged_observable(sys, ori.Cone(np.pi / 2, 350), "specific_heat", T, 1.0)
        b = ori.averaged_observable(sys, ori.RandomPowder(350), "specific_heat", T, 1.0)
        np.testing.assert_allclose(a.values, b.values, atol=5e-3)

    def test_effective_gap_of_two_levels(self):
        sys = SpinSystem(0.5, 0.0, 0.0, 2.0)
        H = 1.5
        c = ori.averaged_observable(sys, ori.SingleAngle(0.3), "specific_heat", thermo.log_grid(0.3, 3, 2000), H)
        from spinclock.units import MUB_OVER_KB

        assert ori.effective_gap(c) == pytest.approx(2.0 * MUB_OVER_KB * H, rel=1e-5)

    def test_unknown_observable(self):
        with pytest.raises(ValueError):
            ori.averaged_observable(SpinSystem(1, -1.0, 0.0), ori.SingleAngle(), "entropy", [1.0])

    def test_magnetization_isotherms_do_not_scale(self):
        sys = SpinSystem.from_units(1, -2.96, 0.06, 2.16)
        orient = ori.generate_orientations(ori.RandomPowder(100))
        x = np.array([0.25, 0.5, 1.0])  # mu0 H / T
        curves = [ori.averaged_magnetization(sys, orient, x * T, T)[np.arange(3), 0] for T in (2.0, 4.0, 6.0)]
        assert np.max(np.abs(curves[0] - curves[2])) > 0.02

    def test_chiT_has_tip(self):
        sys = SpinSystem(1, 0.0, 0.0, 2.0)
        a = ori.averaged_observable(sys, ori.RandomPowder(20), "chiT", [100.0], 0.1, tip=0.0)
        b = ori.averaged_observable(sys, ori.RandomPowder(20), "chiT", [100.0], 0.1, tip=1e-4)
        assert b.values[0] - a.values[0] == pytest.approx(1e-2)


@pytest.fixture(scope="module")
def sweep():
    sys = SpinSystem.from_units(1, -2.71, 0.105, 2.16)
    frames = ori.crystal_site_frames(52.6)
    angles = np.arange(0, 361, 15.0)
    return angles, ori.rotation_sweep(sys, frames, (0, 0, 1), (1, 0, 0), angles, 0.1, 5.0)


class TestRotationSweep:
    def test_extremes(self, sweep):
        angles, curve = sweep
        assert angles[np.argmax(curve.values)] % 180 == 0      # field along a
        assert angles[np.argmin(curve.values)] % 180 == 90     # field along b

    def test_period(self, sweep):
        angles, curve = sweep
        half = len(angles) // 2
        np.testing.assert_allclose(curve.values[:half], curve.values[half:2 * half], rtol=1e-10)
