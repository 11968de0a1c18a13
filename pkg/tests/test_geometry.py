import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arisbh.errors import GeometryError
from arisbh.geometry import (
    RisGeometry,
    SourceArray,
    array_response,
    build_channels,
    path_loss,
    sin_aod,
)

ORIGIN = np.zeros(3)


class TestPathLoss:
    def test_reference_gain_at_one_meter(self):
        # sub-6 GHz reference: -43.3 dB at 1 m
        beta0 = 10 ** (-4.33)
        assert path_loss(beta0, ORIGIN, np.array([1.0, 0, 0])) == pytest.approx(beta0, rel=1e-12)

    def test_unit_gain_at_reference_distance(self):
        assert path_loss(1.0, ORIGIN, np.array([0, 1.0, 0])) == 1.0

    def test_inverse_square_at_kilometer(self):
        assert path_loss(1.0, ORIGIN, np.array([0, 0, 1000.0])) == pytest.approx(1e-6, rel=1e-12)

    def test_symmetric_in_endpoints(self):
        a, b = np.array([3.0, -4.0, 12.0]), np.array([-1.0, 2.0, 7.0])
        assert path_loss(0.7, a, b) == path_loss(0.7, b, a)

    def test_strictly_decreasing_in_distance(self):
        d = np.linspace(1.0, 500.0, 50)
        vals = [path_loss(1.0, ORIGIN, np.array([x, 0, 0])) for x in d]
        assert all(u > v for u, v in zip(vals, vals[1:]))

    def test_zero_distance_rejected(self):
        with pytest.raises(GeometryError):
            path_loss(1.0, ORIGIN, ORIGIN)


class TestSinAod:
    def test_no_x_displacement_is_broadside(self):
        assert sin_aod(np.zeros(2), 180.0, np.array([0.0, 300.0, 0.0])) == 0.0

    def test_boresight_along_x(self):
        assert sin_aod(np.zeros(2), 0.0, np.array([100.0, 0.0, 0.0])) == pytest.approx(1.0)

    def test_distant_uav_value(self):
        # 1000 / sqrt(1000^2 + 135^2), the platform 135 m above the UAV
        got = sin_aod(np.zeros(2), 180.0, np.array([1000.0, 0.0, 45.0]))
        assert got == pytest.approx(0.9910101944628167, rel=1e-12)

    def test_coincident_points_rejected(self):
        with pytest.raises(GeometryError):
            sin_aod(np.array([5.0, 2.0]), 30.0, np.array([5.0, 2.0, 30.0]))

    @settings(max_examples=200, deadline=None, derandomize=True)
    @given(
        qx=st.floats(-500, 500), qy=st.floats(-500, 500),
        tx=st.floats(-2000, 2000), ty=st.floats(-2000, 2000), tz=st.floats(0, 500),
        h=st.floats(1, 400), scale=st.floats(0.01, 100),
    )
    def test_bounded_and_scale_invariant(self, qx, qy, tx, ty, tz, h, scale):
        q = np.array([qx, qy])
        t = np.array([tx, ty, tz])
        if np.linalg.norm(np.array([qx, qy, h]) - t) < 1e-6:
            return
        s = sin_aod(q, h, t)
        assert -1.0 <= s <= 1.0
        assert sin_aod(scale * q, scale * h, scale * t) == pytest.approx(s, abs=1e-9)


class TestArrayResponse:
    def test_broadside_is_all_ones(self):
        for count in (1, 4, 17):
            np.testing.assert_allclose(array_response(count, 0.37, 0.0), np.ones(count))

    def test_endfire_half_wavelength_pair(self):
        np.testing.assert_allclose(
            array_response(2, 0.5, 1.0), np.array([1.0, -1.0]), atol=1e-12
        )

    def test_three_element_progression(self):
        got = array_response(3, 0.1, 0.5)
        want = np.exp(-2j * np.pi * 0.05 * np.arange(3))
        np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_unit_magnitude_entries(self):
        got = array_response(64, 0.1, -0.73)
        np.testing.assert_allclose(np.abs(got), 1.0, rtol=1e-12)

    def test_needs_one_element(self):
        with pytest.raises(ValueError):
            array_response(0, 0.5, 0.0)


class TestBuildChannels:
    beta0 = 10 ** (-4.33)
    src1 = SourceArray(m_antennas=1, spacing_wavelengths=0.5, gain=1.0, p_max=0.1)

    def test_degenerate_scalar_channel(self):
        ris = RisGeometry(n_elements=1, spacing_wavelengths=0.1, altitude=180.0, wavelength=0.0857)
        link, _ = build_channels(
            self.beta0, self.src1, ris, np.array([40.0, 0.0]), [], rng_seed=0,
            zero_random_phase=True,
        )
        d = np.hypot(40.0, 180.0)
        assert abs(link.matrix[0, 0]) == pytest.approx(np.sqrt(self.beta0) / d, rel=1e-12)
        # only the deterministic distance phase remains
        want = np.sqrt(link.path_loss) * np.exp(1j * link.distance_phase)
        np.testing.assert_allclose(link.matrix[0, 0], want, rtol=1e-12)

    def test_every_entry_has_sqrt_path_loss_magnitude(self):
        src = SourceArray(m_antennas=8, spacing_wavelengths=0.5, gain=1.0, p_max=0.1)
        ris = RisGeometry(n_elements=32, spacing_wavelengths=0.1, altitude=150.0, wavelength=0.0857)
        uavs = [np.array([900.0, 120.0, 45.0]), np.array([1100.0, -60.0, 50.0])]
        link, uav_links = build_channels(self.beta0, src, ris, np.array([30.0, 5.0]), uavs, rng_seed=3)
        np.testing.assert_allclose(np.abs(link.matrix), np.sqrt(link.path_loss), rtol=1e-12)
        for ul in uav_links:
            np.testing.assert_allclose(np.abs(ul.matrix), np.sqrt(ul.path_loss), rtol=1e-12)

    def test_source_link_is_rank_one(self):
        src = SourceArray(m_antennas=16, spacing_wavelengths=0.5, gain=1.0, p_max=0.1)
        ris = RisGeometry(n_elements=64, spacing_wavelengths=0.1, altitude=180.0, wavelength=0.0857)
        link, _ = build_channels(self.beta0, src, ris, np.array([55.0, -10.0]), [], rng_seed=11)
        sv = np.linalg.svd(link.matrix, compute_uv=False)
        assert sv[1] < 1e-10 * sv[0]

    def test_outer_product_reconstruction(self):
        src = SourceArray(m_antennas=2, spacing_wavelengths=0.5, gain=1.0, p_max=0.1)
        ris = RisGeometry(n_elements=2, spacing_wavelengths=0.1, altitude=180.0, wavelength=0.0857)
        q = np.array([40.0, 10.0])
        link, _ = build_channels(self.beta0, src, ris, q, [], rng_seed=7)
        a_ris = array_response(2, 0.1, link.sin_arrival)
        a_src = array_response(2, 0.5, link.sin_departure)
        want = (
            np.sqrt(link.path_loss)
            * np.exp(1j * (link.random_phase + link.distance_phase))
            * np.outer(a_ris, a_src.conj())
        )
        np.testing.assert_allclose(link.matrix, want, rtol=1e-12)

    def test_seed_determinism(self):
        src = SourceArray(m_antennas=4, spacing_wavelengths=0.5, gain=1.0, p_max=0.1)
        ris = RisGeometry(n_elements=8, spacing_wavelengths=0.1, altitude=180.0, wavelength=0.0857)
        uavs = [np.array([1000.0, 0.0, 45.0])]
        a1, u1 = build_channels(self.beta0, src, ris, np.array([40.0, 0.0]), uavs, rng_seed=5)
        a2, u2 = build_channels(self.beta0, src, ris, np.array([40.0, 0.0]), uavs, rng_seed=5)
        np.testing.assert_array_equal(a1.matrix, a2.matrix)
        np.testing.assert_array_equal(u1[0].matrix, u2[0].matrix)
        a3, _ = build_channels(self.beta0, src, ris, np.array([40.0, 0.0]), uavs, rng_seed=6)
        assert not np.allclose(a1.matrix, a3.matrix)
