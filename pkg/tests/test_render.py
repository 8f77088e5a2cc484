import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vvpairs.optics import pi_mode, vv_state
from vvpairs.qcore import PureState, order_basis, POL_BASIS
from vvpairs.render import (
    FieldGrid,
    count_petals,
    field_at,
    petal_analysis,
    polarizer_intensity,
    read_ppm,
    stokes_map,
    transverse_field,
    write_grid_csv,
    write_ppm,
    write_profile_csv,
)


def circular(m):
    return PureState.ket(order_basis(m), ("R", m))


class TestField:
    def test_central_null(self):
        e = field_at(vv_state(1), 0.0, 0.0)
        assert np.all(np.abs(e) == 0)

    def test_rejects_zero_oam(self):
        with pytest.raises(ValueError):
            field_at(PureState.ket(POL_BASIS, ("R", 0)), 0.5, 0.5)
        with pytest.raises(ValueError):
            transverse_field(PureState.ket(POL_BASIS, ("R", 0)))

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            transverse_field(vv_state(1), size=32)
        with pytest.raises(ValueError):
            transverse_field(vv_state(1), extent=0)

    @pytest.mark.parametrize("m", [1, 3, 10])
    def test_equal_power(self, m):
        a = transverse_field(vv_state(m, "radial")).power
        b = transverse_field(vv_state(m, "azimuthal")).power
        assert a == pytest.approx(b, abs=1e-9)


class TestStokes:
    def test_circular_uniform(self):
        s = stokes_map(transverse_field(circular(2), size=64))
        s1, s2, s3 = s.normalized()
        mask = s.S0 > 1e-12
        np.testing.assert_allclose(s3[mask], 1.0, atol=1e-12)

    def test_radial_orientation(self):
        f = transverse_field(vv_state(1), size=64)
        s = stokes_map(f)
        _, _, s3 = s.normalized()
        assert np.max(np.abs(s3)) < 1e-12
        xx, yy = np.meshgrid(f.coords, f.coords)
        phi = np.arctan2(yy, xx)
        diff = np.angle(np.exp(2j * (s.orientation() - phi))) / 2  # modulo pi
        assert np.max(np.abs(diff)) < 1e-6

    def test_azimuthal_orientation(self):
        f = transverse_field(vv_state(1, "azimuthal"), size=64)
        s = stokes_map(f)
        xx, yy = np.meshgrid(f.coords, f.coords)
        phi = np.arctan2(yy, xx) + np.pi / 2
        diff = np.angle(np.exp(2j * (s.orientation() - phi))) / 2
        assert np.max(np.abs(diff)) < 1e-6

    def test_planes(self):
        assert set(stokes_map(transverse_field(vv_state(1), size=64)).planes()) == {"S0", "S1", "S2", "S3"}


class TestPolarizer:
    def test_circular_halved(self):
        f = transverse_field(circular(1), size=64)
        np.testing.assert_allclose(polarizer_intensity(f, 0.3), f.intensity / 2, atol=1e-14)

    @given(st.sampled_from([1, 2, 5]), st.floats(0, np.pi), st.floats(-1, 1))
    @settings(max_examples=30, deadline=None)
    def test_rotation_rule(self, m, alpha, delta):
        # I_{alpha + delta}(r, phi + delta/m) == I_alpha(r, phi)
        phi = np.linspace(0, 2 * np.pi, 50)
        r = 1.0
        state = vv_state(m)

        def intensity(angle, ph):
            e = field_at(state, r * np.cos(ph), r * np.sin(ph))
            return polarizer_intensity(FieldGrid(len(ph), 1.0, e), angle)

        np.testing.assert_allclose(intensity(alpha + delta, phi + delta / m), intensity(alpha, phi), atol=1e-12)


class TestPetals:
    @pytest.mark.parametrize("m,expected", [(1, 2), (5, 10), (10, 20)])
    def test_horizontal_polarizer(self, m, expected):
        f = transverse_field(vv_state(m), size=256, extent=3.0)
        assert count_petals(polarizer_intensity(f, 0.0)) == expected

    @pytest.mark.parametrize("which", ["radial", "azimuthal"])
    @pytest.mark.parametrize("m", [1, 3, 5, 10])
    def test_any_angle(self, m, which):
        f = transverse_field(vv_state(m, which), size=256, extent=3.0)
        for angle in np.linspace(0, np.pi, 5, endpoint=False):
            assert count_petals(polarizer_intensity(f, angle)) == 2 * m

    def test_pi_mode_petals(self):
        f = transverse_field(pi_mode(3, "-"), size=256)
        assert count_petals(polarizer_intensity(f, 0.4)) == 6

    def test_no_polarizer_uniform(self):
        res = petal_analysis(transverse_field(vv_state(1)).intensity)
        assert res.uniform and res.count == 0

    def test_empty_image(self):
        with pytest.raises(ValueError):
            petal_analysis(np.zeros((64, 64)))


class TestOutput:
    def test_ppm_round_trip(self, tmp_path):
        f = transverse_field(vv_state(2), size=64)
        img = polarizer_intensity(f, 0.0)
        path = tmp_path / "a.ppm"
        write_ppm(path, img)
        assert path.read_bytes().startswith(b"P6\n64 64\n255\n")
        pix = read_ppm(path)
        assert pix.shape == (64, 64, 3)
        assert pix.max() == 255
        np.testing.assert_array_equal(pix[..., 0], pix[..., 2])

    def test_ppm_rejects_other_formats(self, tmp_path):
        path = tmp_path / "b.ppm"
        path.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
        with pytest.raises(ValueError):
            read_ppm(path)

    def test_csv(self, tmp_path):
        f = transverse_field(vv_state(2), size=64)
        res = petal_analysis(polarizer_intensity(f, 0.0))
        write_profile_csv(tmp_path / "p.csv", res)
        lines = (tmp_path / "p.csv").read_text().splitlines()
        assert lines[0] == "angle_rad,intensity" and len(lines) == 721
        write_grid_csv(tmp_path / "g.csv", f.intensity)
        assert np.loadtxt(tmp_path / "g.csv", delimiter=",").shape == (64, 64)
