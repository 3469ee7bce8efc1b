import numpy as np
import pytest

from hsindt import Hypercube, KIND_FEATURE, KIND_RAW, KIND_REFLECTANCE


def random_cube(i=3, j=4, b=5, seed=0, **kw):
    rng = np.random.default_rng(seed)
    return Hypercube(rng.uniform(size=(i, j, b)), **kw)


def test_shape_properties():
    c = random_cube(3, 4, 5)
    assert (c.lines, c.samples, c.bands) == (3, 4, 5)
    assert c.shape == (3, 4, 5)


def test_values_immutable():
    c = random_cube()
    with pytest.raises(ValueError):
        c.values[0, 0, 0] = 1.0


def test_wavelength_validation():
    with pytest.raises(ValueError):
        random_cube(b=3, wavelengths=[950.0, 940.0, 960.0])
    with pytest.raises(ValueError):
        random_cube(b=3, wavelengths=[950.0, 960.0])


def test_kind_transition_monotone():
    c = random_cube(kind=KIND_REFLECTANCE)
    with pytest.raises(ValueError):
        c.derive(c.values, kind=KIND_RAW)
    # feature cubes may derive from any kind
    f = c.derive(c.values, kind=KIND_FEATURE)
    assert f.kind == KIND_FEATURE


def test_provenance_append_only_and_deterministic():
    c1 = random_cube(seed=1).derive(np.zeros((3, 4, 5)), step="op(a=1)")
    c2 = random_cube(seed=1).derive(np.zeros((3, 4, 5)), step="op(a=1)")
    assert c1.provenance == c2.provenance == ("op(a=1)",)


def test_spectrum_at_constant_cube():
    c = Hypercube(np.full((2, 3, 4), 0.7))
    assert np.array_equal(c.spectrum_at(1, 2), [0.7] * 4)


def test_spectrum_at_band_ramp():
    v = np.tile(np.arange(6.0), (2, 3, 1))
    c = Hypercube(v)
    assert np.array_equal(c.spectrum_at(0, 0), np.arange(6.0))


def test_spectrum_at_matches_triple_loop_oracle():
    rng = np.random.default_rng(42)
    v = rng.normal(size=(3, 3, 4))
    c = Hypercube(v)
    for i in range(3):
        for j in range(3):
            for b in range(4):
                assert c.spectrum_at(i, j)[b] == v[i, j, b]


def test_spectrum_at_out_of_range():
    c = random_cube()
    with pytest.raises(IndexError):
        c.spectrum_at(3, 0)


def test_slice_band_agrees_with_spectrum_at():
    c = random_cube(4, 5, 6, seed=3)
    for b in range(c.bands):
        plane = c.slice_band(b)
        for i in range(c.lines):
            for j in range(c.samples):
                assert plane[i, j] == c.spectrum_at(i, j)[b]


def test_slice_band_single_band_cube():
    v = np.arange(12.0).reshape(3, 4, 1)
    c = Hypercube(v)
    assert np.array_equal(c.slice_band(0), v[:, :, 0])


def test_slice_band_by_wavelength_nearest():
    wl = np.arange(950.0, 1701.0, 10.0)
    c = random_cube(2, 2, wl.size, wavelengths=wl)
    # 1267 nm resolves to the 1270 band
    assert c.band_index(1267.0) == int(np.argmin(np.abs(wl - 1267.0)))
    np.testing.assert_array_equal(
        c.slice_band(wavelength_nm=1267.0), c.slice_band(c.band_index(1267.0)))


def test_wavelength_midpoint_tie_goes_lower():
    c = random_cube(1, 1, 2, wavelengths=[1140.0, 1150.0])
    assert c.band_index(1145.0) == 0
    # and 1146 is simply nearest
    assert c.band_index(1146.0) == 1


def test_wavelength_out_of_axis():
    c = random_cube(1, 1, 2, wavelengths=[1140.0, 1150.0])
    with pytest.raises(ValueError):
        c.band_index(900.0)


def test_band_plane_is_contiguous():
    c = random_cube(4, 5, 6)
    assert c.slice_band(2).flags["C_CONTIGUOUS"]
