import numpy as np
import pytest

from hsindt import EnviFormatError, Hypercube, read_envi, write_envi
from hsindt.envi import DTYPE_CODES, read_header

INTERLEAVES = ("bsq", "bil", "bip")


def _random_cube(shape, code, seed):
    rng = np.random.default_rng(seed)
    dt = DTYPE_CODES[code]
    if np.issubdtype(dt, np.integer):
        info = np.iinfo(dt)
        vals = rng.integers(info.min, info.max, size=shape, endpoint=True)
    else:
        vals = rng.normal(size=shape).astype(dt)
    return Hypercube(np.asarray(vals, dtype=np.float64))


@pytest.mark.parametrize("interleave", INTERLEAVES)
@pytest.mark.parametrize("code", sorted(DTYPE_CODES))
def test_round_trip_bit_identical(tmp_path, interleave, code):
    cube = _random_cube((4, 5, 6), code, seed=code)
    hdr, raw = write_envi(cube, tmp_path / "c", interleave=interleave,
                          data_type=code)
    back = read_envi(hdr, raw)
    assert np.array_equal(back.values, cube.values)


def test_interleave_closure(tmp_path):
    cube = _random_cube((3, 4, 5), 4, seed=9)
    reads = []
    for il in INTERLEAVES:
        hdr, raw = write_envi(cube, tmp_path / il, interleave=il, data_type=4)
        reads.append(read_envi(hdr, raw).values)
    for other in reads[1:]:
        assert np.array_equal(reads[0], other)


def test_dimension_mapping(tmp_path):
    # 320 samples per line, 620 lines, 256 bands
    cube = Hypercube(np.zeros((620, 320, 8)))
    hdr, raw = write_envi(cube, tmp_path / "c", interleave="bsq")
    back = read_envi(hdr, raw)
    assert (back.lines, back.samples, back.bands) == (620, 320, 8)
    header = read_header(hdr)
    assert (header.lines, header.samples, header.bands) == (620, 320, 8)


def test_single_element_any_interleave(tmp_path):
    cube = Hypercube(np.full((1, 1, 1), 0.5))
    for il in INTERLEAVES:
        hdr, raw = write_envi(cube, tmp_path / f"s_{il}", interleave=il)
        back = read_envi(hdr, raw)
        assert np.array_equal(back.spectrum_at(0, 0), [0.5])


def test_bip_byte_order_matches_hand_enumeration(tmp_path):
    # BIP is pixel-major: (i0,j0) all bands, (i0,j1) all bands, ...
    v = np.arange(8.0).reshape(2, 2, 2)
    cube = Hypercube(v)
    _, raw = write_envi(cube, tmp_path / "c", interleave="bip", data_type=5)
    flat = np.frombuffer(raw.read_bytes(), dtype="<f8")
    expected = [v[0, 0, 0], v[0, 0, 1], v[0, 1, 0], v[0, 1, 1],
                v[1, 0, 0], v[1, 0, 1], v[1, 1, 0], v[1, 1, 1]]
    assert list(flat) == expected


def test_bsq_byte_layout(tmp_path):
    v = np.arange(8.0).reshape(2, 2, 2)
    _, raw = write_envi(Hypercube(v), tmp_path / "c", interleave="bsq")
    flat = np.frombuffer(raw.read_bytes(), dtype="<f8")
    expected = [v[0, 0, 0], v[0, 1, 0], v[1, 0, 0], v[1, 1, 0],
                v[0, 0, 1], v[0, 1, 1], v[1, 0, 1], v[1, 1, 1]]
    assert list(flat) == expected


def test_big_endian_round_trip(tmp_path):
    cube = _random_cube((2, 3, 4), 4, seed=1)
    hdr, raw = write_envi(cube, tmp_path / "c", interleave="bil",
                          data_type=4, byte_order=1)
    back = read_envi(hdr, raw)
    assert np.array_equal(back.values, cube.values)


def test_wavelengths_round_trip(tmp_path):
    wl = np.arange(950.0, 1030.0, 10.0)
    cube = Hypercube(np.zeros((2, 2, 8)), wavelengths=wl)
    hdr, raw = write_envi(cube, tmp_path / "c")
    back = read_envi(hdr, raw)
    np.testing.assert_array_equal(back.wavelengths, wl)


def test_unknown_keys_preserved(tmp_path):
    cube = Hypercube(np.zeros((1, 2, 3)))
    hdr, raw = write_envi(cube, tmp_path / "c",
                          extra={"sensor type": "test rig", "foo": "bar"})
    header = read_header(hdr)
    assert header.extra["sensor type"] == "test rig"
    assert header.extra["foo"] == "bar"
    # survive a second hop
    back = read_envi(hdr, raw)
    hdr2, _ = write_envi(back, tmp_path / "c2", extra=dict(header.extra))
    assert read_header(hdr2).extra["foo"] == "bar"


def test_missing_mandatory_keys(tmp_path):
    (tmp_path / "bad.hdr").write_text("ENVI\nsamples = 2\nlines = 2\n")
    with pytest.raises(EnviFormatError, match="missing mandatory"):
        read_header(tmp_path / "bad.hdr")


def test_missing_magic(tmp_path):
    (tmp_path / "bad.hdr").write_text("samples = 2\n")
    with pytest.raises(EnviFormatError, match="magic"):
        read_header(tmp_path / "bad.hdr")


def test_size_mismatch(tmp_path):
    cube = Hypercube(np.zeros((2, 2, 2)))
    hdr, raw = write_envi(cube, tmp_path / "c")
    raw.write_bytes(raw.read_bytes()[:-8])
    with pytest.raises(EnviFormatError, match="bytes"):
        read_envi(hdr, raw)


def test_unsupported_data_type(tmp_path):
    cube = Hypercube(np.zeros((1, 1, 1)))
    with pytest.raises(EnviFormatError):
        write_envi(cube, tmp_path / "c", data_type=3)


def test_not_representable(tmp_path):
    cube = Hypercube(np.full((1, 1, 1), 0.5))
    with pytest.raises(EnviFormatError, match="representable"):
        write_envi(cube, tmp_path / "c", data_type=1)


def test_header_offset_and_size_invariant(tmp_path):
    cube = _random_cube((3, 2, 4), 12, seed=5)
    hdr, raw = write_envi(cube, tmp_path / "c", data_type=12)
    header = read_header(hdr)
    assert header.expected_size() == raw.stat().st_size
