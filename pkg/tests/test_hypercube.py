"""Header parsing, cube I/O round trips, calibration, and ROI cropping."""

import numpy as np
import pytest

from peatcube.errors import (
    AllReferencesDegenerateError,
    EmptyRoiError,
    InvalidReferencesError,
    MalformedValueError,
    MissingFieldError,
    NonFiniteInputError,
    PayloadSizeMismatchError,
    ShapeMismatchError,
    WavelengthCountMismatchError,
)
from peatcube.hypercube import (
    RAW_COUNTS,
    REFLECTANCE,
    EnviHeader,
    Hypercube,
    ReferenceFrames,
    WavelengthAxis,
    calibrate_reflectance,
    crop_roi,
    encode_cube,
    format_envi_header,
    header_for_cube,
    header_kind,
    load_cube,
    parse_envi_header,
    read_cube,
    save_cube,
)

HEADER_TEXT = """ENVI
; a comment line
samples = 640
lines = 100
bands = 270
header offset = 0
file type = ENVI Standard
data type = 12
interleave = bsq
byte order = 0
some unknown key = whatever
wavelength = { %s }
"""


def table1_header_text():
    wl = ", ".join(str(900.0 + 5.0 * i) for i in range(270))
    return HEADER_TEXT % wl


def small_header(lines=2, samples=2, bands=2, interleave="bsq", data_type="f32",
                 byte_order="little"):
    return EnviHeader(
        lines=lines,
        samples=samples,
        bands=bands,
        interleave=interleave,
        data_type=data_type,
        byte_order=byte_order,
        wavelengths=WavelengthAxis(400.0 + 10.0 * np.arange(bands)),
    )


class TestParseHeader:
    def test_table1_geometry(self):
        hdr = parse_envi_header(table1_header_text())
        assert hdr.lines == 100
        assert hdr.samples == 640
        assert hdr.bands == 270
        assert hdr.interleave == "bsq"
        assert hdr.data_type == "u16"
        assert hdr.byte_order == "little"
        assert len(hdr.wavelengths) == 270
        assert hdr.wavelengths.values[0] == 900.0

    def test_missing_bands(self):
        text = "\n".join(
            line for line in table1_header_text().splitlines() if not line.startswith("bands")
        )
        with pytest.raises(MissingFieldError) as err:
            parse_envi_header(text)
        assert err.value.name == "bands"

    @pytest.mark.parametrize("field", ["lines", "samples", "interleave", "data type"])
    def test_missing_required(self, field):
        text = "\n".join(
            line
            for line in table1_header_text().splitlines()
            if not line.startswith(field)
        )
        with pytest.raises(MissingFieldError):
            parse_envi_header(text)

    def test_wavelength_count_mismatch(self):
        text = HEADER_TEXT % "400.0, 500.0, 600.0"
        with pytest.raises(WavelengthCountMismatchError):
            parse_envi_header(text)

    def test_malformed_int(self):
        text = table1_header_text().replace("lines = 100", "lines = ten")
        with pytest.raises(MalformedValueError):
            parse_envi_header(text)

    def test_unknown_data_type_code(self):
        text = table1_header_text().replace("data type = 12", "data type = 99")
        with pytest.raises(MalformedValueError):
            parse_envi_header(text)

    def test_multiline_wavelength_block(self):
        text = (
            "samples = 2\nlines = 2\nbands = 3\ndata type = 4\ninterleave = bip\n"
            "wavelength = { 400.0,\n 500.0,\n 600.0 }\n"
        )
        hdr = parse_envi_header(text)
        assert list(hdr.wavelengths.values) == [400.0, 500.0, 600.0]

    def test_header_without_wavelengths_gets_band_axis(self):
        text = "samples = 2\nlines = 2\nbands = 3\ndata type = 4\ninterleave = bip\n"
        hdr = parse_envi_header(text)
        assert list(hdr.wavelengths.values) == [0.0, 1.0, 2.0]

    def test_format_parse_round_trip(self):
        hdr = small_header(3, 4, 5, "bil", "u16", "big")
        again = parse_envi_header(format_envi_header(hdr))
        assert again == hdr

    def test_kind_comment(self):
        hdr = small_header()
        assert header_kind(format_envi_header(hdr, kind=REFLECTANCE)) == REFLECTANCE
        assert header_kind(format_envi_header(hdr)) == RAW_COUNTS


class TestReadCube:
    def test_bsq_f32_hand_encoded(self):
        # oracle: BSQ stores (band, line, sample); value at payload position
        # b*4 + l*2 + s must land at data[l, s, b]
        payload = np.arange(8, dtype="<f4").tobytes()
        cube = read_cube(small_header(interleave="bsq"), payload)
        expected = np.array(
            [
                [[0.0, 4.0], [1.0, 5.0]],
                [[2.0, 6.0], [3.0, 7.0]],
            ]
        )
        np.testing.assert_array_equal(cube.data, expected)

    def test_interleave_is_storage_only(self):
        rng = np.random.default_rng(1)
        data = rng.uniform(0.0, 100.0, size=(3, 4, 5))
        axis = WavelengthAxis(np.arange(5, dtype=float))
        cube = Hypercube(data=data, axis=axis, kind=RAW_COUNTS)
        cubes = []
        for interleave in ("bsq", "bil", "bip"):
            hdr = header_for_cube(cube, interleave=interleave, data_type="f32")
            cubes.append(read_cube(hdr, encode_cube(cube, hdr)))
        np.testing.assert_array_equal(cubes[0].data, cubes[1].data)
        np.testing.assert_array_equal(cubes[0].data, cubes[2].data)

    def test_payload_one_byte_short(self):
        payload = np.arange(8, dtype="<f4").tobytes()[:-1]
        with pytest.raises(PayloadSizeMismatchError):
            read_cube(small_header(), payload)

    def test_non_finite_payload(self):
        vals = np.arange(8, dtype="<f4")
        vals[3] = np.nan
        with pytest.raises(NonFiniteInputError):
            read_cube(small_header(), vals.tobytes())

    @pytest.mark.parametrize("interleave", ["bsq", "bil", "bip"])
    @pytest.mark.parametrize("data_type", ["u16", "f32"])
    @pytest.mark.parametrize("byte_order", ["little", "big"])
    def test_round_trip_bit_exact(self, interleave, data_type, byte_order):
        rng = np.random.default_rng(7)
        hdr = small_header(3, 5, 4, interleave, data_type, byte_order)
        if data_type == "u16":
            raw = rng.integers(0, 2**16, size=60, dtype=np.uint16)
            payload = raw.astype(hdr.numpy_dtype()).tobytes()
        else:
            raw = rng.uniform(-1e6, 1e6, size=60).astype(np.float32)
            payload = raw.astype(hdr.numpy_dtype()).tobytes()
        cube = read_cube(hdr, payload)
        assert encode_cube(cube, hdr) == payload


class TestCalibration:
    def setup_method(self):
        rng = np.random.default_rng(42)
        self.dark = rng.uniform(90.0, 110.0, size=(6, 5))
        self.white = rng.uniform(2000.0, 3000.0, size=(6, 5))
        self.refs = ReferenceFrames(dark=self.dark, white=self.white)
        self.axis = WavelengthAxis(np.arange(5, dtype=float))

    def as_cube(self, frame, lines=4):
        data = np.repeat(frame[None, :, :], lines, axis=0)
        return Hypercube(data=data, axis=self.axis, kind=RAW_COUNTS)

    def test_white_calibrates_to_one(self):
        cube, invalid = calibrate_reflectance(self.as_cube(self.white), self.refs)
        assert invalid == 0
        np.testing.assert_allclose(cube.data, 1.0, rtol=0, atol=1e-9)

    def test_dark_calibrates_to_zero(self):
        cube, invalid = calibrate_reflectance(self.as_cube(self.dark), self.refs)
        np.testing.assert_array_equal(cube.data, 0.0)

    def test_midpoint_value(self):
        refs = ReferenceFrames(dark=np.full((2, 2), 0.1), white=np.full((2, 2), 0.9))
        raw = Hypercube(
            data=np.full((3, 2, 2), 0.5), axis=WavelengthAxis([1.0, 2.0]), kind=RAW_COUNTS
        )
        cube, _ = calibrate_reflectance(raw, refs)
        np.testing.assert_allclose(cube.data, 0.5, rtol=0, atol=1e-15)

    def test_gain_offset_invariance(self):
        rng = np.random.default_rng(3)
        s = rng.uniform(100.0, 2900.0, size=(4, 6, 5))
        base = Hypercube(data=s, axis=self.axis, kind=RAW_COUNTS)
        ref_cube, _ = calibrate_reflectance(base, self.refs)
        for a, b in ((3.0, 7.0), (0.25, -40.0), (11.5, 1234.0)):
            scaled = Hypercube(data=a * s + b, axis=self.axis, kind=RAW_COUNTS)
            refs = ReferenceFrames(dark=a * self.dark + b, white=a * self.white + b)
            out, _ = calibrate_reflectance(scaled, refs)
            np.testing.assert_allclose(out.data, ref_cube.data, rtol=1e-9, atol=1e-12)

    def test_clamps_to_ceiling(self):
        refs = ReferenceFrames(dark=np.zeros((1, 1)), white=np.ones((1, 1)))
        raw = Hypercube(
            data=np.full((1, 1, 1), 5.0), axis=WavelengthAxis([1.0]), kind=RAW_COUNTS
        )
        cube, _ = calibrate_reflectance(raw, refs)
        assert cube.data[0, 0, 0] == 2.0

    def test_degenerate_entries_zeroed_and_counted(self):
        dark = np.full((4, 3), 100.0)
        white = np.full((4, 3), 2000.0)
        white[1, 2] = 100.0  # w - d == 0 at one entry
        refs = ReferenceFrames(dark=dark, white=white)
        raw = Hypercube(
            data=np.full((5, 4, 3), 1000.0),
            axis=WavelengthAxis([1.0, 2.0, 3.0]),
            kind=RAW_COUNTS,
        )
        cube, invalid = calibrate_reflectance(raw, refs)
        assert invalid == 5  # one degenerate column entry x 5 lines
        np.testing.assert_array_equal(cube.data[:, 1, 2], 0.0)
        assert cube.data[:, 0, 0].max() > 0

    def test_mostly_degenerate_references_error(self):
        dark = np.full((4, 4), 100.0)
        white = np.full((4, 4), 100.0)
        white[0, :2] = 2000.0  # only 2/16 entries healthy
        refs = ReferenceFrames(dark=dark, white=white)
        raw = Hypercube(
            data=np.full((2, 4, 4), 500.0),
            axis=WavelengthAxis(np.arange(4, dtype=float)),
            kind=RAW_COUNTS,
        )
        with pytest.raises(AllReferencesDegenerateError):
            calibrate_reflectance(raw, refs)

    def test_shape_mismatch(self):
        raw = Hypercube(
            data=np.zeros((2, 3, 5)), axis=self.axis, kind=RAW_COUNTS
        )
        with pytest.raises(ShapeMismatchError):
            calibrate_reflectance(raw, self.refs)


class TestReferenceFrames:
    def test_negative_white_minus_dark_rejected(self):
        dark = np.full((10, 10), 200.0)
        white = np.full((10, 10), 100.0)  # all negative
        with pytest.raises(InvalidReferencesError):
            ReferenceFrames(dark=dark, white=white)

    def test_isolated_negative_entries_tolerated(self):
        rng = np.random.default_rng(5)
        dark = rng.uniform(90, 110, size=(20, 20))
        white = rng.uniform(2000, 3000, size=(20, 20))
        white[0, 0] = dark[0, 0] - 5.0  # < 1% of entries
        ReferenceFrames(dark=dark, white=white)

    def test_from_spectra_broadcasts(self):
        refs = ReferenceFrames.from_spectra(
            np.array([1.0, 2.0]), np.array([10.0, 20.0]), samples=3
        )
        assert refs.dark.shape == (3, 2)
        np.testing.assert_array_equal(refs.dark[2], [1.0, 2.0])
        np.testing.assert_array_equal(refs.white[0], [10.0, 20.0])

    def test_from_cubes_averages_lines(self):
        axis = WavelengthAxis([1.0, 2.0])
        dark = Hypercube(
            data=np.stack([np.zeros((3, 2)), np.full((3, 2), 2.0)]), axis=axis
        )
        white = Hypercube(data=np.full((2, 3, 2), 10.0), axis=axis)
        refs = ReferenceFrames.from_cubes(dark, white)
        np.testing.assert_array_equal(refs.dark, 1.0)
        np.testing.assert_array_equal(refs.white, 10.0)


class TestCropRoi:
    def make_cube(self, lines, samples, bands=2):
        data = np.arange(lines * samples * bands, dtype=float).reshape(
            lines, samples, bands
        )
        return Hypercube(
            data=data, axis=WavelengthAxis(np.arange(bands, dtype=float)), kind=RAW_COUNTS
        )

    def test_identity(self):
        cube = self.make_cube(10, 10)
        out = crop_roi(cube, 1.0)
        np.testing.assert_array_equal(out.data, cube.data)

    def test_centered_80pct(self):
        cube = self.make_cube(100, 100)
        out = crop_roi(cube, 0.8)
        assert out.data.shape == (80, 80, 2)
        np.testing.assert_array_equal(out.data, cube.data[10:90, 10:90, :])

    def test_empty_roi(self):
        cube = self.make_cube(1, 1)
        with pytest.raises(EmptyRoiError):
            crop_roi(cube, 0.1)

    def test_odd_margin_leads(self):
        cube = self.make_cube(5, 5)
        out = crop_roi(cube, 0.4)  # floor(2.0) = 2, margin 3 -> 2 leading
        assert out.data.shape == (2, 2, 2)
        np.testing.assert_array_equal(out.data, cube.data[2:4, 2:4, :])

    @pytest.mark.parametrize("f1,f2", [(0.9, 0.9), (0.5, 0.7), (0.95, 0.33)])
    def test_composition_extent(self, f1, f2):
        cube = self.make_cube(97, 53)
        twice = crop_roi(crop_roi(cube, f1), f2)
        once = crop_roi(cube, f1 * f2)
        for axis in (0, 1):
            assert abs(twice.data.shape[axis] - once.data.shape[axis]) <= 1


class TestFileRoundTrip:
    def test_save_load_preserves_kind_and_values(self, tmp_path):
        rng = np.random.default_rng(11)
        data = np.clip(rng.normal(0.5, 0.1, size=(4, 5, 3)), 0.0, 2.0)
        cube = Hypercube(
            data=data, axis=WavelengthAxis([400.0, 500.0, 600.0]), kind=REFLECTANCE
        )
        save_cube(cube, tmp_path / "c.hdr", tmp_path / "c.raw")
        again = load_cube(tmp_path / "c.hdr", tmp_path / "c.raw")
        assert again.kind == REFLECTANCE
        np.testing.assert_allclose(again.data, cube.data, rtol=1e-6, atol=1e-7)
        np.testing.assert_array_equal(again.axis.values, cube.axis.values)
