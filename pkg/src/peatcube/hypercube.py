"""ENVI-style cube I/O, geometry model, and radiometric calibration.

A cube is stored in memory as a float64 array indexed (line, sample, band),
C-contiguous, so each pixel's spectrum is a contiguous vector. Raw sensor
counts are converted to reflectance by ratioing against dark and white
reference frames: r = (s - d) / (w - d), clamped to [0, 2].
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
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

RAW_COUNTS = "raw_counts"
REFLECTANCE = "reflectance"

#: clamp ceiling for reflectance; specular glints exceed 1 but unbounded
#: values destabilize kernel distances downstream
REFLECTANCE_MAX = 2.0

#: denominators w - d at or below this (in count units) are treated as dead
DEGENERATE_EPS = 1e-6

INTERLEAVES = ("bsq", "bil", "bip")

# ENVI numeric data-type codes for the two supported element types
_DTYPE_CODES = {"u16": 12, "f32": 4}
_CODE_DTYPES = {v: k for k, v in _DTYPE_CODES.items()}
_NP_DTYPES = {"u16": np.uint16, "f32": np.float32}


@dataclass(frozen=True, eq=False)
class WavelengthAxis:
    """Per-band centre wavelengths in nanometres, strictly increasing."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size == 0:
            raise MalformedValueError("wavelength", "axis must be 1-D, non-empty")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteInputError("wavelength axis contains non-finite values")
        if not np.all(np.diff(vals) > 0):
            raise MalformedValueError("wavelength", "axis must be strictly increasing")

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WavelengthAxis):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    @classmethod
    def default(cls, bands: int) -> "WavelengthAxis":
        # band indices as a placeholder axis when the header lists none
        return cls(np.arange(bands, dtype=float))


@dataclass(frozen=True)
class EnviHeader:
    """Geometry and storage layout of one ENVI header/binary pair."""

    lines: int
    samples: int
    bands: int
    interleave: str  # bsq | bil | bip
    data_type: str  # u16 | f32
    byte_order: str  # little | big
    wavelengths: WavelengthAxis

    def __post_init__(self):
        for name in ("lines", "samples", "bands"):
            if getattr(self, name) <= 0:
                raise MalformedValueError(name, str(getattr(self, name)))
        if self.interleave not in INTERLEAVES:
            raise MalformedValueError("interleave", self.interleave)
        if self.data_type not in _DTYPE_CODES:
            raise MalformedValueError("data type", self.data_type)
        if self.byte_order not in ("little", "big"):
            raise MalformedValueError("byte order", self.byte_order)
        if len(self.wavelengths) != self.bands:
            raise WavelengthCountMismatchError(len(self.wavelengths), self.bands)

    @property
    def element_size(self) -> int:
        return np.dtype(_NP_DTYPES[self.data_type]).itemsize

    @property
    def payload_size(self) -> int:
        return self.lines * self.samples * self.bands * self.element_size

    def numpy_dtype(self) -> np.dtype:
        endian = "<" if self.byte_order == "little" else ">"
        return np.dtype(endian + {"u16": "u2", "f32": "f4"}[self.data_type])


@dataclass(frozen=True)
class Hypercube:
    """3-D spectral volume indexed (line, sample, band)."""

    data: np.ndarray
    axis: WavelengthAxis
    kind: str = RAW_COUNTS

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        object.__setattr__(self, "data", arr)
        if arr.ndim != 3:
            raise ShapeMismatchError(f"cube must be 3-D, got shape {arr.shape}")
        if arr.shape[2] != len(self.axis):
            raise WavelengthCountMismatchError(len(self.axis), arr.shape[2])
        if self.kind not in (RAW_COUNTS, REFLECTANCE):
            raise MalformedValueError("kind", self.kind)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteInputError("cube contains non-finite values")
        if self.kind == REFLECTANCE:
            if arr.size and (arr.min() < 0.0 or arr.max() > REFLECTANCE_MAX):
                raise MalformedValueError(
                    "kind", f"reflectance outside [0, {REFLECTANCE_MAX}]"
                )

    @property
    def lines(self) -> int:
        return self.data.shape[0]

    @property
    def samples(self) -> int:
        return self.data.shape[1]

    @property
    def bands(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class ReferenceFrames:
    """Dark and white reference frames, one value per (sample, band).

    Pushbroom sensors respond per spatial column, so the references keep the
    full (sample, band) grid; build from 1-D spectra via from_spectra when
    only a scalar spectrum per band is available.
    """

    dark: np.ndarray
    white: np.ndarray

    def __post_init__(self):
        dark = np.ascontiguousarray(self.dark, dtype=np.float64)
        white = np.ascontiguousarray(self.white, dtype=np.float64)
        object.__setattr__(self, "dark", dark)
        object.__setattr__(self, "white", white)
        if dark.ndim != 2 or white.shape != dark.shape:
            raise ShapeMismatchError(
                f"reference frames must be equal 2-D shapes, got {dark.shape} vs {white.shape}"
            )
        if not (np.all(np.isfinite(dark)) and np.all(np.isfinite(white))):
            raise NonFiniteInputError("reference frames contain non-finite values")
        negative = np.count_nonzero(white - dark < 0.0)
        if negative > 0.01 * dark.size:
            raise InvalidReferencesError(
                f"white < dark on {negative}/{dark.size} entries (more than 1%)"
            )

    @classmethod
    def from_spectra(
        cls, dark: np.ndarray, white: np.ndarray, samples: int
    ) -> "ReferenceFrames":
        """Broadcast 1-D reference spectra onto every spatial column."""
        dark = np.asarray(dark, dtype=np.float64)
        white = np.asarray(white, dtype=np.float64)
        if dark.ndim != 1 or white.shape != dark.shape:
            raise ShapeMismatchError("reference spectra must be equal-length 1-D")
        return cls(
            np.tile(dark, (samples, 1)),
            np.tile(white, (samples, 1)),
        )

    @classmethod
    def from_cubes(cls, dark: Hypercube, white: Hypercube) -> "ReferenceFrames":
        """Average reference acquisitions over the line axis."""
        if dark.data.shape[1:] != white.data.shape[1:]:
            raise ShapeMismatchError("dark and white cubes disagree in (sample, band)")
        return cls(dark.data.mean(axis=0), white.data.mean(axis=0))


# --- header parsing --------------------------------------------------------

_REQUIRED_KEYS = ("lines", "samples", "bands", "interleave", "data type")


def _strip_comments(text: str) -> list[str]:
    lines = []
    for raw in text.replace("\r\n", "\n").split("\n"):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        lines.append(line)
    return lines


def _collect_entries(lines: list[str]) -> dict[str, str]:
    entries: dict[str, str] = {}
    i = 0
    while i < len(lines):
        line = lines[i]
        if "=" not in line:
            i += 1
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        # brace-delimited values may continue over several lines
        if "{" in value and "}" not in value:
            parts = [value]
            while i + 1 < len(lines) and "}" not in lines[i]:
                i += 1
                parts.append(lines[i])
            value = " ".join(parts)
        entries[key.lower()] = value
        i += 1
    return entries


def parse_envi_header(text: str) -> EnviHeader:
    """Parse an ENVI-style key = value header.

    Unknown keys are ignored. Raises MissingFieldError when a required key is
    absent, MalformedValueError for unparseable values, and
    WavelengthCountMismatchError when the wavelength list disagrees with the
    band count. A header without a wavelength block gets a band-index axis.
    """
    entries = _collect_entries(_strip_comments(text))
    for key in _REQUIRED_KEYS:
        if key not in entries:
            raise MissingFieldError(key)

    def read_int(key: str) -> int:
        try:
            return int(entries[key])
        except ValueError:
            raise MalformedValueError(key, entries[key]) from None

    lines = read_int("lines")
    samples = read_int("samples")
    bands = read_int("bands")

    interleave = entries["interleave"].lower()
    if interleave not in INTERLEAVES:
        raise MalformedValueError("interleave", entries["interleave"])

    code = read_int("data type")
    if code not in _CODE_DTYPES:
        raise MalformedValueError("data type", entries["data type"])
    data_type = _CODE_DTYPES[code]

    byte_order = "little"
    if "byte order" in entries:
        order_code = read_int("byte order")
        if order_code not in (0, 1):
            raise MalformedValueError("byte order", entries["byte order"])
        byte_order = "little" if order_code == 0 else "big"

    if "wavelength" in entries:
        inner = re.search(r"\{(.*)\}", entries["wavelength"], re.S)
        if inner is None:
            raise MalformedValueError("wavelength", entries["wavelength"])
        tokens = [t for t in re.split(r"[,\s]+", inner.group(1).strip()) if t]
        try:
            values = np.array([float(t) for t in tokens], dtype=float)
        except ValueError:
            raise MalformedValueError("wavelength", entries["wavelength"]) from None
        if values.size != bands:
            raise WavelengthCountMismatchError(values.size, bands)
        axis = WavelengthAxis(values)
    else:
        axis = WavelengthAxis.default(bands)

    return EnviHeader(
        lines=lines,
        samples=samples,
        bands=bands,
        interleave=interleave,
        data_type=data_type,
        byte_order=byte_order,
        wavelengths=axis,
    )


def header_kind(text: str) -> str:
    """Cube kind recorded as a '; kind = ...' comment (raw_counts if absent)."""
    for raw in text.replace("\r\n", "\n").split("\n"):
        line = raw.strip()
        if line.startswith(";") and "=" in line:
            key, value = (p.strip() for p in line.lstrip("; ").split("=", 1))
            if key.lower() == "kind" and value.lower() == REFLECTANCE:
                return REFLECTANCE
    return RAW_COUNTS


def format_envi_header(header: EnviHeader, kind: str = RAW_COUNTS) -> str:
    """Render a header back to ENVI text (inverse of parse_envi_header)."""
    out = ["ENVI"]
    if kind == REFLECTANCE:
        out.append("; kind = reflectance")
    out.append(f"samples = {header.samples}")
    out.append(f"lines = {header.lines}")
    out.append(f"bands = {header.bands}")
    out.append("header offset = 0")
    out.append("file type = ENVI Standard")
    out.append(f"data type = {_DTYPE_CODES[header.data_type]}")
    out.append(f"interleave = {header.interleave}")
    out.append(f"byte order = {0 if header.byte_order == 'little' else 1}")
    wl = ", ".join(repr(float(v)) for v in header.wavelengths.values)
    out.append("wavelength = { " + wl + " }")
    return "\n".join(out) + "\n"


# --- binary payload --------------------------------------------------------

def _storage_shape(header: EnviHeader) -> tuple[int, ...]:
    if header.interleave == "bsq":
        return (header.bands, header.lines, header.samples)
    if header.interleave == "bil":
        return (header.lines, header.bands, header.samples)
    return (header.lines, header.samples, header.bands)


def _to_internal(arr: np.ndarray, interleave: str) -> np.ndarray:
    # internal order is (line, sample, band)
    if interleave == "bsq":
        return arr.transpose(1, 2, 0)
    if interleave == "bil":
        return arr.transpose(0, 2, 1)
    return arr


def _from_internal(arr: np.ndarray, interleave: str) -> np.ndarray:
    if interleave == "bsq":
        return arr.transpose(2, 0, 1)
    if interleave == "bil":
        return arr.transpose(0, 2, 1)
    return arr


def read_cube(header: EnviHeader, payload: bytes, kind: str = RAW_COUNTS) -> Hypercube:
    """Decode a binary payload into a Hypercube.

    The source interleave is storage-only: the same values stored BSQ, BIL or
    BIP decode to the identical cube.
    """
    if len(payload) != header.payload_size:
        raise PayloadSizeMismatchError(header.payload_size, len(payload))
    flat = np.frombuffer(payload, dtype=header.numpy_dtype())
    arr = flat.reshape(_storage_shape(header))
    data = _to_internal(arr, header.interleave).astype(np.float64)
    return Hypercube(data=data, axis=header.wavelengths, kind=kind)


def encode_cube(cube: Hypercube, header: EnviHeader) -> bytes:
    """Encode a cube back to the header's dtype/interleave/byte order.

    Inverse of read_cube: encode(read(payload)) is bit-identical to payload.
    """
    if cube.data.shape != (header.lines, header.samples, header.bands):
        raise ShapeMismatchError(
            f"cube shape {cube.data.shape} does not match header "
            f"({header.lines}, {header.samples}, {header.bands})"
        )
    arr = _from_internal(cube.data, header.interleave)
    return np.ascontiguousarray(arr).astype(header.numpy_dtype()).tobytes()


def header_for_cube(
    cube: Hypercube,
    interleave: str = "bip",
    data_type: str = "f32",
    byte_order: str = "little",
) -> EnviHeader:
    return EnviHeader(
        lines=cube.lines,
        samples=cube.samples,
        bands=cube.bands,
        interleave=interleave,
        data_type=data_type,
        byte_order=byte_order,
        wavelengths=cube.axis,
    )


def load_cube(header_path: str | Path, data_path: str | Path) -> Hypercube:
    """Read a header/binary pair from disk, honouring the kind comment."""
    text = Path(header_path).read_text()
    header = parse_envi_header(text)
    payload = Path(data_path).read_bytes()
    return read_cube(header, payload, kind=header_kind(text))


def save_cube(
    cube: Hypercube,
    header_path: str | Path,
    data_path: str | Path,
    interleave: str = "bip",
    data_type: str = "f32",
    byte_order: str = "little",
) -> EnviHeader:
    """Persist a cube as an ENVI header/binary pair; returns the header."""
    header = header_for_cube(cube, interleave, data_type, byte_order)
    Path(header_path).write_text(format_envi_header(header, kind=cube.kind))
    Path(data_path).write_bytes(encode_cube(cube, header))
    return header


# --- calibration -----------------------------------------------------------

def calibrate_reflectance(
    raw: Hypercube,
    refs: ReferenceFrames,
    eps: float = DEGENERATE_EPS,
) -> tuple[Hypercube, int]:
    """Convert raw counts to reflectance, r = (s - d) / (w - d).

    Values are clamped to [0, REFLECTANCE_MAX]. Entries whose denominator
    w - d <= eps are set to 0 and counted; the count is returned alongside
    the calibrated cube. Raises AllReferencesDegenerateError when more than
    half of the (sample, band) grid is degenerate.
    """
    if raw.kind != RAW_COUNTS:
        raise ShapeMismatchError("calibrate_reflectance expects a raw-counts cube")
    if refs.dark.shape != (raw.samples, raw.bands):
        raise ShapeMismatchError(
            f"reference shape {refs.dark.shape} does not match cube "
            f"({raw.samples}, {raw.bands})"
        )
    denom = refs.white - refs.dark
    degenerate = denom <= eps
    n_degenerate = int(np.count_nonzero(degenerate))
    if n_degenerate > 0.5 * denom.size:
        raise AllReferencesDegenerateError(
            f"{n_degenerate}/{denom.size} reference entries have white - dark <= {eps}"
        )

    safe = np.where(degenerate, 1.0, denom)
    out = (raw.data - refs.dark[None, :, :]) / safe[None, :, :]
    out = np.clip(out, 0.0, REFLECTANCE_MAX)
    if n_degenerate:
        out[:, degenerate] = 0.0
    invalid_pixels = n_degenerate * raw.lines
    return Hypercube(data=out, axis=raw.axis, kind=REFLECTANCE), invalid_pixels


def crop_roi(cube: Hypercube, fraction: float) -> Hypercube:
    """Centered spatial crop covering `fraction` of each spatial axis.

    Extents round down; an odd leftover margin puts the extra pixel on the
    leading side. Bands are untouched.
    """
    if not 0.0 < fraction <= 1.0:
        raise EmptyRoiError(f"fraction must be in (0, 1], got {fraction}")
    new_lines = int(cube.lines * fraction)
    new_samples = int(cube.samples * fraction)
    if new_lines < 1 or new_samples < 1:
        raise EmptyRoiError(
            f"fraction {fraction} of ({cube.lines}, {cube.samples}) is empty"
        )
    l0 = (cube.lines - new_lines + 1) // 2
    s0 = (cube.samples - new_samples + 1) // 2
    view = cube.data[l0 : l0 + new_lines, s0 : s0 + new_samples, :]
    return Hypercube(data=view.copy(), axis=cube.axis, kind=cube.kind)
