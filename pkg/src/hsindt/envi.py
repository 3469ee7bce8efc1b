"""ENVI header + raw binary reading and writing.

Supports data type codes 1 (u8), 2 (i16), 4 (f32), 5 (f64) and 12 (u16),
all three interleaves (BSQ, BIL, BIP) and both byte orders.  Values are
promoted to float64 on read; writing checks the cube is exactly
representable in the requested code so write -> read round-trips are
bit-identical.  Unknown header keys are preserved verbatim.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cube import Hypercube, KIND_RAW
from .errors import EnviFormatError

DTYPE_CODES = {
    1: np.dtype(np.uint8),
    2: np.dtype(np.int16),
    4: np.dtype(np.float32),
    5: np.dtype(np.float64),
    12: np.dtype(np.uint16),
}
INTERLEAVES = ("bsq", "bil", "bip")
_MANDATORY = ("samples", "lines", "bands", "data type", "interleave", "byte order")


@dataclass
class EnviHeader:
    """Parsed ENVI header fields plus preserved unknown keys."""

    samples: int
    lines: int
    bands: int
    data_type: int
    interleave: str
    byte_order: int = 0
    header_offset: int = 0
    wavelength: list[float] | None = None
    extra: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.data_type not in DTYPE_CODES:
            raise EnviFormatError(f"unsupported ENVI data type {self.data_type}")
        if self.interleave not in INTERLEAVES:
            raise EnviFormatError(f"unsupported interleave {self.interleave!r}")
        if self.byte_order not in (0, 1):
            raise EnviFormatError(f"byte order must be 0 or 1, got {self.byte_order}")

    @property
    def dtype(self) -> np.dtype:
        dt = DTYPE_CODES[self.data_type]
        return dt.newbyteorder("<" if self.byte_order == 0 else ">")

    def expected_size(self) -> int:
        n = self.samples * self.lines * self.bands
        return self.header_offset + n * self.dtype.itemsize


def _parse_kv_lines(text: str) -> dict[str, str]:
    """Split header text into key/value pairs, honouring {...} blocks."""
    body = text
    # collapse brace blocks onto one logical line
    body = re.sub(r"\{[^}]*\}", lambda m: m.group(0).replace("\n", " "), body)
    pairs = {}
    for line in body.splitlines():
        line = line.strip()
        if not line or line.upper() == "ENVI" or line.startswith(";"):
            continue
        if "=" not in line:
            continue
        key, _, value = line.partition("=")
        pairs[key.strip().lower()] = value.strip()
    return pairs


def read_header(header_path) -> EnviHeader:
    text = Path(header_path).read_text()
    if not text.lstrip().upper().startswith("ENVI"):
        raise EnviFormatError(f"{header_path}: missing ENVI magic line")
    pairs = _parse_kv_lines(text)
    missing = [k for k in _MANDATORY if k not in pairs]
    if missing:
        raise EnviFormatError(f"{header_path}: missing mandatory keys {missing}")

    wavelength = None
    if "wavelength" in pairs:
        inner = pairs.pop("wavelength").strip().strip("{}").strip()
        if inner:
            wavelength = [float(tok) for tok in inner.replace(",", " ").split()]

    def _pop_int(key, default=None):
        if key in pairs:
            return int(pairs.pop(key))
        if default is None:
            raise EnviFormatError(f"{header_path}: missing key {key!r}")
        return default

    samples = _pop_int("samples")
    lines = _pop_int("lines")
    bands = _pop_int("bands")
    data_type = _pop_int("data type")
    byte_order = _pop_int("byte order")
    header_offset = _pop_int("header offset", 0)
    interleave = pairs.pop("interleave").lower()
    return EnviHeader(
        samples=samples, lines=lines, bands=bands, data_type=data_type,
        interleave=interleave, byte_order=byte_order,
        header_offset=header_offset, wavelength=wavelength, extra=pairs,
    )


def read_envi(header_path, data_path=None) -> Hypercube:
    """Read a header/binary pair into a canonical-layout Hypercube."""
    header_path = Path(header_path)
    if data_path is None:
        data_path = header_path.with_suffix(".raw")
    header = read_header(header_path)
    blob = Path(data_path).read_bytes()
    if len(blob) != header.expected_size():
        raise EnviFormatError(
            f"{data_path}: file is {len(blob)} bytes, header declares "
            f"{header.expected_size()}"
        )
    flat = np.frombuffer(blob, dtype=header.dtype, offset=header.header_offset)
    i, j, b = header.lines, header.samples, header.bands
    if header.interleave == "bsq":
        vol = flat.reshape(b, i, j).transpose(1, 2, 0)
    elif header.interleave == "bil":
        vol = flat.reshape(i, b, j).transpose(0, 2, 1)
    else:  # bip
        vol = flat.reshape(i, j, b)
    prov = (
        f"read_envi(interleave={header.interleave},data_type={header.data_type},"
        f"byte_order={header.byte_order})",
    )
    wl = np.asarray(header.wavelength) if header.wavelength else None
    return Hypercube(vol, wavelengths=wl, kind=KIND_RAW, provenance=prov)


def _format_header(header: EnviHeader, extra_lines: dict[str, str]) -> str:
    lines = ["ENVI"]
    lines.append(f"samples = {header.samples}")
    lines.append(f"lines = {header.lines}")
    lines.append(f"bands = {header.bands}")
    lines.append(f"data type = {header.data_type}")
    lines.append(f"interleave = {header.interleave}")
    lines.append(f"byte order = {header.byte_order}")
    lines.append(f"header offset = {header.header_offset}")
    if header.wavelength is not None:
        vals = ", ".join(repr(float(w)) for w in header.wavelength)
        lines.append("wavelength = { " + vals + " }")
    for key, value in {**header.extra, **extra_lines}.items():
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def write_envi(cube: Hypercube, path, interleave: str = "bsq",
               data_type: int = 5, byte_order: int = 0,
               extra: dict[str, str] | None = None) -> tuple[Path, Path]:
    """Write ``cube`` as a header (.hdr) + raw binary (.raw) pair.

    Raises if the cube's float64 values are not exactly representable in
    the requested type code, so round-trips stay bit-exact.
    """
    interleave = interleave.lower()
    if interleave not in INTERLEAVES:
        raise EnviFormatError(f"unsupported interleave {interleave!r}")
    if data_type not in DTYPE_CODES:
        raise EnviFormatError(f"unsupported ENVI data type {data_type}")
    target = DTYPE_CODES[data_type]
    vol = cube.values
    cast = vol.astype(target)
    back = cast.astype(np.float64)
    same = (back == vol) | (np.isnan(back) & np.isnan(vol))
    if not same.all():
        raise EnviFormatError(
            f"cube values not exactly representable as ENVI type {data_type}"
        )

    path = Path(path)
    hdr_path = path.with_suffix(".hdr")
    raw_path = path.with_suffix(".raw")
    header = EnviHeader(
        samples=cube.samples, lines=cube.lines, bands=cube.bands,
        data_type=data_type, interleave=interleave, byte_order=byte_order,
        wavelength=(list(cube.wavelengths) if cube.wavelengths is not None else None),
        extra=dict(extra or {}),
    )
    if interleave == "bsq":
        ordered = cast.transpose(2, 0, 1)
    elif interleave == "bil":
        ordered = cast.transpose(0, 2, 1)
    else:
        ordered = cast
    out = np.ascontiguousarray(ordered).astype(header.dtype)
    hdr_path.write_text(_format_header(header, {}))
    raw_path.write_bytes(out.tobytes())
    return hdr_path, raw_path
