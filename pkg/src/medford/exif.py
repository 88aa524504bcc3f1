"""Minimal EXIF extraction from JPEG images.

Walks the JPEG segment chain to the APP1 ``Exif`` payload, parses the
TIFF header in either byte order, and pulls the handful of tags worth
turning into metadata: camera make/model, the original timestamp, and
GPS position (degree/minute/second rationals converted to signed decimal
degrees). Every read is bounds-checked so arbitrary bytes can never take
the parser outside its buffer.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass

from .blocks import Block, MinorEntry
from .diagnostics import Span

_SOI = b"\xff\xd8"
_EXIF_HEADER = b"Exif\x00\x00"
_ASCII = 2
_LONG = 4
_RATIONAL = 5

_TAG_MAKE = 0x010F
_TAG_MODEL = 0x0110
_TAG_EXIF_IFD = 0x8769
_TAG_GPS_IFD = 0x8825
_TAG_DATETIME_ORIGINAL = 0x9003
_TAG_GPS_LAT_REF = 0x0001
_TAG_GPS_LAT = 0x0002
_TAG_GPS_LON_REF = 0x0003
_TAG_GPS_LON = 0x0004

_DATETIME = re.compile(r"^(\d{4}):(\d{2}):(\d{2}) (\d{2}:\d{2}:\d{2})$")


class ExifError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class ExifRecord:
    datetime_original: str | None = None  # ISO 8601
    latitude: float | None = None  # signed decimal degrees
    longitude: float | None = None
    make: str | None = None
    model: str | None = None


def _find_exif_segment(data: bytes) -> bytes:
    if data[:2] != _SOI:
        raise ExifError("E-EXIF-NOT-JPEG", "missing JPEG SOI marker")
    pos = 2
    n = len(data)
    while pos + 4 <= n:
        if data[pos] != 0xFF:
            break
        marker = data[pos + 1]
        if marker in (0xD8, 0xD9, 0x01) or 0xD0 <= marker <= 0xD7:
            pos += 2
            continue
        length = struct.unpack_from(">H", data, pos + 2)[0]
        if length < 2 or pos + 2 + length > n:
            break
        if marker == 0xE1 and data[pos + 4:pos + 10] == _EXIF_HEADER:
            return data[pos + 10:pos + 2 + length]
        if marker == 0xDA:  # start of scan: entropy-coded data follows
            break
        pos += 2 + length
    raise ExifError("E-EXIF-ABSENT", "no APP1 Exif segment found")


class _Tiff:
    def __init__(self, data: bytes):
        if len(data) < 8:
            raise ExifError("E-EXIF-CORRUPT", "TIFF header truncated")
        if data[:2] == b"II":
            self._fmt = "<"
        elif data[:2] == b"MM":
            self._fmt = ">"
        else:
            raise ExifError("E-EXIF-CORRUPT", f"unknown byte order {data[:2]!r}")
        self._data = data
        if self.u16(2) != 42:
            raise ExifError("E-EXIF-CORRUPT", "bad TIFF magic")

    def _unpack(self, code: str, offset: int, size: int) -> int:
        if offset < 0 or offset + size > len(self._data):
            raise ExifError("E-EXIF-CORRUPT", f"read of {size} bytes at {offset} is out of bounds")
        return struct.unpack_from(self._fmt + code, self._data, offset)[0]

    def u16(self, offset: int) -> int:
        return self._unpack("H", offset, 2)

    def u32(self, offset: int) -> int:
        return self._unpack("I", offset, 4)

    def raw(self, offset: int, size: int) -> bytes:
        if offset < 0 or offset + size > len(self._data):
            raise ExifError("E-EXIF-CORRUPT", f"read of {size} bytes at {offset} is out of bounds")
        return self._data[offset:offset + size]

    def ifd(self, offset: int) -> dict[int, tuple[int, int, int]]:
        """Map tag -> (type, count, offset of the value field)."""
        count = self.u16(offset)
        entries: dict[int, tuple[int, int, int]] = {}
        for i in range(count):
            base = offset + 2 + 12 * i
            tag = self.u16(base)
            entries[tag] = (self.u16(base + 2), self.u32(base + 4), base + 8)
        return entries

    def ascii(self, entry: tuple[int, int, int]) -> str | None:
        kind, count, value_off = entry
        if kind != _ASCII or count == 0:
            return None
        offset = value_off if count <= 4 else self.u32(value_off)
        text = self.raw(offset, count).split(b"\x00", 1)[0]
        return text.decode("ascii", "replace").strip() or None

    def long(self, entry: tuple[int, int, int]) -> int | None:
        kind, count, value_off = entry
        if kind != _LONG or count != 1:
            return None
        return self.u32(value_off)

    def rationals(self, entry: tuple[int, int, int]) -> list[float] | None:
        kind, count, value_off = entry
        if kind != _RATIONAL or count == 0:
            return None
        offset = self.u32(value_off)
        values: list[float] = []
        for i in range(count):
            numerator = self.u32(offset + 8 * i)
            denominator = self.u32(offset + 8 * i + 4)
            if denominator == 0:
                return None
            values.append(numerator / denominator)
        return values


def _to_decimal(dms: list[float], ref: str | None, negative_ref: str, limit: float) -> float | None:
    if len(dms) != 3 or ref is None:
        return None
    decimal = dms[0] + dms[1] / 60.0 + dms[2] / 3600.0
    if ref.upper() == negative_ref:
        decimal = -decimal
    if abs(decimal) > limit:
        return None
    return decimal


def _iso_datetime(raw: str | None) -> str | None:
    if raw is None:
        return None
    match = _DATETIME.match(raw.strip())
    if match is None:
        return None
    return f"{match.group(1)}-{match.group(2)}-{match.group(3)}T{match.group(4)}"


def read_exif(data: bytes) -> ExifRecord:
    """Parse the EXIF subset out of JPEG bytes.

    Raises :class:`ExifError` with E-EXIF-NOT-JPEG, E-EXIF-ABSENT, or
    E-EXIF-CORRUPT; fields that are merely missing or malformed inside an
    otherwise healthy structure are returned as None.
    """
    tiff = _Tiff(_find_exif_segment(data))
    ifd0 = tiff.ifd(tiff.u32(4))

    make = tiff.ascii(ifd0[_TAG_MAKE]) if _TAG_MAKE in ifd0 else None
    model = tiff.ascii(ifd0[_TAG_MODEL]) if _TAG_MODEL in ifd0 else None

    datetime_original = None
    if _TAG_EXIF_IFD in ifd0:
        pointer = tiff.long(ifd0[_TAG_EXIF_IFD])
        if pointer is not None:
            exif_ifd = tiff.ifd(pointer)
            if _TAG_DATETIME_ORIGINAL in exif_ifd:
                datetime_original = _iso_datetime(tiff.ascii(exif_ifd[_TAG_DATETIME_ORIGINAL]))

    latitude = longitude = None
    if _TAG_GPS_IFD in ifd0:
        pointer = tiff.long(ifd0[_TAG_GPS_IFD])
        if pointer is not None:
            gps = tiff.ifd(pointer)
            if _TAG_GPS_LAT in gps and _TAG_GPS_LAT_REF in gps:
                dms = tiff.rationals(gps[_TAG_GPS_LAT])
                if dms is not None:
                    latitude = _to_decimal(dms, tiff.ascii(gps[_TAG_GPS_LAT_REF]), "S", 90.0)
            if _TAG_GPS_LON in gps and _TAG_GPS_LON_REF in gps:
                dms = tiff.rationals(gps[_TAG_GPS_LON])
                if dms is not None:
                    longitude = _to_decimal(dms, tiff.ascii(gps[_TAG_GPS_LON_REF]), "W", 180.0)
    if (latitude is None) != (longitude is None):
        latitude = longitude = None

    return ExifRecord(datetime_original, latitude, longitude, make, model)


def read_exif_file(path: str) -> ExifRecord:
    with open(path, "rb") as handle:
        return read_exif(handle.read())


def exif_to_block(record: ExifRecord, name: str) -> Block:
    """Build a ``@Photo`` block; absent record fields produce no minors."""
    block = Block("Photo", name, span=Span(1))
    pairs = [
        ("Date", record.datetime_original),
        ("Latitude", None if record.latitude is None else f"{record.latitude:.6f}"),
        ("Longitude", None if record.longitude is None else f"{record.longitude:.6f}"),
        ("Make", record.make),
        ("Model", record.model),
    ]
    for minor, payload in pairs:
        if payload is not None:
            block.minors.append(MinorEntry(minor, payload, Span(1)))
    return block
