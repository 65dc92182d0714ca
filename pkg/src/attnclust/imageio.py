"""Raster I/O: binary PPM (P6) and PGM (P5), with PNG behind the same loader."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np


class ImageFormatError(ValueError):
    pass


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comments
    while pos < len(buf):
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < len(buf) and buf[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < len(buf) and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ImageFormatError(f"truncated header at byte {start}")
    return buf[start:pos], pos


def _parse_netpbm(buf: bytes, magic: bytes, channels: int) -> np.ndarray:
    if not buf.startswith(magic):
        raise ImageFormatError(f"bad magic {buf[:2]!r}, expected {magic.decode()}")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        try:
            fields.append(int(tok))
        except ValueError as exc:
            raise ImageFormatError(f"non-numeric header field {tok!r}") from exc
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError(f"bad dimensions {width}x{height}")
    if not 0 < maxval < 256:
        raise ImageFormatError(f"only 8-bit rasters supported, maxval={maxval}")
    pos += 1  # single whitespace after maxval
    need = width * height * channels
    payload = buf[pos : pos + need]
    if len(payload) < need:
        raise ImageFormatError(f"truncated payload at byte {pos + len(payload)}, need {need} bytes")
    arr = np.frombuffer(payload, dtype=np.uint8)
    if channels == 1:
        return arr.reshape(height, width)
    return arr.reshape(height, width, channels)


def decode_ppm(buf: bytes) -> np.ndarray:
    return _parse_netpbm(buf, b"P6", 3)


def decode_pgm(buf: bytes) -> np.ndarray:
    return _parse_netpbm(buf, b"P5", 1)


def encode_ppm(image: np.ndarray) -> bytes:
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ImageFormatError(f"expected H x W x 3, got shape {img.shape}")
    h, w = img.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + img.tobytes()


def encode_pgm_mask(mask: np.ndarray) -> bytes:
    """Binary mask as P5: 0 = background, 255 = foreground."""
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2:
        raise ImageFormatError(f"expected H x W mask, got shape {m.shape}")
    h, w = m.shape
    return b"P5\n%d %d\n255\n" % (w, h) + (m.astype(np.uint8) * 255).tobytes()


def decode_pgm_mask(buf: bytes) -> np.ndarray:
    return decode_pgm(buf) >= 128


def decode_image(buf: bytes) -> np.ndarray:
    """RGB array from PPM (mandatory path) or PNG (optional, via Pillow)."""
    if buf.startswith(b"P6"):
        return decode_ppm(buf)
    if buf.startswith(b"\x89PNG"):
        from PIL import Image

        with Image.open(io.BytesIO(buf)) as im:
            return np.asarray(im.convert("RGB"))
    raise ImageFormatError(f"unrecognized image format (leading bytes {buf[:4]!r})")


def load_image(path) -> np.ndarray:
    return decode_image(Path(path).read_bytes())


def save_mask(path, mask: np.ndarray) -> None:
    Path(path).write_bytes(encode_pgm_mask(mask))
