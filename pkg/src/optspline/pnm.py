"""Grayscale image files.

PGM (``P2`` ASCII and ``P5`` binary) is handled here directly. PNG goes
through Pillow, imported only when a ``.png`` path is used, so the rest of
the package never touches compressed bytes.

Pixels are returned as floats in ``[0, 1]``.
"""
from __future__ import annotations

import os

import numpy as np

from .errors import ImageFormatError


def _tokens(data: bytes, count: int, pos: int = 0):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated PGM header")
        out.append(data[start:pos])
    return out, pos


def decode_pgm(data: bytes) -> tuple[np.ndarray, int]:
    """Decode PGM bytes to ``(pixels in [0, 1], bit depth)``."""
    (magic, w, h, maxval), pos = _tokens(data, 4)
    width, height, maxval = int(w), int(h), int(maxval)
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ImageFormatError("invalid PGM dimensions or maxval")
    if magic == b"P5":
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        nbytes = width * height * dtype.itemsize
        raw = data[pos:pos + nbytes]
        if len(raw) < nbytes:
            raise ImageFormatError("truncated PGM raster")
        pix = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    elif magic == b"P2":
        vals = data[pos:].split()
        if len(vals) < width * height:
            raise ImageFormatError("truncated PGM raster")
        pix = np.array([int(v) for v in vals[:width * height]], dtype=np.float64)
    else:
        raise ImageFormatError(f"not a PGM file (magic {magic!r})")
    depth = 16 if maxval > 255 else 8
    return pix.reshape(height, width) / maxval, depth


def encode_pgm(pixels: np.ndarray, binary: bool = True, bit_depth: int = 8) -> bytes:
    """Clamp to ``[0, 1]``, quantise and encode as PGM."""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2:
        raise ValueError("PGM holds a single channel")
    maxval = (1 << bit_depth) - 1
    q = quantize(pixels, bit_depth)
    height, width = q.shape
    header = f"{'P5' if binary else 'P2'}\n{width} {height}\n{maxval}\n".encode()
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        return header + q.astype(dtype).tobytes()
    lines = [" ".join(str(int(v)) for v in row) for row in q]
    return header + ("\n".join(lines) + "\n").encode()


def quantize(pixels: np.ndarray, bit_depth: int = 8) -> np.ndarray:
    maxval = (1 << bit_depth) - 1
    return np.rint(np.clip(pixels, 0.0, 1.0) * maxval).astype(np.int64)


def read_image(path: str) -> tuple[np.ndarray, int]:
    """Read a PGM or PNG file; returns ``(pixels, bit depth)``."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".png":
        return _png_read(path)
    with open(path, "rb") as fh:
        return decode_pgm(fh.read())


def write_image(path: str, pixels: np.ndarray, bit_depth: int = 8, binary: bool = True) -> None:
    ext = os.path.splitext(path)[1].lower()
    if ext == ".png":
        _png_write(path, pixels, bit_depth)
        return
    with open(path, "wb") as fh:
        fh.write(encode_pgm(pixels, binary=binary, bit_depth=bit_depth))


def _png_read(path):
    from PIL import Image

    with Image.open(path) as im:
        if im.mode in ("I;16", "I;16B", "I"):
            arr = np.asarray(im, dtype=np.float64)
            return arr / 65535.0, 16
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB" if "A" in im.mode or im.mode == "P" else "L")
        arr = np.asarray(im, dtype=np.float64) / 255.0
    return arr, 8


def _png_write(path, pixels, bit_depth):
    from PIL import Image

    q = quantize(np.asarray(pixels), bit_depth)
    if bit_depth == 16:
        Image.fromarray(q.astype(np.uint16)).save(path)
    else:
        Image.fromarray(q.astype(np.uint8)).save(path)
