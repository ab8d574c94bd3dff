"""Binary portable graymap / pixmap readers and writers.

Only the features this package needs: P5 graymaps at maxval 255 or 65535
(16-bit samples big-endian, per the netpbm convention) and P6 pixmaps at
maxval 255. No external imaging dependency.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_pgm(path, values: np.ndarray, maxval: int = 255) -> None:
    """Write a 2-D unsigned integer array as a binary P5 graymap."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError("graymap data must be 2-D")
    if values.min() < 0 or values.max() > maxval:
        raise ValueError("graymap values out of range for maxval=%d" % maxval)
    header = f"P5\n{values.shape[1]} {values.shape[0]}\n{maxval}\n".encode("ascii")
    if maxval > 255:
        payload = values.astype(">u2").tobytes()
    else:
        payload = values.astype(np.uint8).tobytes()
    Path(path).write_bytes(header + payload)


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Read a binary P5 graymap. Returns (values, maxval)."""
    raw = Path(path).read_bytes()
    magic, rest = _token(raw, 0)
    if magic != b"P5":
        raise ValueError("not a binary P5 graymap")
    width, rest = _token(raw, rest)
    height, rest = _token(raw, rest)
    maxval, rest = _token(raw, rest)
    width, height, maxval = int(width), int(height), int(maxval)
    dtype = ">u2" if maxval > 255 else np.uint8
    data = np.frombuffer(raw, dtype=dtype, count=width * height, offset=rest)
    return data.reshape(height, width).astype(np.int64), maxval


def write_ppm(path, rgb: np.ndarray) -> None:
    """Write an (H, W, 3) uint8 array as a binary P6 pixmap."""
    rgb = np.asarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("pixmap data must have shape (H, W, 3)")
    header = f"P6\n{rgb.shape[1]} {rgb.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    magic, rest = _token(raw, 0)
    if magic != b"P6":
        raise ValueError("not a binary P6 pixmap")
    width, rest = _token(raw, rest)
    height, rest = _token(raw, rest)
    maxval, rest = _token(raw, rest)
    width, height = int(width), int(height)
    if int(maxval) != 255:
        raise ValueError("only maxval 255 pixmaps supported")
    data = np.frombuffer(raw, dtype=np.uint8, count=width * height * 3, offset=rest)
    return data.reshape(height, width, 3).copy()


def _token(raw: bytes, offset: int) -> tuple[bytes, int]:
    """Next whitespace-delimited header token, skipping # comments."""
    i = offset
    while True:
        while i < len(raw) and raw[i : i + 1].isspace():
            i += 1
        if i < len(raw) and raw[i : i + 1] == b"#":
            while i < len(raw) and raw[i : i + 1] != b"\n":
                i += 1
            continue
        break
    start = i
    while i < len(raw) and not raw[i : i + 1].isspace():
        i += 1
    if start == i:
        raise ValueError("truncated netpbm header")
    return raw[start:i], i + 1
