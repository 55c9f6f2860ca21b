"""Binary pixmaps (P6) and the palettes that fill them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fixed_points import Stability


@dataclass(frozen=True)
class ImageBuffer:
    """Row-major 8-bit RGB, top row first; ``pixels`` has shape ``(height, width, 3)``."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.shape != (self.height, self.width, 3):
            raise ValueError(f"pixels have shape {px.shape}, expected {(self.height, self.width, 3)}")
        object.__setattr__(self, "pixels", px)

    @classmethod
    def blank(cls, width: int, height: int) -> "ImageBuffer":
        return cls(width, height, np.zeros((height, width, 3), dtype=np.uint8))

    def __eq__(self, other):
        return (isinstance(other, ImageBuffer) and self.width == other.width
                and self.height == other.height and np.array_equal(self.pixels, other.pixels))

    def to_bytes(self) -> bytes:
        return f"P6\n{self.width} {self.height}\n255\n".encode("ascii") + self.pixels.tobytes()


def encode_image(buf: ImageBuffer, path) -> None:
    with open(path, "wb") as fh:
        fh.write(buf.to_bytes())


def decode_bytes(data: bytes) -> ImageBuffer:
    """Parse a P6 pixmap with maxval 255 (header comments are not supported)."""
    tokens = []
    pos = 0
    for _ in range(4):
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P6":
        raise ValueError("not a P6 pixmap")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ValueError("malformed P6 header") from None
    if maxval != 255:
        raise ValueError("only maxval 255 is supported")
    # a single whitespace byte separates the header from the raster
    raster = data[pos + 1:]
    if len(raster) != 3 * width * height:
        raise ValueError(f"raster has {len(raster)} bytes, expected {3 * width * height}")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return ImageBuffer(width, height, pixels.copy())


def decode_image(path) -> ImageBuffer:
    with open(path, "rb") as fh:
        return decode_bytes(fh.read())


def gray_log(values: np.ndarray) -> ImageBuffer:
    """Zero maps to black; positive values to ``log(1+v)/log(1+v_max)`` gray, never black."""
    values = np.asarray(values, dtype=float)
    vmax = float(values.max()) if values.size else 0.0
    level = np.zeros(values.shape)
    if vmax > 0:
        level = np.clip(np.log1p(values) / np.log1p(vmax), 0.0, 1.0)
    gray = np.where(values > 0, np.maximum(np.rint(255 * level), 1), 0).astype(np.uint8)
    h, w = values.shape
    return ImageBuffer(w, h, np.repeat(gray[:, :, None], 3, axis=2))


# eight-colour cycle for escape-time bands
_BANDS = np.array([
    (66, 30, 15), (25, 7, 26), (9, 1, 47), (4, 4, 73),
    (12, 44, 138), (57, 125, 209), (211, 236, 248), (248, 201, 95),
], dtype=np.uint8)


def escape_image(counts: np.ndarray, palette: str = "gray_log") -> ImageBuffer:
    """Colour an escape-count grid; bounded pixels (count -1) are black.

    Escaped pixels are never black: ``gray_log`` shades by ``log(2 + n)``
    and ``iter_bands`` cycles through :data:`_BANDS`.
    """
    counts = np.asarray(counts)
    bounded = counts < 0
    if palette == "iter_bands":
        px = _BANDS[np.where(bounded, 0, counts) % len(_BANDS)]
        px[bounded] = 0
        h, w = counts.shape
        return ImageBuffer(w, h, px)
    weight = np.where(bounded, 0.0, np.log(2.0 + np.maximum(counts, 0)) - np.log(2.0) + 1e-3)
    return gray_log(weight)


STABILITY_COLOURS = {
    Stability.ATTRACTING: (40, 90, 220),
    Stability.SADDLE: (220, 40, 40),
    Stability.REPELLING_COMPLEX_PAIR: (60, 170, 80),
    Stability.REPELLING_REAL: (140, 70, 170),
    Stability.INDETERMINATE: (0, 0, 0),
}


def stability_image(codes: np.ndarray) -> ImageBuffer:
    """Colour a :func:`~qrgreen.fixed_points.stability_grid` result."""
    lut = np.array([STABILITY_COLOURS[s] for s in Stability], dtype=np.uint8)
    h, w = codes.shape
    return ImageBuffer(w, h, lut[codes])


def draw_polylines(buf: ImageBuffer, spec, polylines, colour=(255, 64, 64)) -> ImageBuffer:
    """Stamp polyline vertices (densified to pixel spacing) onto a copy of ``buf``."""
    px = buf.pixels.copy()
    step = 0.5 * min(spec.dx, spec.dy)
    for line in polylines:
        line = np.asarray(line, dtype=complex)
        if line.size == 0:
            continue
        a, b = line[:-1], line[1:]
        n = np.maximum(1, np.ceil(np.abs(b - a) / step).astype(int))
        pts = [line[-1:]] + [a[k] + (b[k] - a[k]) * np.arange(n[k]) / n[k] for k in range(a.size)]
        z = np.concatenate(pts)
        i = np.floor((z.real - spec.x_min) / spec.dx).astype(int)
        j = np.floor((spec.y_max - z.imag) / spec.dy).astype(int)
        ok = (i >= 0) & (i < spec.width) & (j >= 0) & (j < spec.height)
        px[j[ok], i[ok]] = colour
    return ImageBuffer(buf.width, buf.height, px)
