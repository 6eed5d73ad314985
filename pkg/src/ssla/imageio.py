"""Image decode/encode (sRGB PNG, PFM) and luminance extraction.

All in-memory images are float64 arrays in *linear* RGB, shape (H, W, 3),
nominally in [0, 1] but allowed to exceed 1 between processing stages;
clipping happens only when encoding to file.
"""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from .errors import DecodeError, InputError

# Display transfer function constants (IEC 61966-2-1).
_EOTF_KNEE = 0.04045
_OETF_KNEE = 0.0031308
_LINEAR_SLOPE = 12.92
_GAMMA = 2.4
_OFFSET = 0.055

# Luminance weights for linear RGB (ITU-R BT.709 primaries).
LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


def eotf(encoded):
    """Decode display-encoded values in [0, 1] to linear light."""
    c = np.asarray(encoded, dtype=np.float64)
    lo = c / _LINEAR_SLOPE
    hi = ((c + _OFFSET) / (1.0 + _OFFSET)) ** _GAMMA
    return np.where(c <= _EOTF_KNEE, lo, hi)


def oetf(linear):
    """Encode linear light in [0, 1] to display-encoded values."""
    y = np.asarray(linear, dtype=np.float64)
    lo = _LINEAR_SLOPE * y
    # negative bases would NaN under the fractional power; mask them out
    hi = (1.0 + _OFFSET) * np.power(np.maximum(y, 0.0), 1.0 / _GAMMA) - _OFFSET
    return np.where(y <= _OETF_KNEE, lo, hi)


def luminance(image: np.ndarray) -> np.ndarray:
    """Per-pixel luminance of a linear RGB image, shape (H, W)."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InputError(f"expected (H, W, 3) image, got shape {img.shape}")
    return img @ LUMA_WEIGHTS


def decode_png(path) -> np.ndarray:
    """Read an 8- or 16-bit PNG as linear RGB float64."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise DecodeError(f"cannot decode image file: {path}")
    if raw.ndim == 2:
        raw = raw[:, :, None].repeat(3, axis=2)
    if raw.shape[2] == 4:  # drop alpha
        raw = raw[:, :, :3]
    if raw.shape[2] != 3:
        raise DecodeError(f"unsupported channel count {raw.shape[2]}: {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise DecodeError(f"unsupported PNG sample type {raw.dtype}: {path}")
    bgr = raw.astype(np.float64) / scale
    return eotf(bgr[:, :, ::-1])


def encode_png(path, image: np.ndarray, bit_depth: int = 8) -> None:
    """Write linear RGB to PNG, clipping to [0, 1] and display-encoding."""
    if bit_depth not in (8, 16):
        raise InputError(f"bit_depth must be 8 or 16, got {bit_depth}")
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InputError(f"expected (H, W, 3) image, got shape {img.shape}")
    enc = oetf(np.clip(img, 0.0, 1.0))
    if bit_depth == 8:
        data = np.rint(enc * 255.0).astype(np.uint8)
    else:
        data = np.rint(enc * 65535.0).astype(np.uint16)
    if not cv2.imwrite(str(path), data[:, :, ::-1]):
        raise InputError(f"cannot write image file: {path}")


def read_pfm(path) -> np.ndarray:
    """Read a PFM file as linear RGB float64 (grayscale is replicated)."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise DecodeError(f"cannot read file: {path}") from exc

    def next_token(pos):
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DecodeError(f"truncated PFM header: {path}")
        return blob[start:pos], pos

    try:
        magic, pos = next_token(0)
        if magic not in (b"PF", b"Pf"):
            raise DecodeError(f"not a PFM file (magic {magic!r}): {path}")
        wtok, pos = next_token(pos)
        htok, pos = next_token(pos)
        stok, pos = next_token(pos)
        width, height = int(wtok), int(htok)
        scale = float(stok)
    except (ValueError, DecodeError) as exc:
        if isinstance(exc, DecodeError):
            raise
        raise DecodeError(f"malformed PFM header: {path}") from exc
    if width <= 0 or height <= 0:
        raise DecodeError(f"bad PFM dimensions {width}x{height}: {path}")
    if scale == 0:
        raise DecodeError(f"PFM scale must be nonzero: {path}")

    channels = 3 if magic == b"PF" else 1
    count = width * height * channels
    pos += 1  # single whitespace byte terminates the header
    expected = count * 4
    if len(blob) - pos < expected:
        raise DecodeError(f"truncated PFM pixel data: {path}")
    endian = "<" if scale < 0 else ">"
    data = np.frombuffer(blob, dtype=endian + "f4", count=count, offset=pos)
    data = data.reshape(height, width, channels).astype(np.float64)
    data = np.flipud(data) * abs(scale)  # rows are stored bottom-to-top
    if channels == 1:
        data = data.repeat(3, axis=2)
    return np.ascontiguousarray(data)


def write_pfm(path, image: np.ndarray, little_endian: bool = True) -> None:
    """Write linear float data as PFM (color for (H, W, 3), gray for (H, W)).

    Endianness is recorded in the scale field's sign: negative means
    little-endian.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 3 and img.shape[2] == 3:
        magic = b"PF"
    elif img.ndim == 2:
        magic = b"Pf"
    else:
        raise InputError(f"expected (H, W, 3) or (H, W) image, got shape {img.shape}")
    h, w = img.shape[:2]
    scale = "-1.0" if little_endian else "1.0"
    header = magic + b"\n" + f"{w} {h}\n{scale}\n".encode()
    payload = np.flipud(img).astype("<f4" if little_endian else ">f4").tobytes()
    Path(path).write_bytes(header + payload)


def decode_image(path) -> np.ndarray:
    """Decode by file extension: .pfm as linear data, .png via the display
    transfer function."""
    name = str(path).lower()
    if name.endswith(".pfm"):
        return read_pfm(path)
    if name.endswith(".png"):
        return decode_png(path)
    raise InputError(f"unsupported image format (use .png or .pfm): {path}")


def load_stack(paths) -> list[np.ndarray]:
    """Decode several exposures and require identical dimensions."""
    if not paths:
        raise InputError("no input images given")
    images = [decode_image(p) for p in paths]
    shape = images[0].shape
    for p, img in zip(paths, images):
        if img.shape != shape:
            raise InputError(
                f"input dimensions differ: {p} is {img.shape[1]}x{img.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}"
            )
    return images
