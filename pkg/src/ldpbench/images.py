"""Image preprocessing, perturbation and export.

Preprocessing converts any supported 8-bit input to a square grayscale tensor
normalized into [0, 1]: RGB collapses to luminance with the BT.601 weights
(0.299, 0.587, 0.114) and resizing is bilinear with edge-clamped sampling at
pixel centers.  Perturbation applies the Laplace mechanism per pixel with a
stream derived from (master_seed, image_index), so any scheduling of a batch
yields bit-identical results.

Float exports use the "f32raw" container (little-endian): magic ``LDPT``,
u16 version = 1, u32 height, u32 width, u32 channels, then
height*width*channels IEEE-754 binary32 values in row-major order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError, InvalidParameterError
from .mechanism import PrivacyBudget, perturb_vector
from .rng import RandomStream

F32RAW_MAGIC = b"LDPT"
F32RAW_VERSION = 1
F32RAW_SUFFIX = ".ldpt"
_HEADER = struct.Struct("<4sHIII")

# BT.601 luminance weights for RGB inputs.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)

EXPORT_FORMATS = ("png8", "f32raw")


@dataclass(frozen=True)
class ImageTensor:
    """Grayscale image data: (height, width) float32 values, row-major."""

    height: int
    width: int
    channels: int
    values: np.ndarray

    def __post_init__(self):
        if self.channels != 1:
            raise InvalidParameterError(f"only single-channel tensors are supported, got {self.channels}")
        if self.height < 1 or self.width < 1:
            raise InvalidParameterError(f"dimensions must be positive, got {self.height}x{self.width}")
        arr = np.ascontiguousarray(self.values, dtype=np.float32)
        if arr.shape != (self.height, self.width):
            raise InvalidParameterError(
                f"values shape {arr.shape} does not match {self.height}x{self.width}"
            )
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageTensor":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise InvalidParameterError(f"expected a 2-D array, got shape {arr.shape}")
        return cls(height=arr.shape[0], width=arr.shape[1], channels=1, values=arr)


def _axis_samples(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Output pixel centers mapped back to input coordinates, clamped at edges.
    centers = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    i0 = np.floor(centers).astype(np.int64)
    t = centers - i0
    i1 = np.clip(i0 + 1, 0, n_in - 1)
    i0 = np.clip(i0, 0, n_in - 1)
    return i0, i1, t


def _resize_bilinear(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    r0, r1, tr = _axis_samples(src.shape[0], out_h)
    rows = src[r0, :] * (1.0 - tr)[:, None] + src[r1, :] * tr[:, None]
    c0, c1, tc = _axis_samples(src.shape[1], out_w)
    return rows[:, c0] * (1.0 - tc)[None, :] + rows[:, c1] * tc[None, :]


def _decode_grayscale(im: Image.Image, path) -> np.ndarray:
    """8-bit decode to a float64 luminance array on the 0..255 scale."""
    if im.width == 0 or im.height == 0:
        raise ValueError(f"zero-dimension image: {path}")
    if im.mode == "L":
        return np.asarray(im, dtype=np.float64)
    if im.mode in ("I", "F") or im.mode.startswith("I;16"):
        raise ImageFormatError(f"unsupported bit depth (mode {im.mode!r}): {path}")
    if im.mode != "RGB":
        try:
            im = im.convert("RGB")
        except ValueError as exc:
            raise ImageFormatError(f"unsupported image mode {im.mode!r}: {path}") from exc
    rgb = np.asarray(im, dtype=np.float64)
    return rgb @ _LUMA_WEIGHTS


def load_and_preprocess(path, target_size: int) -> ImageTensor:
    """Decode, grayscale, resize to target_size x target_size, normalize to [0, 1]."""
    if not isinstance(target_size, (int, np.integer)) or target_size < 1:
        raise InvalidParameterError(f"target_size must be a positive integer, got {target_size!r}")
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            gray = _decode_grayscale(im, path)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"not a decodable PNG/JPEG image: {path}") from exc
    normalized = gray / 255.0
    resized = _resize_bilinear(normalized, int(target_size), int(target_size))
    return ImageTensor.from_array(resized.astype(np.float32))


def perturb_image(
    img: ImageTensor,
    beta: float,
    master_seed: int,
    image_index: int,
    clamp: bool,
) -> ImageTensor:
    """Laplace-perturb every pixel at scale beta; optionally clamp back into [0, 1].

    The noise stream is (master_seed, image_index), pixels are consumed in
    row-major order, and beta = 0 returns a bit-identical copy.
    """
    if beta == 0:
        return ImageTensor(img.height, img.width, 1, img.values.copy())
    stream = RandomStream(master_seed, image_index)
    budget = PrivacyBudget.from_beta(beta, sensitivity=1.0)
    flat = perturb_vector(img.values.astype(np.float64).ravel(), budget, stream)
    if clamp:
        np.clip(flat, 0.0, 1.0, out=flat)
    return ImageTensor(img.height, img.width, 1, flat.reshape(img.height, img.width).astype(np.float32))


def quantize_u8(img: ImageTensor) -> np.ndarray:
    """Map values to bytes: round(clamp(v, 0, 1) * 255), half rounding to even."""
    clamped = np.clip(img.values.astype(np.float64), 0.0, 1.0)
    return np.rint(clamped * 255.0).astype(np.uint8)


def write_tensor(img: ImageTensor, path, fmt: str) -> None:
    """Write png8 (quantized 8-bit grayscale PNG) or f32raw (bit-exact floats)."""
    path = Path(path)
    if fmt == "png8":
        Image.fromarray(quantize_u8(img), mode="L").save(path, format="PNG")
    elif fmt == "f32raw":
        header = _HEADER.pack(F32RAW_MAGIC, F32RAW_VERSION, img.height, img.width, img.channels)
        payload = img.values.astype("<f4", copy=False).tobytes(order="C")
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    else:
        raise InvalidParameterError(f"unknown export format {fmt!r}; expected one of {EXPORT_FORMATS}")


def read_tensor(path) -> ImageTensor:
    """Read back a tensor written by :func:`write_tensor` (f32raw or 8-bit PNG)."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head == F32RAW_MAGIC:
            rest = fh.read(_HEADER.size - 4)
            if len(rest) < _HEADER.size - 4:
                raise ImageFormatError(f"truncated f32raw header: {path}")
            _, version, height, width, channels = _HEADER.unpack(head + rest)
            if version != F32RAW_VERSION:
                raise ImageFormatError(f"unsupported f32raw version {version}: {path}")
            if channels != 1:
                raise ImageFormatError(f"unsupported channel count {channels}: {path}")
            payload = fh.read(height * width * 4)
            if len(payload) != height * width * 4:
                raise ImageFormatError(f"truncated f32raw payload: {path}")
            values = np.frombuffer(payload, dtype="<f4").reshape(height, width)
            return ImageTensor(height, width, 1, values)
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode != "L":
                raise ImageFormatError(f"expected 8-bit grayscale PNG, got mode {im.mode!r}: {path}")
            values = np.asarray(im, dtype=np.float64) / 255.0
            return ImageTensor.from_array(values.astype(np.float32))
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"not an f32raw container or decodable image: {path}") from exc
