"""Dataset loading against the benchmark's file interfaces.

The harness consumes a dataset directory containing ``manifest.json``::

    {"root": ".", "split_seed": ..., "source": ...,
     "entries": [{"path": ..., "label": "Normal"|"Pneumonia",
                  "split": "train"|"val"|"test"}, ...]}

Images are either 8-bit grayscale PNGs (re-normalized by /255) or "f32raw"
containers read bit-exactly: little-endian magic ``LDPT``, u16 version = 1,
u32 height/width/channels, then float32 values row-major.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

LABELS = ("Normal", "Pneumonia")
SPLITS = ("train", "val", "test")

_F32RAW_MAGIC = b"LDPT"
_F32RAW_HEADER = struct.Struct("<4sHIII")


class DatasetError(RuntimeError):
    """The dataset directory is unreadable or violates the manifest contract."""


def read_image(path: Path) -> np.ndarray:
    """Decode one image to a (H, W) float32 array of normalized intensities."""
    with open(path, "rb") as fh:
        head = fh.read(_F32RAW_HEADER.size)
        if head[:4] == _F32RAW_MAGIC:
            if len(head) < _F32RAW_HEADER.size:
                raise DatasetError(f"truncated f32raw header: {path}")
            _, version, height, width, channels = _F32RAW_HEADER.unpack(head)
            if version != 1 or channels != 1:
                raise DatasetError(f"unsupported f32raw layout (v{version}, c{channels}): {path}")
            payload = fh.read(height * width * 4)
            if len(payload) != height * width * 4:
                raise DatasetError(f"truncated f32raw payload: {path}")
            return np.frombuffer(payload, dtype="<f4").reshape(height, width).copy()
    with Image.open(path) as im:
        if im.mode != "L":
            raise DatasetError(f"expected 8-bit grayscale, got mode {im.mode!r}: {path}")
        return (np.asarray(im, dtype=np.float32) / np.float32(255.0)).astype(np.float32)


@dataclass
class SplitArrays:
    """One split as dense arrays: images (N, 1, H, W) float32, labels (N,) int64."""

    images: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)


def load_dataset(dataset_dir) -> dict[str, SplitArrays]:
    """Load all three splits in the manifest's canonical order."""
    dataset_dir = Path(dataset_dir)
    manifest_path = dataset_dir / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"cannot read manifest {manifest_path}: {exc}") from exc

    buckets: dict[str, list[tuple[np.ndarray, int]]] = {split: [] for split in SPLITS}
    for entry in manifest.get("entries", []):
        split = entry.get("split")
        label = entry.get("label")
        if split not in SPLITS or label not in LABELS:
            raise DatasetError(
                f"manifest entry {entry.get('path')!r} needs a split in {SPLITS} "
                f"and a label in {LABELS}"
            )
        image = read_image(dataset_dir / entry["path"])
        buckets[split].append((image, LABELS.index(label)))

    splits: dict[str, SplitArrays] = {}
    for split, items in buckets.items():
        if not items:
            raise DatasetError(f"split {split!r} has no images")
        shapes = {img.shape for img, _ in items}
        if len(shapes) != 1:
            raise DatasetError(f"split {split!r} mixes image shapes: {sorted(shapes)}")
        images = np.stack([img for img, _ in items]).astype(np.float32)[:, None, :, :]
        labels = np.array([lab for _, lab in items], dtype=np.int64)
        if len(set(labels.tolist())) < 2:
            raise DatasetError(f"split {split!r} does not contain both classes")
        splits[split] = SplitArrays(images=images, labels=labels)
    return splits
