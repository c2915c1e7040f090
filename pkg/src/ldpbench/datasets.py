"""Dataset discovery, deterministic splitting, synthetic generation, materialization.

A manifest is the unit of dataset identity: a lexicographically sorted list of
(relative path, label, split) entries plus provenance.  The sort order is
canonical and defines each image's index, which in turn selects its noise
stream, so appending new files at the end of the order never changes the
noise applied to existing ones.

Serialized manifests store ``root`` as "." and resolve it against the
manifest file's directory on load; trees stay byte-identical wherever they
are materialized.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path, PurePosixPath

import numpy as np
from PIL import Image

from .errors import (
    DatasetLayoutError,
    InsufficientDataError,
    InvalidParameterError,
    MaterializationError,
)
from .images import F32RAW_SUFFIX, ImageTensor, load_and_preprocess, perturb_image, write_tensor
from .mechanism import naive_composition
from .rng import RandomStream

LABELS = ("Normal", "Pneumonia")
SPLITS = ("train", "val", "test")
DEFAULT_SPLIT_RATIOS = (0.7, 0.15, 0.15)
MANIFEST_NAME = "manifest.json"
PROVENANCE_NAME = "_ldp_provenance.json"
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", F32RAW_SUFFIX)

# Synthetic generation draws from a stream-id namespace far above any
# realistic image index, so reusing one seed for generation and perturbation
# cannot alias streams.
_SYNTH_STREAM_BASE = 2**63


@dataclass(frozen=True)
class ManifestEntry:
    path: str  # relative POSIX path under the dataset root
    label: str
    split: str | None = None

    def __post_init__(self):
        if self.label not in LABELS:
            raise InvalidParameterError(f"label must be one of {LABELS}, got {self.label!r}")
        if self.split is not None and self.split not in SPLITS:
            raise InvalidParameterError(f"split must be one of {SPLITS}, got {self.split!r}")


@dataclass
class DatasetManifest:
    """Labeled, split-assigned file listing; entries sorted by path (canonical order)."""

    root: Path
    entries: list[ManifestEntry]
    split_seed: int | None = None
    source: str = ""

    def __post_init__(self):
        self.root = Path(self.root)
        paths = [e.path for e in self.entries]
        if len(set(paths)) != len(paths):
            dupes = sorted({p for p in paths if paths.count(p) > 1})
            raise InvalidParameterError(f"duplicate manifest paths: {dupes[:5]}")
        self.entries = sorted(self.entries, key=lambda e: e.path)

    def entries_for_split(self, split: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == split]

    def class_count(self, label: str) -> int:
        return sum(1 for e in self.entries if e.label == label)

    def digest(self) -> str:
        """SHA-256 over the canonical JSON encoding of the entries."""
        blob = json.dumps(
            [{"path": e.path, "label": e.label, "split": e.split} for e in self.entries],
            sort_keys=True,
            separators=(",", ":"),
        ).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    def to_dict(self) -> dict:
        return {
            "root": ".",
            "split_seed": self.split_seed,
            "source": self.source,
            "entries": [
                {"path": e.path, "label": e.label, "split": e.split} for e in self.entries
            ],
        }

    def save(self, path=None) -> Path:
        path = Path(path) if path is not None else self.root / MANIFEST_NAME
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        data = json.loads(path.read_text())
        entries = [
            ManifestEntry(path=e["path"], label=e["label"], split=e.get("split"))
            for e in data["entries"]
        ]
        return cls(
            root=path.parent,
            entries=entries,
            split_seed=data.get("split_seed"),
            source=data.get("source", ""),
        )


@dataclass(frozen=True)
class PerturbationProvenance:
    """Sidecar record describing how a perturbed dataset copy was produced."""

    beta: float
    epsilon_per_pixel: float
    epsilon_naive_total: float
    sensitivity: float
    master_seed: int
    clamp: bool
    format: str
    source_manifest_digest: str

    def to_dict(self) -> dict:
        def enc(x: float):
            return "inf" if math.isinf(x) else x

        return {
            "beta": self.beta,
            "epsilon_per_pixel": enc(self.epsilon_per_pixel),
            "epsilon_naive_total": enc(self.epsilon_naive_total),
            "sensitivity": self.sensitivity,
            "master_seed": self.master_seed,
            "clamp": self.clamp,
            "format": self.format,
            "source_manifest_digest": self.source_manifest_digest,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PerturbationProvenance":
        def dec(x):
            return math.inf if x == "inf" else float(x)

        return cls(
            beta=float(data["beta"]),
            epsilon_per_pixel=dec(data["epsilon_per_pixel"]),
            epsilon_naive_total=dec(data["epsilon_naive_total"]),
            sensitivity=float(data["sensitivity"]),
            master_seed=int(data["master_seed"]),
            clamp=bool(data["clamp"]),
            format=str(data["format"]),
            source_manifest_digest=str(data["source_manifest_digest"]),
        )

    def save(self, out_dir) -> Path:
        """Atomic write (temp file + rename); presence marks a complete run."""
        out_dir = Path(out_dir)
        target = out_dir / PROVENANCE_NAME
        payload = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".provenance-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(payload)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return target

    @classmethod
    def load(cls, out_dir) -> "PerturbationProvenance":
        return cls.from_dict(json.loads((Path(out_dir) / PROVENANCE_NAME).read_text()))


def scan_dataset(root) -> DatasetManifest:
    """List every image under the NORMAL / PNEUMONIA class directories.

    Directory names match case-insensitively; entries come out in canonical
    (sorted) order regardless of filesystem enumeration order.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetLayoutError(f"dataset root is not a directory: {root}")
    class_dirs: dict[str, Path] = {}
    for child in root.iterdir():
        if child.is_dir() and child.name.lower() in ("normal", "pneumonia"):
            label = "Normal" if child.name.lower() == "normal" else "Pneumonia"
            class_dirs[label] = child
    missing = [label for label in LABELS if label not in class_dirs]
    if missing:
        raise DatasetLayoutError(
            f"missing class director{'y' if len(missing) == 1 else 'ies'} "
            f"{missing} under {root} (expected NORMAL and PNEUMONIA)"
        )
    entries: list[ManifestEntry] = []
    for label in LABELS:
        class_dir = class_dirs[label]
        found = [
            p
            for p in sorted(class_dir.rglob("*"))
            if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
        ]
        if not found:
            raise DatasetLayoutError(f"class directory contains no images: {class_dir}")
        for p in found:
            rel = PurePosixPath(class_dir.name) / p.relative_to(class_dir).as_posix()
            entries.append(ManifestEntry(path=str(rel), label=label))
    return DatasetManifest(root=root, entries=entries, source="directory-scan")


def _largest_remainder_counts(n: int, ratios: tuple[float, float, float]) -> list[int]:
    # Floors first, then hand out the shortfall by descending fractional part;
    # ties go to the earlier split in (train, val, test) order.
    exact = [n * r for r in ratios]
    base = [int(math.floor(x + 1e-9)) for x in exact]
    short = n - sum(base)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - base[i]), i))
    for i in order[:short]:
        base[i] += 1
    return base


def split_dataset(
    manifest: DatasetManifest,
    ratios: tuple[float, float, float] = DEFAULT_SPLIT_RATIOS,
    seed: int = 0,
) -> DatasetManifest:
    """Assign stratified train/val/test splits with a seed-derived permutation.

    Each class is shuffled independently (stream id = class index under
    ``seed``) and partitioned by the ratios with largest-remainder rounding.
    """
    if len(ratios) != len(SPLITS):
        raise InvalidParameterError(f"expected {len(SPLITS)} ratios, got {len(ratios)}")
    if any(not math.isfinite(r) or r <= 0 for r in ratios):
        raise InvalidParameterError(f"ratios must be positive, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise InvalidParameterError(f"ratios must sum to 1, got sum {sum(ratios)}")

    new_entries = list(manifest.entries)
    for class_index, label in enumerate(LABELS):
        indices = [i for i, e in enumerate(manifest.entries) if e.label == label]
        n = len(indices)
        if n < 3:
            raise InsufficientDataError(f"class {label} has only {n} entries; need at least 3")
        perm = np.argsort(RandomStream(seed, class_index).uniforms(n), kind="stable")
        counts = _largest_remainder_counts(n, tuple(ratios))
        cursor = 0
        for split, count in zip(SPLITS, counts):
            for k in perm[cursor : cursor + count]:
                i = indices[int(k)]
                new_entries[i] = replace(new_entries[i], split=split)
            cursor += count
    return DatasetManifest(
        root=manifest.root, entries=new_entries, split_seed=int(seed), source=manifest.source
    )


def _render_synthetic(image_size: int, class_index: int, stream: RandomStream) -> np.ndarray:
    """One synthetic image: bright disk on a noisy dark background.

    Class 1 (Pneumonia) additionally carries horizontal bright bars, the
    opacity texture that perturbation noise progressively destroys.
    """
    size = image_size
    hw = size * size
    u = stream.uniforms(hw + 4)
    texture = u[:hw].reshape(size, size)
    jitter = u[hw:]

    img = 0.10 + 0.06 * (2.0 * texture - 1.0)

    cx = (0.5 + 0.1 * (2.0 * jitter[0] - 1.0)) * size
    cy = (0.5 + 0.1 * (2.0 * jitter[1] - 1.0)) * size
    disk_amp = 0.30 * (1.0 + 0.1 * (2.0 * jitter[2] - 1.0))
    radius = 0.32 * size
    edge = 0.06 * size
    ys, xs = np.mgrid[0:size, 0:size]
    rr = np.sqrt((xs + 0.5 - cx) ** 2 + (ys + 0.5 - cy) ** 2)
    img = img + disk_amp / (1.0 + np.exp((rr - radius) / edge))

    if class_index == 1:
        bar_amp = 0.50 * (1.0 + 0.1 * (2.0 * jitter[3] - 1.0))
        thickness = max(1, round(0.10 * size))
        for frac in np.linspace(0.25, 0.75, 6):
            top = int(round(frac * size))
            img[top : top + thickness, :] += bar_amp

    return np.clip(img, 0.0, 1.0)


def generate_synthetic(n_per_class: int, image_size: int, seed: int, out_dir) -> DatasetManifest:
    """Write a two-class synthetic PNG dataset, separable at beta = 0.

    Deterministic in (n_per_class, image_size, seed): rerunning produces a
    byte-identical tree.
    """
    if not isinstance(n_per_class, (int, np.integer)) or n_per_class < 1:
        raise InvalidParameterError(f"n_per_class must be a positive integer, got {n_per_class!r}")
    if not isinstance(image_size, (int, np.integer)) or image_size < 8:
        raise InvalidParameterError(f"image_size must be an integer >= 8, got {image_size!r}")
    out_dir = Path(out_dir)
    width = max(4, len(str(n_per_class - 1)))
    for class_index, dirname in enumerate(("NORMAL", "PNEUMONIA")):
        class_dir = out_dir / dirname
        class_dir.mkdir(parents=True, exist_ok=True)
        prefix = dirname.lower()
        for j in range(n_per_class):
            stream = RandomStream(seed, _SYNTH_STREAM_BASE + class_index * n_per_class + j)
            img = _render_synthetic(int(image_size), class_index, stream)
            q = np.rint(img * 255.0).astype(np.uint8)
            Image.fromarray(q, mode="L").save(class_dir / f"{prefix}_{j:0{width}d}.png", format="PNG")
    manifest = scan_dataset(out_dir)
    manifest.source = (
        f"synthetic(n_per_class={int(n_per_class)}, image_size={int(image_size)}, seed={int(seed)})"
    )
    return manifest


def _materialize_one(
    manifest: DatasetManifest,
    index: int,
    entry: ManifestEntry,
    beta: float,
    master_seed: int,
    clamp: bool,
    fmt: str,
    out_dir: Path,
    target_size: int,
) -> str:
    src = manifest.root / entry.path
    try:
        tensor = load_and_preprocess(src, target_size)
        perturbed = perturb_image(tensor, beta, master_seed, index, clamp)
        suffix = ".png" if fmt == "png8" else F32RAW_SUFFIX
        rel = str(PurePosixPath(entry.path).with_suffix(suffix))
        dest = out_dir / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        write_tensor(perturbed, dest, fmt)
        return rel
    except Exception as exc:
        raise MaterializationError(f"failed to materialize {src}: {exc}") from exc


def materialize_perturbed(
    manifest: DatasetManifest,
    beta: float,
    master_seed: int,
    clamp: bool,
    fmt: str,
    out_dir,
    target_size: int = 256,
    workers: int | None = None,
) -> tuple[DatasetManifest, PerturbationProvenance]:
    """Write a perturbed copy of every manifest entry, with a provenance sidecar.

    Each image is preprocessed, perturbed with stream (master_seed, canonical
    index) and written under ``out_dir`` mirroring the input layout (extension
    follows the export format).  The sidecar is written last, atomically, so
    its absence marks an interrupted run.  Per-image work is independent and
    runs on a thread pool; output bytes do not depend on the worker count.
    """
    if not math.isfinite(beta) or beta < 0:
        raise InvalidParameterError(f"beta must be finite and >= 0, got {beta}")
    if fmt not in ("png8", "f32raw"):
        raise InvalidParameterError(f"format must be png8 or f32raw, got {fmt!r}")
    if not manifest.entries:
        raise InvalidParameterError("manifest has no entries to materialize")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if workers is None:
        workers = min(8, os.cpu_count() or 1)

    tasks = list(enumerate(manifest.entries))
    if workers <= 1:
        rel_paths = [
            _materialize_one(manifest, i, e, beta, master_seed, clamp, fmt, out_dir, target_size)
            for i, e in tasks
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rel_paths = list(
                pool.map(
                    lambda ie: _materialize_one(
                        manifest, ie[0], ie[1], beta, master_seed, clamp, fmt, out_dir, target_size
                    ),
                    tasks,
                )
            )

    source_digest = manifest.digest()
    out_entries = [
        replace(entry, path=rel) for (_, entry), rel in zip(tasks, rel_paths)
    ]
    out_manifest = DatasetManifest(
        root=out_dir,
        entries=out_entries,
        split_seed=manifest.split_seed,
        source=(
            f"perturbed(beta={format(beta, 'g')}, master_seed={int(master_seed)}, "
            f"clamp={str(bool(clamp)).lower()}, format={fmt}, target_size={int(target_size)}) "
            f"from sha256:{source_digest[:16]}"
        ),
    )
    out_manifest.save()

    if beta == 0:
        eps_pixel = math.inf
        eps_total = math.inf
    else:
        eps_pixel = 1.0 / beta
        eps_total = naive_composition(eps_pixel, int(target_size) * int(target_size))
    provenance = PerturbationProvenance(
        beta=float(beta),
        epsilon_per_pixel=eps_pixel,
        epsilon_naive_total=eps_total,
        sensitivity=1.0,
        master_seed=int(master_seed),
        clamp=bool(clamp),
        format=fmt,
        source_manifest_digest=source_digest,
    )
    provenance.save(out_dir)
    return out_manifest, provenance
