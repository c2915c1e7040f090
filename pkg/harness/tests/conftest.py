import json
import shutil
import struct
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

LDPBENCH = shutil.which("ldpbench")


def write_f32raw(path, values):
    values = np.asarray(values, dtype="<f4")
    header = struct.pack("<4sHIII", b"LDPT", 1, values.shape[0], values.shape[1], 1)
    path.write_bytes(header + values.tobytes(order="C"))


def write_manifest(root, entries, split_seed=0):
    payload = {
        "root": ".",
        "split_seed": split_seed,
        "source": "test fixture",
        "entries": entries,
    }
    (root / "manifest.json").write_text(json.dumps(payload))


def make_separable_dataset(root, n_per_split=(8, 4, 4), size=16, fmt="png", noise=0.05, seed=0):
    """Tiny two-class set: Normal dark, Pneumonia bright; linearly separable."""
    rng = np.random.default_rng(seed)
    entries = []
    for label, level, dirname in (("Normal", 0.2, "NORMAL"), ("Pneumonia", 0.8, "PNEUMONIA")):
        (root / dirname).mkdir(parents=True, exist_ok=True)
        counter = 0
        for split, count in zip(("train", "val", "test"), n_per_split):
            for _ in range(count):
                img = np.clip(level + noise * rng.standard_normal((size, size)), 0, 1)
                name = f"{dirname.lower()}_{counter:03d}.{fmt if fmt != 'f32raw' else 'ldpt'}"
                if fmt == "f32raw":
                    write_f32raw(root / dirname / name, img.astype(np.float32))
                else:
                    Image.fromarray(np.rint(img * 255).astype(np.uint8), "L").save(root / dirname / name)
                entries.append({"path": f"{dirname}/{name}", "label": label, "split": split})
                counter += 1
    write_manifest(root, entries)
    return root


@pytest.fixture()
def separable_dataset(tmp_path):
    return make_separable_dataset(tmp_path / "data")


def run_ldpbench(*argv):
    """Invoke the benchmark CLI as an external command (the only coupling allowed)."""
    if LDPBENCH is None:
        pytest.skip("ldpbench CLI not installed")
    proc = subprocess.run([LDPBENCH, *map(str, argv)], capture_output=True, text=True)
    assert proc.returncode == 0, f"ldpbench failed: {proc.stderr}"
    return proc


def run_harness_cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "ldpharness.cli", *map(str, argv)], capture_output=True, text=True
    )
