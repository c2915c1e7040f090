import numpy as np
import pytest

from ldpharness import DatasetError, load_dataset, read_image

from conftest import make_separable_dataset, write_f32raw, write_manifest


class TestReadImage:
    def test_f32raw_is_bit_exact(self, tmp_path):
        values = np.linspace(-3, 3, 48, dtype=np.float32).reshape(6, 8)
        write_f32raw(tmp_path / "t.ldpt", values)
        assert np.array_equal(read_image(tmp_path / "t.ldpt"), values)

    def test_png_renormalized_by_255(self, tmp_path):
        from PIL import Image

        Image.fromarray(np.full((4, 4), 51, np.uint8), "L").save(tmp_path / "t.png")
        out = read_image(tmp_path / "t.png")
        assert np.allclose(out, 0.2, atol=1e-7)

    def test_truncated_container_rejected(self, tmp_path):
        values = np.zeros((4, 4), np.float32)
        write_f32raw(tmp_path / "t.ldpt", values)
        blob = (tmp_path / "t.ldpt").read_bytes()
        (tmp_path / "cut.ldpt").write_bytes(blob[:-8])
        with pytest.raises(DatasetError):
            read_image(tmp_path / "cut.ldpt")


class TestLoadDataset:
    def test_loads_three_splits(self, tmp_path):
        root = make_separable_dataset(tmp_path / "d", n_per_split=(6, 3, 3))
        splits = load_dataset(root)
        assert set(splits) == {"train", "val", "test"}
        assert len(splits["train"]) == 12  # both classes
        assert splits["train"].images.shape == (12, 1, 16, 16)
        assert set(splits["train"].labels.tolist()) == {0, 1}

    def test_f32raw_dataset_loads(self, tmp_path):
        root = make_separable_dataset(tmp_path / "d", fmt="f32raw")
        splits = load_dataset(root)
        assert splits["test"].images.dtype == np.float32

    def test_missing_manifest_rejected(self, tmp_path):
        with pytest.raises(DatasetError):
            load_dataset(tmp_path)

    def test_unassigned_split_rejected(self, tmp_path):
        (tmp_path / "NORMAL").mkdir()
        write_f32raw(tmp_path / "NORMAL" / "a.ldpt", np.zeros((4, 4), np.float32))
        write_manifest(tmp_path, [{"path": "NORMAL/a.ldpt", "label": "Normal", "split": None}])
        with pytest.raises(DatasetError):
            load_dataset(tmp_path)

    def test_single_class_split_rejected(self, tmp_path):
        (tmp_path / "NORMAL").mkdir()
        entries = []
        for i, split in enumerate(("train", "train", "val", "val", "test", "test")):
            name = f"a{i}.ldpt"
            write_f32raw(tmp_path / "NORMAL" / name, np.zeros((4, 4), np.float32))
            entries.append({"path": f"NORMAL/{name}", "label": "Normal", "split": split})
        write_manifest(tmp_path, entries)
        with pytest.raises(DatasetError):
            load_dataset(tmp_path)
