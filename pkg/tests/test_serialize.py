import numpy as np
import pytest

from fgn.serialize import (array_to_bytes, bytes_to_array, read_records,
                           write_records)


def test_records_roundtrip(tmp_path, rng):
    path = tmp_path / "m.bin"
    records = {
        "a/scalar": np.array(3.5),
        "b/vec": rng.standard_normal(7),
        "c/cube": rng.standard_normal((2, 3, 4)),
    }
    write_records(path, records)
    back = read_records(path)
    assert set(back) == set(records)
    for name, arr in records.items():
        assert back[name].shape == arr.shape
        assert np.array_equal(back[name], arr)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "m.bin"
    path.write_bytes(b"NOTFGN1" + b"\x00" * 32)
    with pytest.raises(OSError):
        read_records(path)


def test_truncated_payload_rejected(tmp_path, rng):
    path = tmp_path / "m.bin"
    write_records(path, {"w": rng.standard_normal((4, 4))})
    blob = path.read_bytes()
    path.write_bytes(blob[:-9])
    with pytest.raises(OSError):
        read_records(path)


def test_empty_record_set(tmp_path):
    path = tmp_path / "m.bin"
    write_records(path, {})
    assert read_records(path) == {}


def test_bytes_array_bridge():
    blob = "hello 世界".encode("utf-8")
    assert array_to_bytes(bytes_to_array(blob)) == blob
