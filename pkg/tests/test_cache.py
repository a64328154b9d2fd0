import logging

import pytest

from hecke2.cache import MAGIC, CorruptCache, SeriesCache, encode, read_series, write_series
from hecke2.fps2 import BitSeries, theta_F


def test_round_trip_F_4096(tmp_path):
    F = theta_F(4096)
    path = tmp_path / "F.fps2"
    write_series(path, F)
    assert read_series(path) == F
    data = path.read_bytes()
    assert data[:4] == MAGIC
    assert len(data) == 24 + 8 * 64


def test_layout_bit_order(tmp_path):
    f = BitSeries.from_exponents([0, 65], 70)
    raw = encode(f)[24:]
    assert raw[0] == 1 and raw[8] == 2


@pytest.mark.parametrize(
    "mutate, reason",
    [
        (lambda b: b[:-3], "payload"),
        (lambda b: b[:10], "header"),
        (lambda b: b"XXXX" + b[4:], "magic"),
        (lambda b: b[:4] + (7).to_bytes(4, "little") + b[8:], "version"),
        (lambda b: b[:-1] + b"\xff", "above the precision"),
    ],
)
def test_corruption_names_the_file(tmp_path, mutate, reason):
    path = tmp_path / "theta_F-100.fps2"
    write_series(path, theta_F(100))
    path.write_bytes(mutate(path.read_bytes()))
    with pytest.raises(CorruptCache) as exc:
        read_series(path)
    assert str(path) in str(exc.value) and reason in str(exc.value)
    assert exc.value.path == path


def test_atomic_write_leaves_no_temp_files(tmp_path):
    path = tmp_path / "sub" / "a.fps2"
    write_series(path, theta_F(300))
    write_series(path, theta_F(200))
    assert read_series(path).prec == 200
    assert [p.name for p in path.parent.iterdir()] == ["a.fps2"]


def test_failed_write_keeps_old_file(tmp_path, monkeypatch):
    path = tmp_path / "a.fps2"
    write_series(path, theta_F(300))

    def boom(*args):
        raise OSError("disk full")

    monkeypatch.setattr("hecke2.cache.os.replace", boom)
    with pytest.raises(OSError):
        write_series(path, theta_F(100))
    assert read_series(path).prec == 300
    assert [p.name for p in tmp_path.iterdir()] == ["a.fps2"]


def test_hit_skips_regeneration(tmp_path, caplog):
    calls = []

    def build():
        calls.append(1)
        return theta_F(4096)

    cache = SeriesCache(tmp_path)
    with caplog.at_level(logging.INFO, logger="hecke2.cache"):
        a = cache.get("theta_F", 4096, build)
        b = SeriesCache(tmp_path).get("theta_F", 4096, build)
    assert a == b and len(calls) == 1
    assert [e[1] for e in cache.events] == ["miss"]
    assert any("cache hit" in r.message for r in caplog.records)


def test_precision_mismatch_is_corruption(tmp_path):
    cache = SeriesCache(tmp_path)
    write_series(cache.path("theta_F", 128), theta_F(64))
    with pytest.raises(CorruptCache):
        cache.get("theta_F", 128, lambda: theta_F(128))
