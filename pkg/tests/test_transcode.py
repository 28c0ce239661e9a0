import zlib

import numpy as np
import pytest

from foveatile import synth
from foveatile.mia_engine import (ManifestError, TileManifest, TranscodeError, build_pyramid,
                                  codec, transcode_all)
from foveatile.mia_engine import transcode as tc
from foveatile.vision_models import qp_to_q

QPS = [22, 31, 40, 49]


@pytest.fixture(scope="module")
def pyr():
    return build_pyramid(synth.composite(600, 330, seed=1), [(600, 330), (300, 165)])


def test_complete_manifest(pyr):
    m = transcode_all(pyr, QPS)
    n_tiles = sum(len(m.tiles(lv)) for lv in range(2))
    assert n_tiles == 3 * 3 + 2 * 2
    assert len(m.entries) == n_tiles * len(QPS)
    assert m.missing() == []
    m.verify()


def test_payloads_match_direct_encode(pyr):
    m = transcode_all(pyr, QPS)
    t = m.tiles(0)[4]
    tile = pyr[0][t.py:t.py + t.h, t.px:t.px + t.w]
    for qp in QPS:
        assert m.payload(0, t.x, t.y, qp) == codec.encode_tile(tile, qp_to_q(qp)).payload
        e = m.entry(0, t.x, t.y, qp)
        assert (e.w, e.h) == (t.w, t.h)
        assert e.crc32 == zlib.crc32(m.payload(0, t.x, t.y, qp))


@pytest.mark.parametrize("workers", [2, 8])
def test_worker_count_invariant(pyr, workers):
    assert transcode_all(pyr, QPS, workers=workers).digest() == transcode_all(pyr, QPS, workers=1).digest()


def test_lossless_rung(pyr):
    m = transcode_all(pyr, QPS, lossless_qp=4)
    assert m.coded_qps == QPS + [4]
    assert m.qps == QPS
    t = m.tiles(0)[0]
    assert m.size(0, t.x, t.y, 4) > m.size(0, t.x, t.y, 22)


def test_write_load_roundtrip(pyr, tmp_path):
    m = transcode_all(pyr, QPS, source_id="my image", lossless_qp=4)
    m.write(tmp_path / "m")
    back = TileManifest.load(tmp_path / "m")
    assert back.source_id == "my_image"
    assert back.to_text() == m.to_text()
    assert back.digest() == m.digest()
    back.verify()
    back2 = TileManifest.load(tmp_path / "m" / "manifest.csv")
    assert back2.payload(1, 1, 1, 31) == m.payload(1, 1, 1, 31)


def test_manifest_text_format(pyr):
    m = transcode_all(pyr, [22])
    lines = m.to_text().splitlines()
    assert lines[0].startswith("# foveatile-manifest v1 source=source tile=256x144 levels=600x330,300x165 qps=22")
    assert lines[0].endswith("fields=level,x,y,w,h,qp,bytes,offset,crc32")
    first = lines[1].split(",")
    assert first[:6] == ["0", "0", "0", "256", "144", "22"]
    assert first[7] == "0" and len(first[8]) == 8
    # offsets are contiguous inside a level blob
    ents = [e for e in m.ordered_entries() if e.level == 0]
    assert all(b.offset == a.offset + a.bytes for a, b in zip(ents, ents[1:]))


def test_corruption_detected(pyr, tmp_path):
    m = transcode_all(pyr, QPS)
    out = m.write(tmp_path / "m")
    blob = bytearray((out / "level0.bin").read_bytes())
    blob[100] ^= 0xFF
    (out / "level0.bin").write_bytes(bytes(blob))
    with pytest.raises(ManifestError, match="checksum"):
        TileManifest.load(out).verify()


def test_missing_entry_reported(pyr):
    m = transcode_all(pyr, QPS)
    del m.entries[(1, 1, 0, 40)]
    assert m.missing() == [(1, 1, 0, 40)]
    with pytest.raises(ManifestError, match="incomplete"):
        m.verify()
    with pytest.raises(ManifestError, match=r"level 1 tile \(1,0\) qp 40"):
        m.size(1, 1, 0, 40)


def test_bad_manifest_text():
    with pytest.raises(ManifestError):
        TileManifest.from_text("level,x,y\n")


def _failing_analyze(bad_shape, real):
    def fake(rgb):
        if rgb.shape[:2] == bad_shape:
            raise RuntimeError("boom")
        return real(rgb)
    return fake


@pytest.mark.parametrize("workers", [1, 3])
def test_failure_names_tile(pyr, monkeypatch, workers):
    # the 88x42 edge tile only exists at level 0, position (2, 2)
    monkeypatch.setattr(codec, "analyze_tile", _failing_analyze((42, 88), codec.analyze_tile))
    with pytest.raises(TranscodeError, match=r"level 0 tile \(2,2\)"):
        transcode_all(pyr, QPS, workers=workers)


def test_transient_failure_retried(pyr, monkeypatch):
    real = codec.analyze_tile
    calls = {"n": 0}

    def flaky(rgb):
        calls["n"] += 1
        if calls["n"] == 3:
            raise RuntimeError("transient")
        return real(rgb)

    expected = transcode_all(pyr, QPS).digest()
    monkeypatch.setattr(codec, "analyze_tile", flaky)
    assert transcode_all(pyr, QPS).digest() == expected
    calls["n"] = 2
    with pytest.raises(TranscodeError):
        transcode_all(pyr, QPS, retries=0)


def test_empty_ladder(pyr):
    with pytest.raises(ValueError):
        transcode_all(pyr, [])


def test_rate_monotone_per_level(pyr):
    m = transcode_all(pyr, QPS)
    for lv in range(2):
        totals = [sum(m.size(lv, t.x, t.y, qp) for t in m.tiles(lv)) for qp in QPS]
        assert all(a > b for a, b in zip(totals, totals[1:]))


def test_default_ladder():
    assert tc.DEFAULT_QPS == list(range(22, 50, 3))
    assert np.isclose(qp_to_q(tc.LOSSLESS_QP), 1.0)
