import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from foveatile import streaming_sim as ss
from foveatile import tile_planner as tp
from foveatile.mia_engine import ManifestError
from foveatile.streaming_sim import TraceStep


def test_retrieval_time_identity():
    # 31.656 Mbit at 5 Mbps
    assert ss.retrieval_time(31.656e6 / 8, 5) == pytest.approx(6.3312, abs=1e-12)
    assert ss.retrieval_time(1000, 8, n_requests=3, latency_s=0.01) == pytest.approx(1e-3 + 0.03)
    with pytest.raises(ValueError):
        ss.retrieval_time(10, 0)


@given(st.integers(1, 10**9), st.floats(0.1, 1000))
def test_time_times_rate_is_bits(n_bytes, mbps):
    t = ss.retrieval_time(n_bytes, mbps)
    assert abs(t * mbps * 1e6 - n_bytes * 8) <= 1e-9 * n_bytes * 8
    assert ss.retrieval_time(n_bytes / 2, mbps) == pytest.approx(t / 2, rel=1e-12)


@given(st.integers(1, 10**8), st.integers(1, 10**8), st.lists(st.floats(0.5, 500), min_size=2, max_size=4))
def test_saving_bandwidth_invariant(bu, bf, bws):
    rep = ss.report_from_payloads([(0, bu, bf)], bws)
    savings = [r.saving for r in rep.rows]
    scale = max(1.0, bf / bu)
    assert max(savings) - min(savings) < 1e-9 * scale
    assert savings[0] == pytest.approx(1 - bf / bu, abs=1e-12 * scale)


def test_report_aggregate_and_csv():
    rep = ss.report_from_payloads([(0, 1000, 100), (1, 3000, 1500)], [5, 10])
    agg = rep.aggregate()
    to, tm, sv = agg[5]
    assert to == pytest.approx((1000 + 3000) * 8 / 5e6 / 2)
    assert sv == pytest.approx((0.9 + 0.5) / 2)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "step,mbps,bytes_uniform,bytes_foveated,t_ori,t_m,saving"
    assert lines[-1].startswith("average,10,")
    table = rep.table().splitlines()
    assert table[0] == "step,t_ori@5,t_m@5,t_ori@10,t_m@10,saving"
    assert table[-1].endswith("70.00%")
    with pytest.raises(ValueError):
        ss.report_from_payloads([(0, 1, 1)], [])


def test_trace_roundtrip(tmp_path):
    steps = [TraceStep(0, 10.5, 20, 2, 110), TraceStep(1, 300, 100.25, 1, 90)]
    text = ss.format_trace(steps)
    assert text.splitlines()[0] == "step,gaze_x,gaze_y,level,fov_deg"
    f = tmp_path / "t.csv"
    f.write_text(text)
    assert ss.load_trace(f) == steps
    with pytest.raises(ValueError):
        ss.parse_trace("step,gaze_x,gaze_y,level,fov_deg\n")
    with pytest.raises(ValueError):
        ss.parse_trace("0,1,2\n")


def test_navigation_trace(small_manifest):
    tr = ss.navigation_trace(small_manifest, 9, seed=3)
    assert tr == ss.navigation_trace(small_manifest, 9, seed=3)
    assert tr[0].level == 2 and tr[-1].level == 0
    levels = [s.level for s in tr]
    assert levels == sorted(levels, reverse=True)
    for s in tr:
        w, h = small_manifest.levels[s.level]
        assert 0 <= s.gaze_x <= w and 0 <= s.gaze_y <= h


def test_empty_plan_zero_bytes(small_manifest):
    assert ss.fov_payload(tp.FoveationPlan([], "relative", 22), small_manifest) == 0


def test_uniform_payload_is_sum(small_manifest):
    vp = tp.ViewportGeometry(640, 360, origin=(256, 144))
    u = tp.uniform_plan(vp, small_manifest, 22)
    tiles = small_manifest.tiles_in_rect(0, vp.rect)
    assert ss.fov_payload(u, small_manifest) == sum(small_manifest.size(0, t.x, t.y, 22) for t in tiles)


def test_missing_entry_names_tile(small_manifest):
    bad = tp.FoveationPlan([tp.PlanEntry(0, 1, 1, 6, 23, 0)], "relative", 22)
    with pytest.raises(ManifestError, match="plan tile 6 at level 0"):
        ss.fov_payload(bad, small_manifest)


def test_simulate_invariants(small_manifest):
    trace = ss.navigation_trace(small_manifest, 8, seed=1)
    rep = ss.simulate(trace, small_manifest, [5, 10, 20])
    assert len(rep.rows) == 8 * 3
    for r in rep.rows:
        assert r.bytes_foveated <= r.bytes_uniform
        assert r.t_ori * r.mbps * 1e6 == pytest.approx(r.bytes_uniform * 8, rel=1e-12)
    for s in range(8):
        sv = [r.saving for r in rep.rows if r.step == s]
        assert max(sv) - min(sv) < 1e-12
    assert rep.to_csv() == ss.simulate(trace, small_manifest, [5, 10, 20]).to_csv()
    assert set(rep.lossless) == set(range(8))


def test_coarser_periphery_never_costs_more(small_manifest):
    vp = tp.ViewportGeometry(1280, 720, gaze=(500, 300))
    base = tp.plan(vp, small_manifest)
    ladder = small_manifest.qps
    cost = ss.fov_payload(base, small_manifest)
    for ring in range(1, 7):
        bumped = [dataclasses.replace(e, qp=ladder[min(len(ladder) - 1, ladder.index(e.qp) + 1)])
                  if e.ring >= ring else e for e in base.entries]
        c2 = ss.fov_payload(tp.FoveationPlan(bumped, "relative", 22), small_manifest)
        assert c2 <= cost


def test_savings_vs_size(small_manifest):
    trace = ss.navigation_trace(small_manifest, 6, seed=2)
    pts = ss.savings_vs_size(trace, small_manifest)
    rep = ss.simulate(trace, small_manifest, [7])
    for p, r in zip(pts, rep.rows):
        assert p.delta_t == pytest.approx(r.saving, abs=1e-12)
        assert p.lossless_bytes == rep.lossless[p.step]
        assert p.lossless_bytes > r.bytes_uniform
    assert ss.savings_csv(pts).splitlines()[0] == "step,lossless_bytes,delta_t"


def test_single_tile_fov(small_manifest):
    vp = tp.ViewportGeometry(100, 100, origin=(10, 10))
    uni = tp.uniform_plan(vp, small_manifest)
    fov = tp.plan(vp, small_manifest)
    assert len(uni.entries) == 1 == len(fov.entries)
    e = fov.entries[0]
    ratio = small_manifest.size(0, e.x, e.y, e.qp) / small_manifest.size(0, e.x, e.y, 22)
    rep = ss.report_from_payloads([(0, ss.fov_payload(uni, small_manifest), ss.fov_payload(fov, small_manifest))],
                                  [3, 30])
    assert all(r.saving == pytest.approx(1 - ratio, abs=1e-12) for r in rep.rows)


def test_savings_needs_lossless(small_manifest):
    m = dataclasses.replace(small_manifest, lossless_qp=None)
    with pytest.raises(ManifestError):
        ss.savings_vs_size([TraceStep(0, 10, 10, 0)], m)


def test_bad_level(small_manifest):
    with pytest.raises(ValueError):
        ss.simulate([TraceStep(0, 1, 1, 7)], small_manifest)
    with pytest.raises(ValueError):
        ss.simulate([], small_manifest)
