"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line."""

import random
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from foveatile import content_features as cf
from foveatile import quality_model as qm
from foveatile import ratings_screening as rs
from foveatile import streaming_sim as ss
from foveatile import synth
from foveatile import tile_planner as tp
from foveatile import vision_models as vm
from foveatile.content_features import ContentFeatures
from foveatile.mia_engine import DEFAULT_QPS, build_manifest, build_pyramid, codec, transcode_all
from foveatile.ratings_screening import RatingRecord
from foveatile.vision_models import VisionZone

mpmath.mp.dps = 50


def _gg(theta, a, b, c, d):
    theta, a, b, c, d = (mpmath.mpf(str(v)) for v in (theta, a, b, c, d))
    return 1 / (c * mpmath.sqrt(2 * mpmath.pi)) * mpmath.exp(-abs((b * theta) ** a) / (2 * c**2)) + d


# -- 1 ---------------------------------------------------------------------------------

def test_c1_model_oracles(criterion):
    t0 = time.perf_counter()
    checks = {
        "q_hat(0)": (vm.q_hat(0), _gg(0, 2.2, 0.08, 1.38, 0.05), 0.33909),
        "q_hat_joint(0)": (vm.q_hat_joint(0), _gg(0, 2.2, 0.055, 1.1, 0.06), 0.42268),
        "s_hat(inf)": (vm.s_hat(1e6, 0.9), _gg(10**6, 2.2, 0.033, 0.9, 0.06), 0.06),
    }
    errs = {k: (abs(v - float(o)), abs(float(o) - pub)) for k, (v, o, pub) in checks.items()}
    grid = [i / 10 for i in range(551)]
    curves = {
        "q": [vm.q_hat(t) for t in grid],
        "joint": [vm.q_hat_joint(t) for t in grid],
        "s(c=0.9)": [vm.s_hat(t, 0.9) for t in grid],
    }
    strict = all(all(a > b for a, b in zip(v, v[1:])) for v in curves.values())
    clamped = [vm.s_hat(t, 0.3) for t in grid]
    nonincr = all(a >= b for a, b in zip(clamped, clamped[1:]))
    elapsed = time.perf_counter() - t0
    ok = all(e1 <= 1e-5 and e2 <= 1e-5 for e1, e2 in errs.values()) and strict and nonincr and elapsed < 1.0
    worst = max(max(e) for e in errs.values())
    criterion(1, ok, f"max |model-oracle|,|oracle-published| = {worst:.2e}; strict decrease on 0-55 by 0.1 "
                     f"= {strict}; runtime {elapsed:.3f}s")
    assert ok


# -- 2 ---------------------------------------------------------------------------------

def test_c2_normalization_identities(criterion):
    rnd = random.Random(20)
    draws = [(rnd.uniform(0.01, 50), rnd.uniform(0.01, 50)) for _ in range(100)]
    worst = max(abs(qm.mos_uniform(1.0, 1.0, qm.QStarParams(a, {vm.S_MAX: b})) - 86.0) for a, b in draws)
    ok = (vm.qp_to_q(22) == 8.0 and vm.q_to_qp(8.0) == 22.0 and vm.normalize_q(64) == 0.125
          and vm.normalize_s((2048, 1080)) == 0.25 and worst <= 1e-12)
    criterion(2, ok, f"QP22<->q8, q64->0.125, 2048x1080->0.25 exact; max |Q(1,1)-86| over 100 draws = {worst:.1e}")
    assert ok


# -- 3 ---------------------------------------------------------------------------------

def test_c3_content_prediction(criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        si, mi, gv = rng.uniform(0, 200), rng.uniform(0, 1), rng.uniform(0, 0.5)
        exact = (Fraction(-2, 1000) * Fraction(si) + Fraction(4342, 10000) * Fraction(mi)
                 + Fraction(39029, 10000) * Fraction(gv) + Fraction(2557, 10000))
        ref = float(min(Fraction(5), max(Fraction(5, 100), exact)))
        worst = max(worst, abs(cf.predict_c(ContentFeatures(si, mi, gv)) - ref))
    clamps = (cf.predict_c(ContentFeatures(1000, 0, 0)) == 0.05 and cf.predict_c(ContentFeatures(0, 1, 2)) == 5.0
              and cf.predict_c(ContentFeatures(0, 0, 0)) == 0.2557)
    ok = worst <= 1e-12 and clamps
    criterion(3, ok, f"20 random triples max |err| = {worst:.1e}; clamps at 0.05 and 5 honoured = {clamps}")
    assert ok


# -- 4 ---------------------------------------------------------------------------------

def _corpus():
    """50 labelled 256x144 tiles: natural photographs, procedural panorama crops, synthetic patterns."""
    from skimage import data

    tiles = []
    for name, img, xs, ys in (("astronaut", data.astronaut(), (0, 256), (0, 144, 288)),
                              ("coffee", data.coffee(), (0, 256), (0, 144, 256)),
                              ("chelsea", data.chelsea(), (0, 195), (0, 150))):
        tiles += [(f"{name}@{x},{y}", img[y:y + 144, x:x + 256, :3]) for y in ys for x in xs]
    giga = synth.gigapixel(2048, 1080, seed=2)
    tiles += [(f"panorama@{x},{y}", giga[y:y + 144, x:x + 256]) for y, x in
              [(0, 0), (216, 512), (288, 1024), (432, 256), (432, 1536), (504, 768), (576, 0),
               (576, 1280), (648, 1792), (720, 512), (792, 1024), (864, 256), (936, 1536), (936, 0)]]
    for seed in range(4):
        tiles += [(f"sky{seed}", synth.sky(256, 144, seed)), (f"grass{seed}", synth.grass(256, 144, seed))]
    tiles += [(f"composite{seed}", synth.composite(256, 144, seed)) for seed in range(6)]
    tiles += [("step", synth.step_edge(256, 144)), ("checker", synth.checker(256, 144)),
              ("stripes-v", synth.stripes(256, 144, 4, True)), ("stripes-h", synth.stripes(256, 144, 6, False)),
              ("gray", synth.constant(256, 144)), ("green", synth.constant(256, 144, (20, 200, 90)))]
    return tiles


def test_c4_codec_properties(criterion):
    t0 = time.perf_counter()
    corpus = _corpus()
    names, tiles = [n for n, _ in corpus], [t for _, t in corpus]
    assert len(tiles) == 50 and all(t.shape == (144, 256, 3) for t in tiles)
    mosaic = np.concatenate([np.concatenate(tiles[r * 10:(r + 1) * 10], axis=1) for r in range(5)], axis=0)
    pyr = build_pyramid(mosaic, [(2560, 720)])
    m1 = transcode_all(pyr, DEFAULT_QPS, workers=1)
    m8 = transcode_all(pyr, DEFAULT_QPS, workers=8)
    same_hash = m1.digest() == m8.digest()
    again = transcode_all(pyr, DEFAULT_QPS, workers=1).digest() == m1.digest()

    sizes = np.array([[m1.size(0, i % 10, i // 10, qp) for qp in DEFAULT_QPS] for i in range(50)])
    totals = sizes.sum(axis=0)
    total_strict = bool(np.all(np.diff(totals) < 0))
    pairs = [[sizes[i, a] >= sizes[i, b] for a in range(10) for b in range(a + 1, 10)] for i in range(50)]
    not_monotone = [names[i] for i in range(50) if not all(pairs[i])]
    tile_frac = 1 - len(not_monotone) / 50
    min_pair_frac = min(np.mean(p) for p in pairs)
    pooled = float(np.mean(pairs))

    psnr_fail = []
    for i, t in enumerate(tiles):
        if (t == t[0, 0]).all():
            continue
        ref_y = codec.rgb_to_ycbcr(t)[0]
        p22 = codec.psnr_db(ref_y, codec.decode_planes(m1.payload(0, i % 10, i // 10, 22))[0])
        p49 = codec.psnr_db(ref_y, codec.decode_planes(m1.payload(0, i % 10, i // 10, 49))[0])
        if not p22 > p49:
            psnr_fail.append(f"{names[i]} ({p22:.1f} vs {p49:.1f} dB)")
    elapsed = time.perf_counter() - t0
    ok = same_hash and again and total_strict and tile_frac >= 0.95 and not psnr_fail and elapsed < 60
    criterion(4, ok, f"50 tiles: total size strictly decreasing = {total_strict}; fully monotone tiles "
                     f"{tile_frac:.0%} (need 95%; min per-tile pair share {min_pair_frac:.1%}, pooled {pooled:.1%}; "
                     f"non-monotone {not_monotone}); PSNR22>PSNR49 failures {psnr_fail}; "
                     f"hash 1 vs 8 workers equal = {same_hash}; runtime {elapsed:.1f}s")
    assert ok


# -- 5 ---------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def planner_manifest():
    img = synth.gigapixel(2560, 1440, seed=7)
    return build_manifest(img, levels=[(2560, 1440), (1280, 720), (640, 360)], source_id="giga")


def test_c5_planner_guarantee(criterion, planner_manifest):
    m = planner_manifest
    rng = np.random.default_rng(5)
    violations, centre_bad = 0, 0
    for i in range(100):
        lv = int(rng.integers(0, 3))
        w, h = m.levels[lv]
        gaze = (float(rng.uniform(0, w)), float(rng.uniform(0, h)))
        base = int(rng.choice([22, 28, 34, 40]))
        vp = tp.ViewportGeometry.around(gaze, (w, h), (1600, 900), 110.0, lv)
        fov = tp.plan(vp, m, base_qp=base)
        uni = tp.uniform_plan(vp, m, base)
        if ss.fov_payload(fov, m) > ss.fov_payload(uni, m):
            violations += 1
        tx, ty = min(int(gaze[0] // 256), m.grid(lv)[0] - 1), min(int(gaze[1] // 144), m.grid(lv)[1] - 1)
        centre = next(e for e in fov.entries if (e.level, e.x, e.y) == (lv, tx, ty))
        centre_bad += centre.qp != base
    ok = violations == 0 and centre_bad == 0
    criterion(5, ok, f"100 random gazes: payload violations {violations}; gaze-tile QP != base {centre_bad}")
    assert ok


# -- 6 ---------------------------------------------------------------------------------

# published retrieval times (s): t_ori and t_m per bandwidth column, and the printed saving
PUBLISHED = {
    "Road": {5: (6.3312, 0.5381), 10: (1.5828, 0.1345), 20: (3.1656, 0.2691), "saving": 0.9171},
    "Park": {5: (6.2912, 0.5513), 10: (1.5728, 0.1378), 20: (3.1456, 0.2757), "saving": 0.9150},
    "Airport": {5: (8.0340, 0.9388), 10: (2.0085, 0.2347), 20: (4.0170, 0.4694), "saving": 0.8918},
}
EXPECTED_SAVING = {"Road": 0.9150, "Park": 0.9124, "Airport": 0.8831}


def test_c6_published_arithmetic(criterion):
    scenes = list(PUBLISHED)
    # payload bytes back-derived from the 5 Mbps column
    payloads = [(i, PUBLISHED[s][5][0] * 5e6 / 8, PUBLISHED[s][5][1] * 5e6 / 8) for i, s in enumerate(scenes)]
    rep = ss.report_from_payloads(payloads, [5, 10, 20])
    tol = 5e-5 + 1e-12
    t5_ok = all(abs(r.t_ori - PUBLISHED[scenes[r.step]][5][0]) <= tol and
                abs(r.t_m - PUBLISHED[scenes[r.step]][5][1]) <= tol for r in rep.for_bandwidth(5))
    # the printed 10 and 20 Mbps columns match 20 and 10 Mbps arithmetic respectively
    swapped_ok = all(abs(r.t_ori - PUBLISHED[scenes[r.step]][{10: 20, 20: 10}[r.mbps]][0]) <= tol and
                     abs(r.t_m - PUBLISHED[scenes[r.step]][{10: 20, 20: 10}[r.mbps]][1]) <= tol
                     for bw in (10, 20) for r in rep.for_bandwidth(bw))
    savings = {s: ss.RetrievalRow(0, 5, 0, 0, *PUBLISHED[s][5]).saving for s in scenes}
    sav_ok = all(abs(savings[s] - EXPECTED_SAVING[s]) <= tol for s in scenes)
    sim_sav_ok = all(abs(r.saving - savings[scenes[r.step]]) <= 1e-12 for r in rep.rows)
    gaps = {s: abs(savings[s] - PUBLISHED[s]["saving"]) * 100 for s in scenes}
    gap_ok = all(g <= 1.0 for g in gaps.values())
    mean_t = rep.aggregate()[5][0]
    mean_ok = abs(mean_t - 6.8855) <= tol
    ok = t5_ok and swapped_ok and sav_ok and sim_sav_ok and gap_ok and mean_ok
    gap_txt = ", ".join(f"{s} {savings[s]:.4f} vs {PUBLISHED[s]['saving']:.4f} ({gaps[s]:.2f} pp)" for s in scenes)
    criterion(6, ok, f"5 Mbps times to 4 dp = {t5_ok}; 10/20 Mbps printed columns reproduce swapped = "
                     f"{swapped_ok}; savings {gap_txt}; mean t_ori {mean_t:.4f}")
    assert ok


# -- 7 ---------------------------------------------------------------------------------

def test_c7_smooth_beats_textured(criterion):
    trace = [ss.TraceStep(0, 640, 360, 0, 110.0), ss.TraceStep(1, 300, 200, 0, 110.0)]
    dts, spread = {}, 0.0
    for kind in ("sky", "grass"):
        m = build_manifest(synth.make(kind, 1280, 720, seed=3), levels=[(1280, 720)], source_id=kind)
        rep = ss.simulate(trace, m, [1, 5, 10, 20, 100])
        for step in (0, 1):
            sv = [r.saving for r in rep.rows if r.step == step]
            spread = max(spread, max(sv) - min(sv))
        dts[kind] = [p.delta_t for p in ss.savings_vs_size(trace, m)]
    better = all(s > g for s, g in zip(dts["sky"], dts["grass"]))
    ok = better and spread <= 1e-9
    criterion(7, ok, f"dT sky {[round(v, 4) for v in dts['sky']]} > grass {[round(v, 4) for v in dts['grass']]}; "
                     f"max spread across bandwidths {spread:.1e}")
    assert ok


# -- 8 ---------------------------------------------------------------------------------

def _grp(values, image="A", zone=VisionZone.CVA, measure="q"):
    return [RatingRecord(f"s{i:02d}", image, zone, measure, float(v)) for i, v in enumerate(values)]


def test_c8_screening_suite(criterion):
    results = {}
    results["{10,10,10,10,50} no exclusion"] = rs.screen(_grp([10, 10, 10, 10, 50]))[1] == []
    results["{10,10,10,10,100} no exclusion"] = rs.screen(_grp([10, 10, 10, 10, 100]))[1] == []
    clean, excl = rs.screen(_grp([10] * 9 + [100]))
    results["{10 x9,100} drops 100"] = [e.record.value for e in excl] == [100.0] and \
        rs.aggregate(clean)[("A", VisionZone.CVA, "q")] == 10.0

    # forty subjects, five of whom overrate on images A and B
    recs = []
    for img, mu in (("A", 20.0), ("B", 40.0), ("C", 64.0)):
        for s in range(40):
            v = mu + ((s * 7) % 5 - 2) * 0.5
            recs.append(RatingRecord(f"p{s:02d}", img, VisionZone.NPA, "q", v * (3.0 if s >= 35 and img != "C" else 1)))
    clean, excl = rs.screen(recs)
    survivors = {r.subject_id for r in clean}
    exp_means = {img: sum(r.value for r in recs if r.image_id == img and int(r.subject_id[1:]) < 35) / 35
                 for img in "ABC"}
    agg = rs.aggregate(clean)
    results["40 subjects -> 35 survivors, exact means"] = (
        survivors == {f"p{s:02d}" for s in range(35)}
        and {e.record.subject_id for e in excl} == {f"p{s:02d}" for s in range(35, 40)}
        and all(abs(agg[(img, VisionZone.NPA, "q")] - exp_means[img]) <= 1e-12 for img in "ABC"))

    a = _grp([10] * 9 + [100], image="A")
    b = _grp([20] * 9 + [200], image="B")
    c = _grp([5, 6, 7, 5, 6, 7, 5, 6, 7, 6], image="C")
    clean, excl = rs.screen(a + b + c)
    results["removal fires on 2 images"] = not any(r.subject_id == "s09" for r in clean) and \
        {e.reason for e in excl if e.record.image_id == "C"} == {"subject"}
    a2 = _grp([10] * 9 + [100], image="A", zone=VisionZone.NPA)
    clean, excl = rs.screen(a + a2 + c)
    results["removal silent on 2 zones of 1 image"] = sum(r.subject_id == "s09" for r in clean) == 1 and \
        all(e.reason == "outlier" for e in excl)
    ok = all(results.values())
    criterion(8, ok, "; ".join(f"{k}: {'ok' if v else 'FAIL'}" for k, v in results.items()))
    assert ok


# -- 9 ---------------------------------------------------------------------------------

def _pipeline(out, workers):
    from foveatile.mia_engine import TileManifest

    t0 = time.perf_counter()
    img = synth.gigapixel(8192, 4320, seed=0)
    build_manifest(img, workers=workers, source_id="gigapixel").write(out / "manifest")
    del img
    m = TileManifest.load(out / "manifest")
    trace = ss.navigation_trace(m, 12, seed=0)
    (out / "trace.csv").write_text(ss.format_trace(trace))
    last = trace[-1]
    vp = tp.ViewportGeometry.around((last.gaze_x, last.gaze_y), m.levels[last.level], ss.DEFAULT_VIEW,
                                    last.fov_deg, last.level)
    (out / "plan.csv").write_text(tp.plan(vp, m).to_text())
    rep = ss.simulate(trace, m, [5, 10, 20])
    (out / "retrieval.csv").write_text(rep.to_csv())
    (out / "retrieval_table.csv").write_text(rep.table())
    (out / "savings_vs_size.csv").write_text(ss.savings_csv(ss.savings_vs_size(trace, m)))
    return time.perf_counter() - t0, m


@pytest.mark.slow
def test_c9_end_to_end_determinism(criterion, tmp_path):
    runs = []
    for name, workers in (("a", 1), ("b", 1), ("c", 4)):
        out = tmp_path / name
        out.mkdir()
        runs.append((out, *_pipeline(out, workers)))
    files = sorted(p.relative_to(runs[0][0]) for p in runs[0][0].rglob("*") if p.is_file())
    identical = all((out / f).read_bytes() == (runs[0][0] / f).read_bytes() for out, _, _ in runs[1:] for f in files)
    slowest = max(t for _, t, _ in runs)
    m = runs[0][2]
    n_tiles = sum(len(m.tiles(lv)) for lv in range(len(m.levels)))
    ok = identical and slowest < 300 and len(files) >= 8
    criterion(9, ok, f"8192x4320, {len(m.levels)} levels, {n_tiles} tiles x {len(m.coded_qps)} QPs; "
                     f"{len(files)} output files byte-identical over 2 runs and 1 vs 4 workers = {identical}; "
                     f"slowest run {slowest:.0f}s")
    assert ok
