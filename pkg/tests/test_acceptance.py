"""Acceptance suite: one test per release criterion.

Each test prints a single CRITERION line on success (run with -s or -rA
to see them); a failed assertion fails the criterion. Budgets are
per-criterion wall-clock upper bounds asserted at the end of each test.
"""

import csv
import json
import time
from pathlib import Path

import numpy as np
from mpmath import mp, mpf

from stackfuse import assets, cli
from stackfuse import pipeline as pl
from stackfuse import preprocess as pp
from stackfuse import projections as prj
from stackfuse import stats
from stackfuse.iqa import brisque, fit_niqe_model, mscn, niqe, piqe
from stackfuse.stackio import FrameStack

from conftest import add_gaussian_noise
from oracles import (
    naive_bilateral,
    naive_median,
    naive_mscn,
    naive_nl_means,
    naive_project,
    set_bg_mismatch,
    set_iou_percent,
    flood_fill_components,
    t_cdf,
)


class Budget:
    def __init__(self, seconds: float):
        self.limit = seconds
        self.t0 = time.perf_counter()

    def done(self, n: int, message: str) -> None:
        elapsed = time.perf_counter() - self.t0
        assert elapsed < self.limit, f"criterion {n} exceeded {self.limit}s ({elapsed:.1f}s)"
        print(f"\nCRITERION {n} PASS ({elapsed:.2f}s): {message}")


def test_criterion_1_enumeration_and_manifest_counts(tmp_path):
    budget = Budget(1.0)
    seqs = pl.enumerate_sequences()
    assert len(seqs) == 111
    n_pipelines = len(seqs) * len(prj.DEFAULT_PROJECTIONS)
    assert n_pipelines == 666
    # 91 videos would give the full-study total
    assert 91 * n_pipelines == 60606

    rng = np.random.default_rng(0)
    videos = [
        FrameStack(rng.integers(0, 256, size=(1, 16, 16)).astype(np.uint8), f"v{i}")
        for i in range(2)
    ]
    manifest = pl.run_grid(videos, seqs, prj.DEFAULT_PROJECTIONS, tmp_path, jobs=1)
    assert len(manifest.rows) == 666 * len(videos)
    assert not manifest.failed
    budget.done(1, "111 sequences, 666 pipelines, manifest rows = 666 * n videos")


def test_criterion_2_sp_ap_equivalence():
    budget = Budget(5.0)
    rng = np.random.default_rng(202)
    for _ in range(100):
        t = int(rng.integers(2, 21))
        stack = rng.integers(0, 256, size=(t, 32, 32)).astype(np.float64)
        sp = prj.normalize_8bit(prj.project(stack, "SP"))
        ap = prj.normalize_8bit(prj.project(stack, "AP"))
        assert np.array_equal(sp, ap)
    budget.done(2, "normalized SP and AP pixel-identical on 100 random stacks")


def test_criterion_3_projection_oracles_and_permutation():
    budget = Budget(5.0)
    rng = np.random.default_rng(303)
    for i in range(50):
        stack = rng.integers(0, 256, size=(10, 8, 8)).astype(np.float64)
        perm = rng.permutation(10)
        for pid in prj.PROJECTIONS:
            got = prj.project(stack, pid).data
            assert np.array_equal(got, naive_project(stack, pid)), (i, pid)
            if pid != "PDP":
                assert np.array_equal(got, prj.project(stack[perm], pid).data), (i, pid)
    budget.done(3, "8 projections exact vs brute-force loops; permutation-invariant except PDP")


def test_criterion_4_gamma_equation():
    budget = Budget(1.0)
    mp.dps = 30
    rng = np.random.default_rng(404)
    values = rng.uniform(0.0, 255.0, 10_000)
    gammas = rng.uniform(0.05, 20.0, 10_000)
    for v, g in zip(values, gammas):
        got = pp.gamma_correct(np.array([[v]]), pp.GammaParams(gamma=g))[0, 0]
        want = float(mpf(255.0) * (mpf(v) / mpf(255.0)) ** mpf(g))
        assert abs(got - want) <= 1e-9 * max(abs(want), 1e-300), (v, g)
    # endpoints and identity
    p = pp.GammaParams(gamma=0.75)
    assert pp.gamma_correct(np.array([[0.0]]), p)[0, 0] == 0.0
    assert pp.gamma_correct(np.array([[255.0]]), p)[0, 0] == 255.0
    img = np.linspace(0, 255, 64).reshape(8, 8)
    assert np.allclose(pp.gamma_correct(img, pp.GammaParams(gamma=1.0)), img, rtol=1e-15)
    budget.done(4, "10^4 gamma mappings within 1e-9 relative of high-precision oracle")


def test_criterion_5_filter_oracles():
    budget = Budget(30.0)
    rng = np.random.default_rng(505)
    img = rng.integers(0, 256, size=(16, 16)).astype(np.float64)
    assert np.max(np.abs(pp.median_blur(img, 5) - naive_median(img, 5))) < 1e-6
    assert np.max(np.abs(pp.bilateral(img, 3, 25.0, 50.0) - naive_bilateral(img, 3, 25.0, 50.0))) < 1e-6
    assert np.max(np.abs(pp.nl_means(img, 10.0, 3, 7) - naive_nl_means(img, 10.0, 3, 7))) < 1e-6
    budget.done(5, "median/bilateral/nl-means within 1e-6 of quadruple-loop oracles")


def test_criterion_6_clahe_properties():
    budget = Budget(5.0)
    for acr in ("CL", "CH"):
        out = pp.clahe(np.full((48, 48), 93.0), pp.DEFAULT_PARAMS[acr])
        assert np.all(out == out[0, 0])
    gen = np.random.default_rng(2024)
    img = gen.integers(100, 157, size=(64, 64)).astype(np.float64)
    contrast_cl = np.ptp(pp.clahe(img, pp.DEFAULT_PARAMS["CL"]))
    contrast_ch = np.ptp(pp.clahe(img, pp.DEFAULT_PARAMS["CH"]))
    assert contrast_ch >= contrast_cl
    assert abs(contrast_cl - 111.5625) < 1e-9
    assert abs(contrast_ch - 245.0390625) < 1e-9
    budget.done(6, "constant image stays constant; CH/CL contrast regression reproduced")


def test_criterion_7_iqa_properties(niqe_model, brisque_model):
    budget = Budget(60.0)
    rng = np.random.default_rng(707)
    img = rng.integers(0, 256, size=(16, 16)).astype(np.float64)
    assert np.max(np.abs(mscn(img) - naive_mscn(img))) < 1e-6

    photos = [assets.photo(n) for n in ("camera", "coins", "moon")]
    for photo in photos:
        assert 0.0 <= piqe(photo) <= 100.0
        scores = {"piqe": [], "niqe": [], "brisque": []}
        for sigma in (5.0, 15.0, 30.0):
            noisy = add_gaussian_noise(photo, sigma, seed=42 + int(sigma))
            scores["piqe"].append(piqe(noisy))
            scores["niqe"].append(niqe(noisy, niqe_model))
            scores["brisque"].append(brisque(noisy, brisque_model))
        for metric, vals in scores.items():
            assert vals[0] <= vals[1] <= vals[2], (metric, vals)
            if metric == "piqe":
                assert all(0.0 <= v <= 100.0 for v in vals)

    # determinism through freshly loaded model files
    from stackfuse.assets import default_brisque_model, default_niqe_model

    target = photos[0]
    assert niqe(target, default_niqe_model()) == niqe(target, default_niqe_model())
    assert brisque(target, default_brisque_model()) == brisque(target, default_brisque_model())
    budget.done(7, "mscn oracle, piqe range, 3-photo noise monotonicity, model determinism")


def test_criterion_8_gt_metrics():
    budget = Budget(5.0)
    from stackfuse import gtmetrics as gt

    rng = np.random.default_rng(808)
    for _ in range(200):
        a = (rng.random((16, 16)) < rng.uniform(0.1, 0.6)).astype(int)
        b = (rng.random((16, 16)) < rng.uniform(0.1, 0.6)).astype(int)
        assert gt.iou(a, b) == set_iou_percent(a, b)
        assert gt.iou(a, b) == gt.iou(b, a)
        m_ab = gt.bg_mismatch(a, b)
        assert m_ab == set_bg_mismatch(a, b)
        assert m_ab == tuple(reversed(gt.bg_mismatch(b, a)))
        count, areas = gt.instance_stats(a, relabel=True)
        ref = flood_fill_components(a)
        ref_ids, ref_areas = np.unique(ref[ref > 0], return_counts=True)
        assert count == len(ref_ids)
        assert sorted(areas) == sorted(ref_areas.tolist())
    budget.done(8, "iou/bg-mismatch/components exact vs set and flood-fill oracles, 200 pairs")


def test_criterion_9_stats_oracles():
    budget = Budget(1.0)
    rng = np.random.default_rng(909)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        x = rng.normal(0, 10, n)
        y = x + rng.normal(0.5, 2, n)
        res = stats.paired_test(x, y)
        d = x - y
        t_ref = d.mean() / (d.std(ddof=1) / np.sqrt(n))
        p_ref = 2 * t_cdf(-abs(t_ref), n - 1)
        assert abs(res.t_statistic - t_ref) < 1e-6
        assert abs(res.p_value - p_ref) < 1e-6
        rev = stats.paired_test(y, x)
        assert res.t_statistic == -rev.t_statistic and res.p_value == rev.p_value

        s = stats.summarize(x)
        assert abs(s.mean - x.mean()) < 1e-9
        assert abs(s.sd - x.std(ddof=1)) < 1e-9

    zero = stats.paired_test([1.0, 2.0], [1.0, 2.0])
    assert (zero.p_value, zero.cohens_d, zero.degenerate) == (1.0, 0.0, "zero-differences")
    const = stats.paired_test([2.0, 3.0], [1.0, 2.0])
    assert (const.p_value, const.degenerate) == (0.0, "constant-differences")
    for df in (1, 7, 50, 200):
        for t in (-5.0, -1.1, 0.0, 0.4, 3.2):
            assert abs(stats.student_t_cdf(t, df) - t_cdf(t, df)) < 1e-9
    budget.done(9, "summarize/paired-test match oracles; antisymmetry and degenerate policies hold")


def _write_video(root: Path, name: str, seed: int) -> None:
    from PIL import Image

    vdir = root / name
    vdir.mkdir(parents=True)
    gen = np.random.default_rng(seed)
    base = gen.integers(40, 200, size=(48, 48)).astype(np.float64)
    for t in range(5):
        frame = np.clip(base + gen.normal(0, 25, base.shape), 0, 255)
        Image.fromarray(np.floor(frame + 0.5).astype(np.uint8), mode="L").save(
            vdir / f"frame_{t:02d}.png"
        )


def test_criterion_10_end_to_end_determinism(tmp_path):
    budget = Budget(120.0)
    dataset = tmp_path / "dataset"
    _write_video(dataset, "v0", seed=1)
    _write_video(dataset, "v1", seed=2)

    # niqe model sized for the 48x48 outputs
    crops = []
    for name in assets.PHOTO_NAMES:
        img = assets.photo(name)
        crops.append(img[:96, :96])
        crops.append(img[-96:, -96:])
    model_path = tmp_path / "niqe_small.json"
    fit_niqe_model(crops, patch_size=48).save(model_path)

    def one_run(tag: str, jobs: int) -> dict[str, bytes]:
        out = tmp_path / tag
        cfg_path = tmp_path / f"{tag}.json"
        cfg_path.write_text(json.dumps({
            "input_dir": str(dataset),
            "output_dir": str(out),
            "jobs": jobs,
            "niqe_model": str(model_path),
        }))
        assert cli.main(["run", "--config", str(cfg_path)]) == 0
        scores = tmp_path / f"{tag}_scores.csv"
        assert cli.main([
            "score", "--config", str(cfg_path),
            "--input", str(out / "manifest.csv"), "--output", str(scores),
        ]) == 0
        blobs = {"manifest.csv": (out / "manifest.csv").read_bytes()}
        # manifests embed absolute paths, which differ per run dir; compare
        # the grid columns instead of the raw path column
        rows = list(csv.DictReader((out / "manifest.csv").open()))
        blobs["manifest.csv"] = repr([
            (r["video_id"], r["sequence"], r["projection"], Path(r["path"]).name, r["status"])
            for r in rows
        ]).encode()
        for png in sorted(out.glob("*.png")):
            blobs[png.name] = png.read_bytes()
        score_rows = list(csv.DictReader(scores.open()))
        blobs["scores.csv"] = repr([
            (Path(r["image"]).name, r["metric"], r["score"]) for r in score_rows
        ]).encode()
        assert len(rows) == 2 * 111 * 6
        assert len(score_rows) == 3 * len(rows)
        return blobs

    first = one_run("run1", jobs=1)
    second = one_run("run2", jobs=4)
    assert first.keys() == second.keys()
    for key in first:
        assert first[key] == second[key], f"non-deterministic artifact: {key}"
    budget.done(10, "full 666-pipeline grid twice: images, manifest and score CSVs identical")
