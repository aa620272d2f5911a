import numpy as np
import pytest

from sdforest import tensor_io
from sdforest.metrics import (
    boundary_f,
    default_boundary_tol,
    evaluate,
    jaccard,
    mask_boundary,
    sequence_stats,
    write_report,
)


def test_jaccard_identical():
    m = np.zeros((8, 8), bool)
    m[2:5, 2:5] = True
    assert jaccard(m, m) == 1.0


def test_jaccard_hand_counted_case():
    a = np.zeros((8, 8), bool)
    b = np.zeros((8, 8), bool)
    a[0:3, 0:3] = True
    b[1:4, 1:4] = True
    assert jaccard(a, b) == pytest.approx(4 / 14)
    assert jaccard(b, a) == pytest.approx(4 / 14)


def test_jaccard_empty_conventions():
    empty = np.zeros((4, 4), bool)
    full = np.ones((4, 4), bool)
    assert jaccard(empty, empty) == 1.0
    assert jaccard(empty, full) == 0.0
    assert jaccard(full, empty) == 0.0


def test_mask_boundary_edges_count_as_outside():
    full = np.ones((4, 5), bool)
    b = mask_boundary(full)
    inner = np.zeros((4, 5), bool)
    inner[1:-1, 1:-1] = True
    assert np.array_equal(b, ~inner & full)
    single = np.zeros((3, 3), bool)
    single[1, 1] = True
    assert np.array_equal(mask_boundary(single), single)


def test_boundary_f_identical_and_empty():
    m = np.zeros((10, 10), bool)
    m[3:7, 2:8] = True
    assert boundary_f(m, m, tol=1) == 1.0
    empty = np.zeros((10, 10), bool)
    assert boundary_f(empty, empty, tol=1) == 1.0
    assert boundary_f(empty, m, tol=1) == 0.0
    assert boundary_f(m, empty, tol=1) == 0.0


def test_boundary_f_shift_within_and_beyond_tolerance():
    # straight-edge mask whose boundary is a single vertical line: every
    # boundary distance of the shifted mask equals the shift exactly
    h, w = 16, 32
    tol = 3

    def line(col):
        m = np.zeros((h, w), bool)
        m[:, col] = True
        return m

    base = line(10)
    assert boundary_f(line(10 + tol), base, tol=tol) == 1.0
    assert boundary_f(line(10 + tol + 1), base, tol=tol) == 0.0


def test_boundary_f_half_plane_keeps_shared_edges():
    # a shifted half-plane keeps its frame-edge boundary pixels in common,
    # so the score degrades but does not vanish (frame edge = non-mask)
    h, w = 16, 32

    def half_plane(col):
        m = np.zeros((h, w), bool)
        m[:, :col] = True
        return m

    score = boundary_f(half_plane(14), half_plane(10), tol=3)
    assert 0.0 < score < 1.0


def test_boundary_f_symmetry():
    rng = np.random.default_rng(110)
    a = rng.random((12, 12)) > 0.6
    b = rng.random((12, 12)) > 0.6
    assert boundary_f(a, b, tol=1) == pytest.approx(boundary_f(b, a, tol=1))


def test_default_boundary_tol():
    assert default_boundary_tol(480, 854) == 8
    assert default_boundary_tol(16, 32) == 1


def test_sequence_stats_reference_series():
    mean, recall, decay = sequence_stats([1.0, 0.8, 0.6, 0.4])
    assert mean == pytest.approx(0.7)
    assert recall == pytest.approx(0.75)
    assert decay == pytest.approx(0.6)


def test_sequence_stats_constant_and_single():
    mean, recall, decay = sequence_stats([0.9, 0.9, 0.9])
    assert mean == pytest.approx(0.9) and decay == 0.0 and recall == 1.0
    mean, recall, decay = sequence_stats([0.3])
    assert mean == pytest.approx(0.3) and decay == 0.0 and recall == 0.0


def test_sequence_stats_nonincreasing_decay_nonnegative():
    rng = np.random.default_rng(111)
    for n in (2, 3, 5, 9, 17):
        vals = np.sort(rng.random(n))[::-1]
        _, _, decay = sequence_stats(vals)
        assert decay >= 0.0


def test_sequence_stats_remainder_to_early_bins():
    # 5 values: bins are [2,1,1,1] so the first bin averages two values
    mean, _, decay = sequence_stats([1.0, 0.8, 0.5, 0.5, 0.2])
    assert decay == pytest.approx(0.9 - 0.2)


def _write_sequence(root, name, masks):
    d = root / name
    d.mkdir(parents=True)
    for i, m in enumerate(masks):
        tensor_io.write_mask(m, d / f"{i:05d}.png")


def test_evaluate_identical_dirs(tmp_path):
    rng = np.random.default_rng(112)
    masks = [(rng.random((20, 20)) > 0.5).astype(np.uint8) for _ in range(6)]
    _write_sequence(tmp_path / "gt", "seq", masks)
    _write_sequence(tmp_path / "pred", "seq", masks)
    report = evaluate(tmp_path / "pred", tmp_path / "gt")
    for m in ("J_M", "J_O", "F_M", "F_O"):
        assert report.globals[m] == 1.0
    for m in ("J_D", "F_D"):
        assert report.globals[m] == 0.0


def test_evaluate_all_background_pred(tmp_path):
    gt = [np.ones((10, 10), np.uint8) for _ in range(4)]
    pred = [np.zeros((10, 10), np.uint8) for _ in range(4)]
    _write_sequence(tmp_path / "gt", "s", gt)
    _write_sequence(tmp_path / "pred", "s", pred)
    report = evaluate(tmp_path / "pred", tmp_path / "gt")
    assert report.globals["J_M"] == 0.0


def test_evaluate_multi_object_average(tmp_path):
    gt_mask = np.zeros((12, 12), np.uint8)
    gt_mask[2:5, 2:5] = 1
    gt_mask[7:10, 7:10] = 2
    pred = gt_mask.copy()
    pred[gt_mask == 2] = 0  # object 2 entirely missed
    _write_sequence(tmp_path / "gt", "s", [gt_mask] * 3)
    _write_sequence(tmp_path / "pred", "s", [pred] * 3)
    report = evaluate(tmp_path / "pred", tmp_path / "gt")
    assert report.sequences["s"][1]["J_M"] == 1.0
    assert report.sequences["s"][2]["J_M"] == 0.0
    assert report.per_sequence["s"]["J_M"] == pytest.approx(0.5)


def test_evaluate_missing_frame_and_size_mismatch(tmp_path):
    masks = [np.ones((8, 8), np.uint8)] * 3
    _write_sequence(tmp_path / "gt", "s", masks)
    _write_sequence(tmp_path / "pred", "s", masks[:2])
    with pytest.raises(FileNotFoundError):
        evaluate(tmp_path / "pred", tmp_path / "gt")

    _write_sequence(tmp_path / "gt2", "s", masks)
    _write_sequence(tmp_path / "pred2", "s", [np.ones((9, 8), np.uint8)] * 3)
    with pytest.raises(ValueError, match="mismatch"):
        evaluate(tmp_path / "pred2", tmp_path / "gt2")


def test_report_files(tmp_path):
    masks = [np.ones((8, 8), np.uint8)] * 3
    _write_sequence(tmp_path / "gt", "s", masks)
    _write_sequence(tmp_path / "pred", "s", masks)
    report = evaluate(tmp_path / "pred", tmp_path / "gt")
    out = tmp_path / "report.txt"
    write_report(report, out)
    text = out.read_text()
    assert "global.J_M: 1.000000" in text
    import json

    payload = json.loads((tmp_path / "report.txt.json").read_text())
    assert payload["global"]["J_M"] == 1.0
    assert "s" in payload["sequences"]
