"""File formats and the command-line pipeline, end to end."""

import numpy as np
import pytest

from ppseg import (
    ResultDocument,
    default_window,
    load_series,
    parse_result,
    read_events_file,
    read_intensity_file,
    render_metrics,
    render_result,
    write_events_file,
    write_intensity_file,
)
from ppseg.bench import CSV_COLUMNS
from ppseg.cli import main


def test_events_file_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    times = np.sort(rng.uniform(0.0, 100.0, 50))
    marks = rng.exponential(10.0, 50)
    plain = tmp_path / "plain.csv"
    marked = tmp_path / "marked.csv"
    write_events_file(plain, times)
    write_events_file(marked, times, marks)
    t, m = read_events_file(plain)
    assert m is None
    assert np.array_equal(t, times)
    t, m = read_events_file(marked)
    assert np.array_equal(t, times)
    assert np.array_equal(m, marks)


def test_events_file_validation(tmp_path):
    def failing(text, match):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(ValueError, match=match) as err:
            read_events_file(path)
        return str(err.value)

    failing("", "empty events file")
    failing("when\n1.0\n", "expected header")
    failing("time,mark,extra\n", "expected header")
    msg = failing("time,mark\n1.0\n", "expected 2 fields")
    assert ":2:" in msg
    msg = failing("time\n1.0\noops\n", "non-numeric value")
    assert ":3:" in msg
    failing("time\n2.0\n1.0\n", "sorted ascending")
    failing("time\n1.0\ninf\n", "must be finite")
    failing("time,mark\n1.0,2.0\n3.0,-1.0\n", "strictly positive")


def test_events_file_skips_blank_lines(tmp_path):
    path = tmp_path / "events.csv"
    path.write_text("time\n1.0\n\n2.0\n")
    t, m = read_events_file(path)
    assert t.tolist() == [1.0, 2.0] and m is None


def test_intensity_file_round_trip(tmp_path):
    path = tmp_path / "intensity.csv"
    bp = np.array([0.0, 7.0, 8.0, 24.0])
    rates = np.array([1.5, 12.0, 1.5])
    mark_rates = np.array([0.1, 0.005, 0.1])
    write_intensity_file(path, bp, rates, mark_rates)
    got_bp, got_rates, got_marks = read_intensity_file(path)
    assert np.array_equal(got_bp, bp)
    assert np.array_equal(got_rates, rates)
    assert np.array_equal(got_marks, mark_rates)
    write_intensity_file(path, bp, rates)
    assert read_intensity_file(path)[2] is None


def test_intensity_file_validation(tmp_path):
    def failing(text, match):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(ValueError, match=match):
            read_intensity_file(path)

    failing("", "empty intensity file")
    failing("start,stop,rate\n", "expected header")
    failing("start,end,rate\n", "no segments")
    failing("start,end,rate\n0.0,x,1.0\n", "non-numeric value")
    failing("start,end,rate\n0.0,0.0,1.0\n", "end > start")
    failing("start,end,rate\n0.0,1.0,1.0\n2.0,3.0,1.0\n", "contiguously")


def test_default_window_pads_the_range():
    assert default_window([2.0, 3.0, 4.0]) == (1.98, 4.02)
    with pytest.raises(ValueError, match="pass one explicitly"):
        default_window([3.0, 3.0])
    with pytest.raises(ValueError, match="empty series"):
        default_window([])


def test_load_series_infers_windows(tmp_path):
    path = tmp_path / "events.csv"
    write_events_file(path, [2.0, 3.0, 4.0], [1.0, 2.0, 3.0])
    series = load_series(path)
    assert series.window == (1.98, 4.02)
    assert series.marks is not None
    explicit = load_series(path, window=(0.0, 10.0))
    assert explicit.window == (0.0, 10.0)
    assert np.array_equal(explicit.times, np.array([0.2, 0.3, 0.4]))


def _sample_document(marked=True):
    return ResultDocument(
        command="segment",
        source="events.csv",
        contrast_kind="marked_pgeg" if marked else "poisson_gamma",
        a=1.0,
        b=0.025,
        a_rho=2.01 if marked else None,
        b_rho=3.03 if marked else None,
        fraction=0.8,
        cv_replicates=100,
        kmax=3,
        seed=None,
        window=(2.0, 10.0),
        n_events=40,
        k_hat=2,
        warnings=("event times contain ties", "2 replicate(s) dropped: empty learning set"),
        cv_rows=((1, 10.5, 0.25, 100), (2, 9.75, 0.5, 100), (3, 11.0, 0.125, 98)),
        contrast_rows=((1, -55.25), (2, -60.125), (3, None)),
        change_points=((13, "before", 0.375, 5.0),),
        segments=(
            (1, 15, 20.0, 2.5, 0.25 if marked else None),
            (2, 25, 41.0, 5.125, 0.125 if marked else None),
        ),
    )


@pytest.mark.parametrize("marked", [True, False])
def test_result_document_round_trip(marked):
    doc = _sample_document(marked)
    text = render_result(doc)
    assert text.startswith("ppseg-result v1\n")
    back = parse_result(text)
    assert render_result(back) == text
    assert back.contrast_kind == doc.contrast_kind
    assert back.seed is None
    assert back.window == (2.0, 10.0)
    assert back.warnings == doc.warnings
    assert back.cv_rows == doc.cv_rows
    assert back.contrast_rows == doc.contrast_rows
    assert back.change_points == doc.change_points
    assert back.segments == doc.segments
    assert back.normalized_change_points.tolist() == [0.375]
    assert back.rates.tolist() == [20.0, 41.0]
    if marked:
        assert back.mark_rates.tolist() == [0.25, 0.125]
        assert "infeasible" in text
    else:
        assert back.mark_rates is None


def test_parse_result_rejects_other_files():
    with pytest.raises(ValueError, match="not a result document"):
        parse_result("time\n0.5\n")


def test_render_metrics_formats():
    text = render_metrics([("k_hat", 3), ("d", 0.25)])
    assert text == "metric,value\nk_hat,3\nd,0.25\n"


def _run(argv):
    return main(argv)


def test_cli_simulate_segment_evaluate(tmp_path, capsys):
    events = tmp_path / "events.csv"
    result = tmp_path / "result.txt"
    metrics = tmp_path / "metrics.csv"

    assert _run(["simulate", "--design", "60,8", "--seed", "4", "-o", str(events)]) == 0
    times, marks = read_events_file(events)
    assert marks is None
    assert times.size > 20
    assert np.all((times > 0.0) & (times < 1.0))

    assert _run([
        "segment", str(events), "--window", "0", "1",
        "--replicates", "30", "--kmax", "8", "--seed", "0",
        "-o", str(result),
    ]) == 0
    doc = parse_result(result.read_text())
    assert doc.command == "segment"
    assert doc.contrast_kind == "poisson_gamma"
    assert doc.n_events == times.size
    assert doc.seed == 0
    assert doc.k_hat == len(doc.segments)
    assert len(doc.cv_rows) == 8
    assert doc.window == (0.0, 1.0)

    assert _run([
        "evaluate", str(result), "--truth", "design:60,8", "-o", str(metrics),
    ]) == 0
    lines = metrics.read_text().splitlines()
    assert lines[0] == "metric,value"
    values = dict(line.split(",") for line in lines[1:])
    assert int(values["k_hat"]) == doc.k_hat
    assert int(values["k_true"]) == 6
    assert 0.0 <= float(values["hausdorff"]) <= 0.5
    assert float(values["hausdorff"]) == max(
        float(values["hausdorff_estimate_to_truth"]),
        float(values["hausdorff_truth_to_estimate"]),
    )
    assert float(values["l2"]) >= 0.0
    out = capsys.readouterr()
    assert out.err == ""


def test_cli_marked_pipeline(tmp_path):
    events = tmp_path / "marked.csv"
    result = tmp_path / "result.txt"
    assert _run([
        "simulate", "--design", "100,8", "--marks", "0.1,0.005",
        "--seed", "9", "-o", str(events),
    ]) == 0
    times, marks = read_events_file(events)
    assert marks is not None and np.all(marks > 0.0)

    assert _run([
        "segment", str(events), "--window", "0", "1",
        "--replicates", "25", "--kmax", "8", "--seed", "1",
        "-o", str(result),
    ]) == 0
    doc = parse_result(result.read_text())
    assert doc.contrast_kind == "marked_pgeg"
    assert doc.a_rho == 2.01
    assert doc.mark_rates is not None
    assert len(doc.mark_rates) == doc.k_hat


def test_cli_fixed_k_segmentation(tmp_path):
    events = tmp_path / "events.csv"
    result = tmp_path / "result.txt"
    assert _run(["simulate", "--design", "40,4", "--seed", "2", "-o", str(events)]) == 0
    assert _run([
        "segment", str(events), "--window", "0", "1",
        "--k", "3", "--contrast", "poisson",
        "-o", str(result),
    ]) == 0
    doc = parse_result(result.read_text())
    assert doc.k_hat == 3
    assert doc.contrast_kind == "poisson"
    assert doc.seed is None
    assert doc.cv_rows == ()
    assert len(doc.change_points) == 2
    assert [k for k, _ in doc.contrast_rows] == [1, 2, 3]
    # MLE rates: count over normalized length, all feasible here
    assert all(value is not None for _, value in doc.contrast_rows)


def test_cli_rerun_is_byte_identical(tmp_path):
    events = tmp_path / "events.csv"
    first = tmp_path / "a.txt"
    second = tmp_path / "b.txt"
    assert _run(["simulate", "--design", "50,8", "--seed", "6", "-o", str(events)]) == 0
    argv = ["segment", str(events), "--replicates", "20", "--kmax", "6", "--seed", "3"]
    assert _run(argv + ["-o", str(first)]) == 0
    assert _run(argv + ["-o", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_cli_window_equivariance(tmp_path):
    # dyadic times and a dyadic window: normalization is lossless, so
    # the fit on (0, 1) and on the shifted scale must agree exactly
    base = np.array([0.125, 0.25, 0.3125, 0.5, 0.53125, 0.625, 0.875])
    unit = tmp_path / "unit.csv"
    shifted = tmp_path / "shifted.csv"
    write_events_file(unit, base)
    write_events_file(shifted, 3.0 + 8.0 * base)
    out_unit = tmp_path / "unit.txt"
    out_shifted = tmp_path / "shifted.txt"
    common = ["--replicates", "10", "--kmax", "3", "--seed", "0"]
    assert _run(["segment", str(unit), "--window", "0", "1", *common,
                 "-o", str(out_unit)]) == 0
    assert _run(["segment", str(shifted), "--window", "3", "11", *common,
                 "-o", str(out_shifted)]) == 0
    a = parse_result(out_unit.read_text())
    b = parse_result(out_shifted.read_text())
    assert a.k_hat == b.k_hat
    assert a.normalized_change_points.tolist() == b.normalized_change_points.tolist()
    assert a.rates.tolist() == b.rates.tolist()
    for (_, _, norm_a, orig_a), (_, _, norm_b, orig_b) in zip(
        a.change_points, b.change_points
    ):
        assert norm_a == norm_b
        assert orig_b == 3.0 + 8.0 * orig_a


def test_cli_simulate_from_intensity_file(tmp_path):
    table = tmp_path / "truth.csv"
    events = tmp_path / "events.csv"
    result = tmp_path / "result.txt"
    metrics = tmp_path / "metrics.csv"
    table.write_text("start,end,rate\n2.0,6.0,5.0\n6.0,10.0,2.5\n")
    assert _run(["simulate", "--intensity-file", str(table),
                 "--seed", "8", "-o", str(events)]) == 0
    times, _ = read_events_file(events)
    assert np.all((times > 2.0) & (times < 10.0))
    assert _run(["segment", str(events), "--window", "2", "10",
                 "--replicates", "20", "--kmax", "5", "--seed", "0",
                 "-o", str(result)]) == 0
    doc = parse_result(result.read_text())
    assert doc.window == (2.0, 10.0)
    # truth file spans the same original window: accepted and rescaled
    assert _run(["evaluate", str(result), "--truth", str(table),
                 "-o", str(metrics)]) == 0
    values = dict(line.split(",") for line in metrics.read_text().splitlines()[1:])
    assert int(values["k_true"]) == 2


def test_cli_evaluate_rejects_mismatched_windows(tmp_path, capsys):
    events = tmp_path / "events.csv"
    result = tmp_path / "result.txt"
    truth = tmp_path / "truth.csv"
    assert _run(["simulate", "--design", "40,2", "--seed", "1", "-o", str(events)]) == 0
    assert _run(["segment", str(events), "--window", "0", "1",
                 "--replicates", "10", "--kmax", "3", "-o", str(result)]) == 0
    truth.write_text("start,end,rate\n0.0,2.0,30.0\n")
    assert _run(["evaluate", str(result), "--truth", str(truth), "-o", "-"]) == 2
    assert "mismatched windows" in capsys.readouterr().err


def test_cli_evaluate_constant_design_truth(tmp_path):
    events = tmp_path / "events.csv"
    result = tmp_path / "result.txt"
    metrics = tmp_path / "metrics.csv"
    assert _run(["simulate", "--design", "60,1", "--seed", "3", "-o", str(events)]) == 0
    assert _run(["segment", str(events), "--window", "0", "1",
                 "--replicates", "20", "--kmax", "4", "-o", str(result)]) == 0
    assert _run(["evaluate", str(result), "--truth", "design:60,1",
                 "-o", str(metrics)]) == 0
    values = dict(line.split(",") for line in metrics.read_text().splitlines()[1:])
    # a flat design merges to a single true segment
    assert int(values["k_true"]) == 1


def test_cli_cv_curve(tmp_path):
    events = tmp_path / "events.csv"
    curve = tmp_path / "curve.csv"
    assert _run(["simulate", "--design", "50,4", "--seed", "5", "-o", str(events)]) == 0
    assert _run(["cv-curve", str(events), "--window", "0", "1",
                 "--replicates", "12", "--kmax", "5", "--seed", "2",
                 "-o", str(curve)]) == 0
    lines = curve.read_text().splitlines()
    assert lines[0] == "k,mean,stderr,count"
    assert len(lines) == 6
    ks = [int(line.split(",")[0]) for line in lines[1:]]
    assert ks == [1, 2, 3, 4, 5]
    counts = [int(line.split(",")[3]) for line in lines[1:]]
    assert all(0 <= c <= 12 for c in counts)


def test_cli_bench_small_grid(tmp_path):
    out1 = tmp_path / "bench1.csv"
    out2 = tmp_path / "bench2.csv"
    argv = ["bench", "--preset", "k-selection", "--means", "40", "--ratios", "4",
            "--samples", "2", "--replicates", "8", "--kmax", "6", "--seed", "0"]
    assert _run(argv + ["-o", str(out1)]) == 0
    assert _run(argv + ["--threads", "2", "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2
    row = dict(zip(CSV_COLUMNS, lines[1].split(",")))
    assert row["preset"] == "k-selection"
    assert row["k_true"] == "6"
    assert row["samples"] == "2"
    assert row["rho_odd"] == "-"
    assert 1.0 <= float(row["k_hat_mean"]) <= 6.0


def test_cli_seed_env_fallback(tmp_path, monkeypatch):
    events = tmp_path / "events.csv"
    result = tmp_path / "result.txt"
    assert _run(["simulate", "--design", "30,2", "--seed", "0", "-o", str(events)]) == 0
    monkeypatch.setenv("CPT_SEED", "123")
    assert _run(["segment", str(events), "--replicates", "10", "--kmax", "3",
                 "-o", str(result)]) == 0
    assert parse_result(result.read_text()).seed == 123
    # an explicit flag wins over the environment
    assert _run(["segment", str(events), "--replicates", "10", "--kmax", "3",
                 "--seed", "7", "-o", str(result)]) == 0
    assert parse_result(result.read_text()).seed == 7


def test_cli_rejects_bad_env_seed(tmp_path, monkeypatch, capsys):
    events = tmp_path / "events.csv"
    assert _run(["simulate", "--design", "30,2", "--seed", "0", "-o", str(events)]) == 0
    monkeypatch.setenv("CPT_SEED", "not-a-seed")
    assert _run(["segment", str(events), "--replicates", "5", "--kmax", "2",
                 "-o", "-"]) == 2
    assert "CPT_SEED must be an integer" in capsys.readouterr().err


def test_cli_error_paths(tmp_path, capsys):
    events = tmp_path / "events.csv"
    empty = tmp_path / "empty.csv"
    empty.write_text("time\n")
    assert _run(["simulate", "--design", "40,2", "--seed", "0", "-o", str(events)]) == 0

    assert _run(["segment", str(empty), "-o", "-"]) == 2
    assert "pass one explicitly" in capsys.readouterr().err

    assert _run(["segment", str(empty), "--window", "0", "1", "-o", "-"]) == 2
    assert "nothing to segment" in capsys.readouterr().err

    assert _run(["segment", str(events), "--contrast", "poisson", "-o", "-"]) == 2
    assert "use --k" in capsys.readouterr().err

    assert _run(["simulate", "--design", "40,2,3", "--seed", "0", "-o", "-"]) == 2
    assert "comma-separated" in capsys.readouterr().err

    table = tmp_path / "truth.csv"
    table.write_text("start,end,rate\n0.0,1.0,30.0\n")
    assert _run(["simulate", "--intensity-file", str(table), "--marks", "0.1",
                 "-o", "-"]) == 2
    assert "mark_rate column" in capsys.readouterr().err

    single = tmp_path / "single.csv"
    single.write_text("time\n0.5\n")
    assert _run(["segment", str(single), "--window", "0", "1", "--k", "5",
                 "-o", "-"]) == 2
    assert "exceeds the candidate grid" in capsys.readouterr().err
