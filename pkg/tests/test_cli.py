import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from binsampling.cli import main


@pytest.fixture
def weights_file(tmp_path):
    p = tmp_path / "w.txt"
    p.write_text("# dyadic\n0.5\n0.25\n0.125\n0.125\n")
    return p


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def body_lines(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def header(text):
    meta = {}
    for line in text.splitlines():
        if line.startswith("# "):
            k, v = line[2:].split(": ", 1)
            meta[k] = json.loads(v)
    return meta


def test_sample_deterministic(weights_file, capsys):
    argv = ["sample", "--sampler", "bs", "--seed", 42, "--count", 5, "--input", weights_file]
    c1, out1, _ = run(argv, capsys)
    c2, out2, _ = run(argv, capsys)
    assert c1 == c2 == 0
    assert out1 == out2
    assert len(body_lines(out1)) == 5
    meta = header(out1)
    for key in ("version", "seed", "sampler", "N", "d", "input_sha256", "generator"):
        assert key in meta
    assert meta["N"] == 3 and meta["d"] == 2 and meta["seed"] == 42


def test_sample_count_one_reports_tree_build(weights_file, capsys):
    code, out, _ = run(["sample", "--count", 1, "--input", weights_file], capsys)
    meta = header(out)
    assert code == 0
    assert meta["tree_built"] is True and meta["bbs_samples"] == 1 and meta["fbs_samples"] == 0
    assert len(body_lines(out)) == 1


@pytest.mark.parametrize("sampler", ["its_forward", "its_backward", "bsits"])
def test_sample_other_engines(weights_file, capsys, sampler):
    code, out, _ = run(["sample", "--sampler", sampler, "--count", 20, "--input", weights_file], capsys)
    assert code == 0
    assert all(0 <= int(x) <= 3 for x in body_lines(out))


def test_sample_json_and_csv(weights_file, capsys):
    _, out, _ = run(["sample", "--count", 4, "--format", "json", "--input", weights_file], capsys)
    doc = json.loads(out)
    assert len(doc["samples"]) == 4 and doc["metadata"]["sampler"] == "bs"
    _, out, _ = run(["sample", "--count", 4, "--format", "csv", "--input", weights_file], capsys)
    rows = list(csv.reader(io.StringIO("\n".join(body_lines(out)))))
    assert rows[0] == ["sample"] and len(rows) == 5


def test_sample_with_shape(tmp_path, capsys):
    w = tmp_path / "w.txt"
    w.write_text("\n".join(["1"] * 6) + "\n")
    code, out, _ = run(
        ["sample", "--count", 10, "--input", w, "--shape", '{"extents": [2, 3], "support": "all"}'], capsys
    )
    assert code == 0
    for line in body_lines(out):
        m1, m2 = map(int, line.split(","))
        assert 0 <= m1 < 2 and 0 <= m2 < 3


def test_sample_explicit_set_flag(weights_file, capsys):
    argv = ["sample", "--count", 3, "--seed", 9, "--input", weights_file]
    _, plain, _ = run(argv, capsys)
    code, explicit, _ = run(argv + ["--explicit-set"], capsys)
    assert code == 0
    assert body_lines(plain) == body_lines(explicit)
    assert header(explicit)["candidate_set_sizes"][-1] == 1


def test_sample_output_file(weights_file, tmp_path, capsys):
    out = tmp_path / "out.txt"
    code, stdout, _ = run(["sample", "--count", 3, "--input", weights_file, "--output", out], capsys)
    assert code == 0 and stdout == ""
    assert len(body_lines(out.read_text())) == 3


@pytest.mark.parametrize(
    "content, code",
    [("-1\n2\n", 4), ("abc\n", 4), ("0\n0\n", 4)],
)
def test_sample_bad_input(tmp_path, capsys, content, code):
    p = tmp_path / "bad.txt"
    p.write_text(content)
    got, out, err = run(["sample", "--input", p], capsys)
    assert got == code and out == "" and "error" in err


def test_sample_missing_file(tmp_path, capsys):
    got, out, _ = run(["sample", "--input", tmp_path / "nope.txt"], capsys)
    assert got == 3 and out == ""


def test_sample_usage_errors(weights_file, capsys):
    assert run(["sample", "--count", 0, "--input", weights_file], capsys)[0] == 2
    assert run(["sample", "--sampler", "alias", "--input", weights_file], capsys)[0] == 2
    assert run(["sample"], capsys)[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 2


def test_bench_bs_steps_equal_depth(capsys):
    code, out, _ = run(["bench", "--sampler", "bs", "--sweep", "2^10,2^14,2^18", "--count", 2000], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("\n".join(body_lines(out)))))
    assert [r["comparisons_or_steps"] for r in rows] == ["10.0", "14.0", "18.0"]
    assert [r["N"] for r in rows] == ["1023", "16383", "262143"]
    assert list(rows[0]) == ["N", "sampler", "build_time", "per_sample_time", "comparisons_or_steps"]


def test_bench_its_forward_binomial_half(capsys):
    code, out, _ = run(
        ["bench", "--sampler", "its_forward", "--dist", "binomial", "--gamma", 0.5, "--sweep", "100,400",
         "--count", 50_000],
        capsys,
    )
    rows = list(csv.DictReader(io.StringIO("\n".join(body_lines(out)))))
    for r in rows:
        n = int(r["N"])
        assert float(r["comparisons_or_steps"]) == pytest.approx(n / 2 + 1, rel=0.02)


def test_bench_bsits_depth_bound(capsys):
    _, out, _ = run(["bench", "--sampler", "bsits", "--sweep", "1000,5000", "--count", 5000], capsys)
    rows = list(csv.DictReader(io.StringIO("\n".join(body_lines(out)))))
    for r in rows:
        n = int(r["N"])
        assert float(r["comparisons_or_steps"]) <= np.ceil(np.log2(2 * n + 1))


def test_bench_all_samplers(capsys):
    code, out, _ = run(["bench", "--sampler", "all", "--sweep", "100", "--count", 1000, "--format", "json"], capsys)
    doc = json.loads(out)
    assert code == 0 and {r["sampler"] for r in doc["rows"]} == {"bs", "its_forward", "its_backward", "bsits"}


def test_error_rows_and_determinism(capsys):
    argv = ["error", "--sweep", "65536", "--trials", 100, "--seed", 3]
    code, out, _ = run(argv, capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("\n".join(body_lines(out)))))
    assert len(rows) == 200
    pw = np.median([float(r["relative_error"]) for r in rows if r["method"] == "pairwise"])
    sq = np.median([float(r["relative_error"]) for r in rows if r["method"] == "sequential"])
    assert pw < sq
    assert run(argv, capsys)[1] == out


def test_error_n2_equal(capsys):
    _, out, _ = run(["error", "--sweep", "2", "--trials", 5], capsys)
    rows = list(csv.DictReader(io.StringIO("\n".join(body_lines(out)))))
    by_trial = {}
    for r in rows:
        by_trial.setdefault(r["trial"], set()).add(r["relative_error"])
    assert all(len(v) == 1 for v in by_trial.values())


def test_error_non_power_of_two(capsys):
    assert run(["error", "--sweep", "1000"], capsys)[0] == 2


def test_gof_pass(capsys):
    code, out, _ = run(["gof", "--sampler", "bs", "--dist", "uniform", "--n", 9, "--count", 100_000], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and doc["metadata"]["N"] == 9


def test_gof_stub_fails(capsys):
    code, out, _ = run(["gof", "--sampler", "zero", "--dist", "uniform", "--n", 9, "--count", 100_000], capsys)
    assert code == 1 and json.loads(out)["passed"] is False


def test_gof_bsits_zipf(capsys):
    code, _, _ = run(["gof", "--sampler", "bsits", "--dist", "zipf", "--n", 100, "--count", 100_000], capsys)
    assert code == 0


def test_gof_precondition_usage(capsys):
    code, out, err = run(["gof", "--dist", "uniform", "--n", 999, "--count", 1000], capsys)
    assert code == 2 and "50000" in err and out == ""


def test_multidim_command(tmp_path, capsys):
    desc = tmp_path / "d.json"
    desc.write_text(json.dumps({"extents": [2, 2], "support": [[0, 0], [1, 1]], "tail_bound": 0.5,
                                "weights": [1, 1, 1, 1]}))
    code, out, _ = run(["multidim", "--shape", desc, "--count", 50, "--seed", 1], capsys)
    assert code == 0
    meta = header(out)
    assert meta["kept_mass"] == 2.0 and meta["tv_bound"] == 0.5
    assert {tuple(map(int, l.split(","))) for l in body_lines(out)} <= {(0, 0), (1, 1)}


def test_multidim_weights_from_input(tmp_path, capsys):
    w = tmp_path / "w.txt"
    w.write_text("1\n2\n3\n4\n5\n6\n")
    code, out, _ = run(["multidim", "--shape", '{"extents": [3, 2]}', "--input", w, "--count", 5,
                        "--tail-bound", 0.1], capsys)
    assert code == 0 and header(out)["tail_bound_input"] == 0.1


def test_multidim_size_mismatch(tmp_path, capsys):
    w = tmp_path / "w.txt"
    w.write_text("1\n2\n")
    assert run(["multidim", "--shape", '{"extents": [3, 2]}', "--input", w], capsys)[0] == 4


def test_module_entry_point(weights_file):
    proc = subprocess.run(
        [sys.executable, "-m", "binsampling", "sample", "--count", "2", "--input", str(weights_file)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert len(body_lines(proc.stdout)) == 2
