import subprocess
import sys

import numpy as np
import pytest

from gramlin import read_matrix, write_matrix
from gramlin.cli import main

from helpers import correlated_shuffled, random_case


def parse_kv(out):
    pairs = {}
    for line in out.strip().splitlines():
        if " " in line and "=" in line.split(" ", 1)[0]:
            continue  # per-block multi-pair lines are checked separately
        if "=" in line:
            key, _, value = line.partition("=")
            pairs[key] = value
    return pairs


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def matrix_file(tmp_path, worked_matrix):
    path = tmp_path / "m.csv"
    write_matrix(path, worked_matrix)
    return path


@pytest.mark.parametrize("variant", ["csrv", "re32", "reiv", "reans"])
def test_compress_decompress_cycle(capsys, tmp_path, matrix_file, worked_matrix, variant):
    container = tmp_path / "m.grlm"
    code, out, _ = run_cli(
        capsys, "compress", str(matrix_file), str(container),
        "--variant", variant, "--blocks", "2",
    )
    assert code == 0
    pairs = parse_kv(out)
    assert pairs["n_rows"] == "6" and pairs["n_cols"] == "5"
    assert pairs["blocks"] == "2"
    assert int(pairs["bytes"]) == container.stat().st_size

    restored = tmp_path / "back.csv"
    code, out, _ = run_cli(capsys, "decompress", str(container), str(restored))
    assert code == 0
    assert np.array_equal(read_matrix(restored), worked_matrix)


def test_info_reports_blocks(capsys, tmp_path, matrix_file):
    container = tmp_path / "m.grlm"
    assert run_cli(
        capsys, "compress", str(matrix_file), str(container),
        "--variant", "reans", "--blocks", "3",
    )[0] == 0
    code, out, _ = run_cli(capsys, "info", str(container))
    assert code == 0
    pairs = parse_kv(out)
    assert pairs["variant"] == "re_ans"
    assert pairs["blocks"] == "3"
    block_lines = [l for l in out.splitlines() if l.startswith("block=")]
    assert len(block_lines) == 3
    assert all("rules=" in l and "payload_bytes=" in l for l in block_lines)


def test_compress_with_reordering(capsys, tmp_path, worked_matrix):
    rng = np.random.default_rng(121)
    mat = correlated_shuffled(rng, n_rows=400, n_cols=12)
    src = tmp_path / "m.csv"
    write_matrix(src, mat)
    plain = tmp_path / "plain.grlm"
    packed = tmp_path / "packed.grlm"
    assert run_cli(capsys, "compress", str(src), str(plain), "--variant", "reiv")[0] == 0
    code, out, _ = run_cli(
        capsys, "compress", str(src), str(packed),
        "--variant", "reiv", "--reorder", "best", "--k", "8",
    )
    assert code == 0
    pairs = parse_kv(out)
    assert pairs["reorder"] == "best"
    assert "reorder_block_0_chosen" in pairs
    assert packed.stat().st_size <= plain.stat().st_size
    restored = tmp_path / "back.csv"
    assert run_cli(capsys, "decompress", str(packed), str(restored))[0] == 0
    assert np.array_equal(read_matrix(restored), mat)


def test_csrv_reorder_is_skipped_with_note(capsys, tmp_path, matrix_file):
    container = tmp_path / "m.grlm"
    code, out, err = run_cli(
        capsys, "compress", str(matrix_file), str(container),
        "--variant", "csrv", "--reorder", "pathcover",
    )
    assert code == 0
    assert "reorder=skipped" in err


def test_reorder_command_reports_candidates(capsys, tmp_path):
    rng = np.random.default_rng(122)
    mat = random_case(rng, max_rows=30, max_cols=10, max_values=5)
    src = tmp_path / "m.csv"
    write_matrix(src, mat)
    code, out, _ = run_cli(capsys, "reorder", str(src), "--variant", "reans")
    assert code == 0
    lines = out.splitlines()
    for name in ("identity", "pathcover", "pathcover+", "mwm", "tsp"):
        assert any(f"algorithm={name} " in l for l in lines)
    chosen = [l for l in lines if "chosen=" in l]
    assert len(chosen) == 1


def test_reorder_rejects_csrv(capsys, tmp_path, matrix_file):
    code, _, err = run_cli(capsys, "reorder", str(matrix_file), "--variant", "csrv")
    assert code == 5
    assert "error:" in err


def test_bench_on_container_and_matrix(capsys, tmp_path, matrix_file):
    container = tmp_path / "m.grlm"
    run_cli(capsys, "compress", str(matrix_file), str(container), "--variant", "reiv")
    x_out = tmp_path / "x.f8"
    code, out, _ = run_cli(
        capsys, "bench", str(container), "--iters", "3", "--x-out", str(x_out)
    )
    assert code == 0
    pairs = parse_kv(out)
    assert pairs["completed"] == "3"
    assert pairs["variant"] == "re_iv"
    x = np.fromfile(x_out, dtype="<f8")
    assert x.shape == (5,)

    code, out, _ = run_cli(
        capsys, "bench", str(matrix_file), "--iters", "2", "--variant", "csrv", "--seed", "5"
    )
    assert code == 0
    assert parse_kv(out)["completed"] == "2"


def test_exit_codes(capsys, tmp_path, matrix_file):
    # 3: missing input file
    assert run_cli(capsys, "compress", str(tmp_path / "no.csv"), "x")[0] == 3
    # 4: not a container
    assert run_cli(capsys, "info", str(matrix_file))[0] == 4
    # 4: corrupt container
    bad = tmp_path / "bad.grlm"
    bad.write_bytes(b"GRLM" + b"\x00" * 10)
    assert run_cli(capsys, "info", str(bad))[0] == 4
    # 5: bad dimension argument
    assert run_cli(
        capsys, "compress", str(matrix_file), str(tmp_path / "o.grlm"), "--blocks", "0"
    )[0] == 5
    # 2: usage error from argparse
    with pytest.raises(SystemExit) as exc:
        main(["compress"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["explode"])
    assert exc.value.code == 2


def test_installed_entry_point(tmp_path, matrix_file):
    container = tmp_path / "m.grlm"
    proc = subprocess.run(
        [sys.executable, "-m", "gramlin.cli", "compress", str(matrix_file),
         str(container), "--variant", "reans"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert "variant=re_ans" in proc.stdout
    proc = subprocess.run(
        ["gramlin", "info", str(container)],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert "variant=re_ans" in proc.stdout
