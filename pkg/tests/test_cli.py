import csv
import json

import pytest

from msgfem.cli import build_parser, config_from_args, main

SMALL = ["--cells", "48", "--subdomains", "4", "--n", "3", "--contrast", "1e4"]


def _run(tmp_path, *args):
    assert main([*args, "--out", str(tmp_path)]) == 0


def test_solve_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _run(a, "solve", *SMALL)
    _run(b, "solve", *SMALL)
    for name in ("solution_full.csv", "solution_ring.csv", "errors.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_solve_outputs(tmp_path):
    _run(tmp_path, "solve", *SMALL, "--variant", "ring", "--solver", "gmres")
    rows = list(csv.DictReader(open(tmp_path / "errors.csv")))
    assert [r["variant"] for r in rows] == ["ring"]
    assert list(rows[0]) == ["variant", "n", "ell", "coarse_dim", "err"]
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["ring"]["converged"] and report["ring"]["err_iterative"] < 1e-6
    assert not (tmp_path / "solution_full.csv").exists()
    manifest = json.loads((tmp_path / "manifest_solve.json").read_text())
    assert manifest["package"] == "msgfem" and manifest["config"]["variants"] == ["ring"]
    assert (tmp_path / "config_solve.toml").exists()


def test_decay_and_spectrum_headers(tmp_path):
    _run(tmp_path, "decay", *SMALL, "--sweep", "n", "--n-values", "1,2")
    header = (tmp_path / "decay_n.csv").read_text().splitlines()[0]
    assert header == "variant,n,ell,coarse_dim,err"
    _run(tmp_path, "spectrum", *SMALL, "--coefficient", "skyscraper", "--spectrum-subdomains", "5", "--spectrum-count", "3")
    assert (tmp_path / "spectrum.csv").read_text().startswith("subdomain,variant,k,lambda,inv_lambda\n")


def test_iterate_writes_one_table_per_variant_and_solver(tmp_path):
    _run(
        tmp_path, "iterate", *SMALL, "--coefficient", "skyscraper", "--contrast-exponents", "0",
        "--n-values", "2,3", "--solvers", "richardson,gmres",
    )
    names = {p.name for p in tmp_path.glob("iterations_*.csv")}
    assert names == {f"iterations_{v}_{s}.csv" for v in ("full", "ring") for s in ("richardson", "gmres")}


def test_bench_fillin_small(tmp_path):
    _run(tmp_path, "bench-fillin", "--timing-m", "7", "--timing-ell", "1", "--repeats", "3")
    rows = list(csv.reader(open(tmp_path / "timing_fillin.csv")))
    assert rows[0] == ["m", "ell", "variant", "mean_seconds", "repeats", "nnz_per_row", "saddle_size"]
    assert [r[2] for r in rows[1:]] == ["full", "ring"]


def test_precedence_defaults_file_flags(tmp_path):
    (tmp_path / "c.toml").write_text("cells = 80\nell = 3\n")
    args = build_parser().parse_args(["iterate", "--config", str(tmp_path / "c.toml"), "--ell", "4"])
    cfg = config_from_args(args)
    assert cfg.coefficient == "channel"  # command default
    assert cfg.cells == 80  # file beats command default
    assert cfg.ell == 4  # flag beats file
    assert cfg.experiment == "iteration_table"


@pytest.mark.parametrize(
    "content,flags",
    [("cells = -1\n", []), ("bogus = 1\n", []), ("cells = 8\n", ["--solvers", "cg"])],
)
def test_bad_configuration_exits_2(tmp_path, capsys, content, flags):
    (tmp_path / "c.toml").write_text(content)
    cmd = "iterate" if flags else "solve"
    assert main([cmd, "--config", str(tmp_path / "c.toml"), "--out", str(tmp_path), *flags]) == 2
    assert "msgfem: error" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.toml")]) == 2
