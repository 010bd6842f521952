from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np
import pytest

from lineint.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, build_parser, main
from lineint.config import load_config, parse_config
from lineint.errors import ConfigurationError

ZERO_STEPS = """
[problem]
name = "kepler"
eps = 0.6

[method]
name = "lim"
r = 8
k = 2
s = 2

[mode]
kind = "fixed"
h = 0.01
n_steps = 0
"""

SHORT_RUN = """
outputs = ["invariants", "trajectory", "step_sizes"]

[problem]
name = "lotka_volterra"

[method]
name = "hbvm"
k = 4
s = 2

[mode]
kind = "fixed"
h = 0.05
n_steps = 40
sample_every = 4
"""


def _write(tmp_path: Path, text: str, name: str = "run.toml") -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def _cli(*argv: str | Path) -> int:
    return main(["--quiet", *map(str, argv)])


# ----------------------------------------------------------------------
# Tables
# ----------------------------------------------------------------------


def test_blended_table(capsys: pytest.CaptureFixture[str]) -> None:
    assert _cli("blended-table", "--s-max", "7") == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 8
    assert lines[1].split() == ["1", "0.5000", "0.0000", "0.0000"]
    assert lines[2].split() == ["2", "0.2887", "0.1340", "0.0774"]
    assert lines[7].split() == ["7", "0.0827", "0.5561", "0.0919"]


@pytest.mark.parametrize(
    ("argv", "quiet"),
    [
        (["--quiet", "blended-table"], True),
        (["blended-table", "--quiet"], True),
        (["tableau", "--quiet", "gauss", "2"], True),
        (["run", "--config", "run.toml", "--quiet"], True),
        (["blended-table"], False),
    ],
)
def test_quiet_before_or_after_the_subcommand(argv: list[str], quiet: bool) -> None:
    assert build_parser().parse_args(argv).quiet is quiet


def test_quiet_after_the_subcommand_runs(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["blended-table", "--s-max", "3", "--quiet"]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 4


def test_blended_table_limit() -> None:
    assert _cli("blended-table", "--s-max", "17") == EXIT_CONFIG


def _section(out: str, label: str) -> list[list[float]]:
    lines = out.splitlines()
    start = lines.index(label) + 1
    rows = []
    for line in lines[start:]:
        if ":" in line:
            break
        rows.append([float(v) for v in line.split()])
    return rows


def test_gauss_tableau(capsys: pytest.CaptureFixture[str]) -> None:
    assert _cli("tableau", "hbvm", "2", "2") == EXIT_OK
    out = capsys.readouterr().out
    r = math.sqrt(3.0) / 6.0
    np.testing.assert_allclose(_section(out, "c:")[0], [0.5 - r, 0.5 + r], atol=1e-15)
    np.testing.assert_allclose(_section(out, "A:"), [[0.25, 0.25 - r], [0.25 + r, 0.25]], atol=1e-15)
    np.testing.assert_allclose(_section(out, "b:")[0], [0.5, 0.5], atol=1e-15)
    assert "rank(A): 2" in out


def test_trapezoidal_tableau(capsys: pytest.CaptureFixture[str]) -> None:
    assert _cli("tableau", "trapezoidal", "3") == EXIT_OK
    out = capsys.readouterr().out
    np.testing.assert_allclose(_section(out, "b:")[0], [1 / 6, 4 / 6, 1 / 6], atol=1e-15)
    assert "rank(A): 1" in out


@pytest.mark.parametrize("words", [["hbvm", "1", "2"], ["hbvm", "2"], ["radau", "3"], ["gauss", "two"]])
def test_tableau_errors(words: list[str]) -> None:
    assert _cli("tableau", *words) == EXIT_CONFIG


# ----------------------------------------------------------------------
# Runs
# ----------------------------------------------------------------------


def test_zero_step_run(tmp_path: Path) -> None:
    out = tmp_path / "out"
    assert _cli("run", "--config", _write(tmp_path, ZERO_STEPS), "--out", out) == EXIT_OK
    assert (out / "invariants.csv").read_bytes() == b"t,dH,dL,dF\n0,0,0,0\n"
    assert (out / "effective_config.json").exists()


def test_run_writes_requested_series(tmp_path: Path) -> None:
    out = tmp_path / "out"
    assert _cli("run", "--config", _write(tmp_path, SHORT_RUN), "--out", out) == EXIT_OK
    header, rows = _read_csv(out / "invariants.csv")
    assert header == ["t", "dH", "dC"]
    assert rows.shape == (11, 3)
    assert np.max(np.abs(rows[:, 1:])) < 1e-3
    header, rows = _read_csv(out / "trajectory.csv")
    assert header == ["t", "y0", "y1", "y2"]
    np.testing.assert_array_equal(rows[0, 1:], [1.0, 1.9, 0.5])
    assert rows.shape == (11, 4)
    header, rows = _read_csv(out / "step_sizes.csv")
    assert header == ["step", "h"]
    assert rows.shape == (40, 2)
    assert not (out / "per_period_error.csv").exists()


def test_rerun_is_byte_identical(tmp_path: Path) -> None:
    config = _write(tmp_path, SHORT_RUN)
    assert _cli("run", "--config", config, "--out", tmp_path / "a") == EXIT_OK
    assert _cli("run", "--config", config, "--out", tmp_path / "b") == EXIT_OK
    for name in ("invariants.csv", "trajectory.csv", "step_sizes.csv", "effective_config.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_effective_config_round_trip(tmp_path: Path) -> None:
    config = _write(tmp_path, SHORT_RUN)
    assert _cli("run", "--config", config, "--out", tmp_path / "a") == EXIT_OK
    effective = tmp_path / "a" / "effective_config.json"
    assert load_config(effective) == load_config(config)
    assert _cli("run", "--config", effective, "--out", tmp_path / "b") == EXIT_OK
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_adaptive_run_with_period_checkpoints(tmp_path: Path) -> None:
    text = """
outputs = ["per_period_error", "step_sizes"]

[problem]
name = "kepler"

[mode]
kind = "adaptive"
tol = 1e-8
t_end = 12.566370614359172
"""
    out = tmp_path / "out"
    assert _cli("run", "--config", _write(tmp_path, text), "--out", out) == EXIT_OK
    header, rows = _read_csv(out / "per_period_error.csv")
    assert header == ["period", "t", "error"]
    assert rows.shape == (3, 3)
    assert rows[0, 2] == 0.0
    assert np.all(np.isfinite(rows[:, 2]))
    assert np.all(rows[1:, 2] < 1e-3)


def test_numerical_failure_exit_code(tmp_path: Path) -> None:
    text = """
[solver]
kind = "fixed_point"
max_outer = 2

[mode]
kind = "fixed"
h = 0.1
n_steps = 10
"""
    out = tmp_path / "out"
    assert _cli("run", "--config", _write(tmp_path, text), "--out", out) == EXIT_NUMERICAL
    _, rows = _read_csv(out / "invariants.csv")
    assert rows.shape == (1, 4)


@pytest.mark.parametrize(
    "text",
    [
        'colour = "blue"\n',
        '[problem]\nname = "kepler"\neps = 1.2\n',
        '[problem]\nname = "pendulum"\n',
        '[method]\nname = "hbvm"\nk = 1\ns = 2\n',
        'enforce = ["energy"]\n',
        'outputs = ["invariants", "invariants"]\n',
        'outputs = ["per_period_error"]\n[problem]\nname = "poly_hamiltonian"\n',
        "[mode\n",
    ],
    ids=["unknown-key", "eccentricity", "problem", "k-below-s", "enforce", "duplicate", "no-period", "syntax"],
)
def test_configuration_errors(text: str, tmp_path: Path) -> None:
    assert _cli("run", "--config", _write(tmp_path, text), "--out", tmp_path / "out") == EXIT_CONFIG


def test_missing_config(tmp_path: Path) -> None:
    assert _cli("run", "--config", tmp_path / "absent.toml") == EXIT_CONFIG


def test_json_config(tmp_path: Path) -> None:
    path = _write(tmp_path, '{"method": {"name": "gauss", "s": 3}, "mode": {"kind": "fixed", "h": 0.1, "n_steps": 2}}', "run.json")
    config = load_config(path)
    assert config.method.build().name == "gauss(3)"
    assert config.mode.n_steps == 2


def test_parse_config_defaults() -> None:
    config = parse_config({})
    assert config.problem.name == "kepler"
    assert config.outputs == ["invariants"]
    assert config.benchmark().invariants.enforced_count == 3
    masked = parse_config({"enforce": ["H"]}).benchmark().invariants
    np.testing.assert_array_equal(masked.enforce_mask, [True, False, False])
    with pytest.raises(ConfigurationError):
        parse_config({"mode": {"kind": "fixed", "h": -1.0, "n_steps": 1}})


# ----------------------------------------------------------------------
# Studies
# ----------------------------------------------------------------------


def test_stability_csv(tmp_path: Path) -> None:
    text = """
[method]
name = "lim"
r = 8
k = 8
s = 3

[stability]
re_min = -5.0
re_max = 0.0
im_min = -2.0
im_max = 2.0
points = 5
"""
    out = tmp_path / "out"
    assert _cli("stability", "--config", _write(tmp_path, text), "--out", out) == EXIT_OK
    header, rows = _read_csv(out / "stability.csv")
    assert header == ["re_q", "im_q", "abs_R"]
    assert rows.shape == (25, 3)
    left = rows[:, 0] < 0
    assert np.all(rows[left, 2] < 1.0)
    np.testing.assert_allclose(rows[~left, 2], 1.0, atol=1e-12)


def test_symmetry_csv(tmp_path: Path) -> None:
    text = """
[method]
name = "lim"
r = 4
k = 4
s = 2

[symmetry]
h = [0.01, 0.02]
"""
    out = tmp_path / "out"
    assert _cli("symmetry", "--config", _write(tmp_path, text), "--out", out) == EXIT_OK
    header, rows = _read_csv(out / "symmetry.csv")
    assert header == ["h", "defect"]
    np.testing.assert_array_equal(rows[:, 0], [0.01, 0.02])
    assert np.all(rows[:, 1] <= 1e-10)


@pytest.mark.slow
def test_convergence_csv(tmp_path: Path) -> None:
    text = """
[method]
name = "hbvm"
k = 4
s = 2
"""
    out = tmp_path / "out"
    assert _cli("convergence", "--config", _write(tmp_path, text), "--out", out) == EXIT_OK
    header, rows = _read_csv(out / "convergence.csv")
    assert header == ["h", "error", "slope"]
    assert np.isnan(rows[0, 2])
    assert 3.8 <= rows[-1, 2] <= 4.2


@pytest.mark.slow
def test_hbvm_ten_kepler_periods(tmp_path: Path) -> None:
    text = f"""
[method]
name = "hbvm"
k = 8
s = 2

[mode]
kind = "fixed"
h = {0.01 * 2 * math.pi!r}
n_steps = 1000
sample_every = 10
"""
    out = tmp_path / "out"
    assert _cli("run", "--config", _write(tmp_path, text), "--out", out) == EXIT_OK
    _, rows = _read_csv(out / "invariants.csv")
    assert np.max(np.abs(rows[:, 1])) <= 1e-10
