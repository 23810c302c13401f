"""Config parsing, problem assembly from configs, and the batch CLI."""

import numpy as np
import pytest

from phsplit import ParseError, ValidationError
from phsplit.cli import main, run_experiment
from phsplit.config import build_problem, dump_config, parse_config
from phsplit.iteration import REPORT_COLUMNS, run
from phsplit.report import CellResult, cell_tag, emit_summary

SCALAR_TOML = """
model = "scalar_demo"
T = 2.0
N_t = 20
lambda = [1.0]
omega = [0.25]
max_iter = 2000
"""


def test_parse_minimal_defaults():
    cfg = parse_config("")
    assert cfg.model == "wave_heat"
    assert (cfg.T, cfg.N_t) == (2.0, 200)
    assert cfg.lambdas == (1.0,)
    assert cfg.omegas == (0.25,)  # 1/(2T) for the default horizon
    assert cfg.tol_update == 1e-10
    assert cfg.max_iter == 500
    assert cfg.out_dir == "results"
    assert cfg.seed == 0
    assert cfg.model_params["wave"]["n_cells"] == 16
    assert cfg.model_params["heat"]["n_nodes"] == 16
    assert cfg.input_params["kind"] == "zero"


@pytest.mark.parametrize(
    "text,field",
    [
        ("lambda = [-1.0]", "lambda"),
        ("lambda = []", "lambda"),
        ("omega = [-0.5]", "omega"),
        ("T = 0.0", "T"),
        ("N_t = 0", "N_t"),
        ('T = "two"', "T"),
        ("N_t = true", "N_t"),
        ("max_iter = 0", "max_iter"),
        ("tol_update = 0.0", "tol_update"),
        ("seed = -1", "seed"),
        ('model = "spectral"', "model"),
        ("unknown_key = 1", "unknown_key"),
        ("[wave]\nn_smells = 4", "wave.n_smells"),
        ('model = "scalar_demo"\n[wave]\nn_cells = 4', "wave"),
        ('[input]\nkind = "ramp"', "input.kind"),
        ('model = "custom"', "custom.path"),
        ('[wave]\nexternal_mode = "sideways"', "wave.external_mode"),
    ],
)
def test_parse_rejects(text, field):
    with pytest.raises(ValidationError) as info:
        parse_config(text)
    assert field in str(info.value)


def test_parse_error_for_bad_toml():
    with pytest.raises(ParseError):
        parse_config("model = ")


def test_dump_parse_round_trip():
    cfg = parse_config(
        """
model = "lshape"
T = 1.0
N_t = 100
lambda = [0.1, 1.0, 10.0]
omega = [0.0, 0.5]
seed = 7
[lshape]
refine = 2
damping = 0.25
[input]
kind = "sine"
amplitude = 2.0
frequency = 0.5
"""
    )
    assert parse_config(dump_config(cfg)) == cfg
    assert parse_config(dump_config(parse_config(""))) == parse_config("")


def test_build_problem_dims():
    wave_heat = build_problem(parse_config(""))
    assert wave_heat.node.n == 65
    assert wave_heat.grid.N_t == 200

    lshape = build_problem(parse_config('model = "lshape"\nT = 1.0\nN_t = 100'))
    assert lshape.node.n == 156
    assert (lshape.node.m_ext, lshape.node.m_int) == (4, 8)

    scalar = build_problem(parse_config(SCALAR_TOML))
    assert scalar.node.n == 1
    assert scalar.grid.tau == pytest.approx(0.1)


def test_build_problem_sine_input():
    cfg = parse_config(
        """
model = "wave_heat"
T = 1.0
N_t = 8
[wave]
external_mode = "force_in_velocity_out"
[input]
kind = "sine"
amplitude = 2.0
frequency = 0.5
"""
    )
    problem = build_problem(cfg)
    assert problem.node.m_ext == 1
    t_mid = problem.grid.midpoint_times
    expected = 2.0 * np.sin(2.0 * np.pi * 0.5 * t_mid)
    assert np.allclose(problem.u_ext.values[:, 0], expected, atol=1e-15)


def test_custom_model_npz(tmp_path):
    path = tmp_path / "scalar.npz"
    np.savez(
        path,
        A=[[-1.0]],
        B_ext=np.zeros((1, 0)),
        B_int=[[1.0]],
        C_ext=np.zeros((0, 1)),
        C_int=[[1.0]],
        H=[[1.0]],
        N_c=[[-1.0]],
        x0=[1.0],
    )
    cfg = parse_config(f'model = "custom"\n[custom]\npath = "{path}"')
    problem = build_problem(cfg)
    assert problem.node.n == 1
    assert problem.x0[0] == 1.0

    incomplete = tmp_path / "incomplete.npz"
    np.savez(incomplete, A=[[-1.0]], H=[[1.0]])
    cfg = parse_config(f'model = "custom"\n[custom]\npath = "{incomplete}"')
    with pytest.raises(ValidationError):
        build_problem(cfg)


def test_cli_check_ok(tmp_path, capsys):
    path = tmp_path / "scalar.toml"
    path.write_text(SCALAR_TOML, encoding="utf-8")
    assert main(["check", str(path)]) == 0
    out = capsys.readouterr().out
    assert "check: ok" in out
    assert "assembly: ok" in out
    assert "resolvent round-trip" in out


def test_cli_run_writes_artifacts(tmp_path, capsys):
    path = tmp_path / "scalar.toml"
    path.write_text(SCALAR_TOML + f'out_dir = "{tmp_path / "res"}"\n', encoding="utf-8")
    assert main(["run", str(path)]) == 0
    out = capsys.readouterr().out
    assert "run: ok" in out

    res = tmp_path / "res"
    tag = cell_tag(1.0, 0.25)
    assert tag == "lam1_om0.25"
    for name in (
        "config.toml",
        "reference_x.csv",
        "reference_u.csv",
        f"report_{tag}.csv",
        f"final_x_{tag}.csv",
        f"final_u_{tag}.csv",
        f"fig_{tag}.png",
        "overview.png",
        "summary.txt",
    ):
        assert (res / name).exists(), name

    header = (res / f"report_{tag}.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == ",".join(REPORT_COLUMNS)
    summary = (res / "summary.txt").read_text(encoding="utf-8")
    assert "converged" in summary
    assert "true" in summary  # the all-checks column


def test_cli_run_deterministic(tmp_path):
    outputs = []
    for sub in ("a", "b"):
        path = tmp_path / f"{sub}.toml"
        path.write_text(
            SCALAR_TOML + f'out_dir = "{tmp_path / sub}"\n', encoding="utf-8"
        )
        assert main(["run", str(path)]) == 0
        tag = cell_tag(1.0, 0.25)
        outputs.append(
            tuple(
                (tmp_path / sub / name).read_bytes()
                for name in (
                    f"report_{tag}.csv",
                    "reference_x.csv",
                    f"final_x_{tag}.csv",
                    "summary.txt",
                )
            )
        )
    assert outputs[0] == outputs[1]


def test_cli_out_override(tmp_path, capsys):
    path = tmp_path / "scalar.toml"
    path.write_text(SCALAR_TOML, encoding="utf-8")
    dest = tmp_path / "elsewhere"
    assert main(["run", str(path), "--out", str(dest)]) == 0
    capsys.readouterr()
    assert (dest / "summary.txt").exists()


def test_cli_bad_inputs(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.toml")]) == 1
    assert "config not found" in capsys.readouterr().err

    bad = tmp_path / "bad.toml"
    bad.write_text("model = 3\n", encoding="utf-8")
    assert main(["check", str(bad)]) == 1
    assert "bad config" in capsys.readouterr().err


def test_cli_check_rejects_bad_custom_node(tmp_path, capsys):
    path = tmp_path / "bad.npz"
    np.savez(
        path,
        A=[[1.0]],  # energy grows: certificate must fail at assembly
        B_ext=np.zeros((1, 0)),
        B_int=[[1.0]],
        C_ext=np.zeros((0, 1)),
        C_int=[[1.0]],
        H=[[1.0]],
        N_c=[[-1.0]],
    )
    cfg = tmp_path / "bad.toml"
    cfg.write_text(f'model = "custom"\n[custom]\npath = "{path}"\n', encoding="utf-8")
    assert main(["check", str(cfg)]) == 1
    assert "assembly: FAIL" in capsys.readouterr().out


def test_emit_summary_empty_and_error_rows():
    text = emit_summary([])
    lines = text.splitlines()
    assert len(lines) == 1
    assert lines[0].split() == [
        "lambda", "omega", "status", "iters", "dwz_l2", "dxu_l2", "sup_err",
        "yext_err", "epsilon", "w_monotone", "w_domination", "w_b", "w_c",
        "w_psop", "ok",
    ]

    text = emit_summary([CellResult(1.0, 0.25, error="RuntimeError: boom")])
    assert "error" in text
    assert "RuntimeError: boom" in text


def test_summary_row_matches_report():
    from phsplit.models import build_scalar_demo
    from phsplit.trajectory import TimeGrid

    problem = build_scalar_demo(TimeGrid(2.0, 20))
    rep = run(problem, lam=1.0, omega=0.25, max_iter=2000)
    line = emit_summary([CellResult(1.0, 0.25, report=rep)]).splitlines()[1]
    assert "converged" in line
    assert str(rep.iterations) in line
    assert f"{rep.final_row().dwz_l2:.6e}" in line
    assert f"{rep.worst_slack('monotone'):.6e}" in line
    assert f"{rep.worst_slack('c'):.6e}" in line
    assert line.rstrip().endswith("true")
