"""Test the command-line front end."""

from __future__ import annotations

import json
import logging
from pathlib import Path

from pydantic import BaseModel, ValidationError as PydanticValidationError
import pytest

from nmr_bell.cli import (
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_IO,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    exit_code_for,
    main,
)
from nmr_bell.const import DOMAIN
from nmr_bell.sim import io
from nmr_bell.sim.exceptions import (
    ConfigError,
    ConvergenceError,
    StageError,
    ValidationError,
)
from nmr_bell.sim.qstate import DensityMatrix, state_fidelity

from .const import (
    MOCK_CONFIG,
    S_CONCURRENCE,
    S_NEGATIVITY_DOUBLED,
    T26_ON_S,
)


@pytest.fixture
def state_file(tmp_path: Path, s_density: DensityMatrix) -> Path:
    """Write |S⟩⟨S| to a state file."""
    path = tmp_path / "state.json"
    io.save_density(s_density, path)
    return path


def _json(path: Path) -> dict:
    return json.loads(path.read_text())


def test_prepare(tmp_path: Path, s_density: DensityMatrix) -> None:
    """Test prepare writes the circuit and the state."""
    assert main(["prepare", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "circuit.json").is_file()
    assert not (tmp_path / "pulse_sequence.json").exists()
    rho = io.load_density(tmp_path / "state.json")
    assert state_fidelity(s_density, rho) == pytest.approx(1.0)


def test_prepare_pulse(tmp_path: Path, s_density: DensityMatrix) -> None:
    """Test pulse-level preparation also writes the pulse sequence."""
    assert main(["prepare", "--source", "pulse", "--out", str(tmp_path)]) == EXIT_OK
    assert io.load_pulse_sequence(tmp_path / "pulse_sequence.json")
    rho = io.load_density(tmp_path / "state.json")
    assert state_fidelity(s_density, rho) == pytest.approx(1.0, abs=1e-7)


def test_entangle(tmp_path: Path, state_file: Path) -> None:
    """Test entangle reports both negativity conventions."""
    assert main(["entangle", "--state", str(state_file), "--out", str(tmp_path)]) == EXIT_OK
    payload = _json(tmp_path / "entanglement.json")
    assert payload["negativity"]["tripartite"] == pytest.approx(S_NEGATIVITY_DOUBLED)
    assert payload["negativity_plain"] == pytest.approx(S_NEGATIVITY_DOUBLED / 2)
    assert payload["concurrence"]["13"] == pytest.approx(S_CONCURRENCE, abs=1e-5)


def test_bell(tmp_path: Path, state_file: Path) -> None:
    """Test bell writes the value, bound and correlators."""
    assert main(["bell", "--state", str(state_file), "--out", str(tmp_path)]) == EXIT_OK
    payload = _json(tmp_path / "bell.json")
    assert payload["functional"] == "T26"
    assert payload["value"] == pytest.approx(T26_ON_S)
    assert payload["enumerated_bound"] == 5.0
    assert payload["violated"] is True
    assert len(payload["correlators"]) == 13
    assert all(len(s) == 6 for s in payload["argmax_strategies"])


def test_sweep_csv(tmp_path: Path, state_file: Path) -> None:
    """Test a short sweep written as CSV."""
    code = main(
        [
            "sweep",
            "--state",
            str(state_file),
            "--points",
            "5",
            "--format",
            "csv",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == EXIT_OK
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "# seed=none"
    assert lines[1] == "theta_rad,t26_value"
    assert len(lines) == 7


def test_sweep_json(tmp_path: Path, state_file: Path) -> None:
    """Test the sweep defaults to the A1 slot."""
    assert main(["sweep", "--state", str(state_file), "--out", str(tmp_path)]) == EXIT_OK
    payload = _json(tmp_path / "sweep.json")
    assert payload["slot"] == "A1"
    assert payload["max_value"] == pytest.approx(T26_ON_S)


def test_tomo(tmp_path: Path, state_file: Path) -> None:
    """Test noiseless tomography with CSV matrices."""
    args = ["tomo", "--state", str(state_file), "--format", "csv", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    result = _json(tmp_path / "reconstruction.json")
    assert result["converged"] is True
    assert len(io.load_records(tmp_path / "records.json")) == 7
    assert (tmp_path / "tomograph_real.csv").is_file()
    assert (tmp_path / "tomograph_imag.csv").is_file()


def test_tomo_noisy_seeded(tmp_path: Path, state_file: Path) -> None:
    """Test the seed is recorded with noisy readout."""
    args = ["tomo", "--state", str(state_file), "--sigma", "0.01", "--seed", "3"]
    assert main([*args, "--out", str(tmp_path)]) in (EXIT_OK, EXIT_NOT_CONVERGED)
    assert _json(tmp_path / "reconstruction.json")["seed"] == 3


def test_tomo_noise_without_seed(
    tmp_path: Path, state_file: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test noisy readout without a seed is a configuration error."""
    args = ["tomo", "--state", str(state_file), "--sigma", "0.01", "--out", str(tmp_path)]
    assert main(args) == EXIT_CONFIG
    assert "seed" in capsys.readouterr().err


def test_missing_state(tmp_path: Path) -> None:
    """Test a missing input file is an I/O failure."""
    args = ["bell", "--state", str(tmp_path / "absent.json"), "--out", str(tmp_path)]
    assert main(args) == EXIT_IO


def test_bad_config(tmp_path: Path) -> None:
    """Test an unknown config key exits with the configuration code."""
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"bogus": 1}))
    assert main(["pipeline", "--config", str(config), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_missing_config(tmp_path: Path) -> None:
    """Test an absent config file is an input error, not an I/O failure."""
    args = ["pipeline", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)]
    assert main(args) == EXIT_CONFIG


def test_two_qubit_state(tmp_path: Path) -> None:
    """Test a state of the wrong size is an input error."""
    path = tmp_path / "pair.json"
    io.save_density(DensityMatrix.maximally_mixed(4), path)
    for command in ("bell", "entangle", "tomo"):
        assert main([command, "--state", str(path), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_seed_in_outputs(tmp_path: Path) -> None:
    """Test --seed is stamped into every file the subcommands write."""
    common = ["--seed", "5", "--out", str(tmp_path)]
    assert main(["prepare", *common]) == EXIT_OK
    state = tmp_path / "state.json"
    assert _json(state)["seed"] == 5
    for command, name in (("entangle", "entanglement.json"), ("bell", "bell.json")):
        assert main([command, "--state", str(state), *common]) == EXIT_OK
        assert _json(tmp_path / name)["seed"] == 5
    sweep = ["sweep", "--state", str(state), "--points", "3", "--format", "csv", *common]
    assert main(sweep) == EXIT_OK
    assert (tmp_path / "sweep.csv").read_text().startswith("# seed=5\n")
    tomo = ["tomo", "--state", str(state), "--format", "csv", *common]
    assert main(tomo) == EXIT_OK
    for name in ("tomograph_real.csv", "tomograph_imag.csv"):
        assert (tmp_path / name).read_text().startswith("# seed=5\n")
    assert _json(tmp_path / "reconstruction.json")["seed"] == 5


def test_negative_seed_rejected() -> None:
    """Test argparse refuses a negative seed."""
    with pytest.raises(SystemExit) as err:
        main(["prepare", "--seed", "-1"])
    assert err.value.code == 2


@pytest.mark.slow
def test_grape(tmp_path: Path) -> None:
    """Test a short GRAPE run writes controls with its seed."""
    args = ["grape", "--segments", "4", "--max-iters", "3", "--seed", "11"]
    assert main([*args, "--out", str(tmp_path)]) in (EXIT_OK, EXIT_NOT_CONVERGED)
    lines = (tmp_path / "grape_controls.csv").read_text().splitlines()
    assert lines[0] == "# seed=11"
    assert _json(tmp_path / "grape.json")["gate"] == "cnot(1,2)"


def test_grape_same_qubits(tmp_path: Path) -> None:
    """Test control equal to target is rejected."""
    args = ["grape", "--control", "2", "--target", "2", "--out", str(tmp_path)]
    assert main(args) == EXIT_CONFIG


@pytest.mark.integration
def test_pipeline_with_diagnostics(tmp_path: Path) -> None:
    """Test the full pipeline writes report and diagnostics."""
    config = tmp_path / "run.json"
    config.write_text(json.dumps(MOCK_CONFIG))
    out = tmp_path / "out"
    code = main(["pipeline", "--config", str(config), "--out", str(out), "--diagnostics"])
    assert code == EXIT_OK
    report = _json(out / "report.json")
    assert report["bell"]["violated"] is True
    diagnostics = _json(out / "diagnostics.json")
    assert diagnostics["solver_health"]["tomography_converged"] is True
    assert diagnostics["config"]["seed"] == MOCK_CONFIG["seed"]


def test_logging_installed(tmp_path: Path) -> None:
    """Test verbose mode puts the package logger at DEBUG."""
    main(["prepare", "-v", "--out", str(tmp_path)])
    logger = logging.getLogger(DOMAIN)
    assert logger.level == logging.DEBUG
    assert len(logger.handlers) == 1
    assert logger.propagate is False


class _Strict(BaseModel):
    value: int


@pytest.mark.parametrize(
    ("error", "code"),
    [
        (ConfigError("bad"), EXIT_CONFIG),
        (ValidationError("bad"), EXIT_CONFIG),
        (ValueError("bad"), EXIT_CONFIG),
        (ConvergenceError("slow", iterations=5), EXIT_NOT_CONVERGED),
        (FileNotFoundError("gone"), EXIT_IO),
        (StageError("tomography", ConvergenceError("slow")), EXIT_NOT_CONVERGED),
        (StageError("prepare", PermissionError("denied")), EXIT_IO),
        (RuntimeError("boom"), EXIT_FAILURE),
    ],
)
def test_exit_code_for(error: BaseException, code: int) -> None:
    """Test exceptions map to documented exit codes."""
    assert exit_code_for(error) == code


def test_exit_code_for_pydantic() -> None:
    """Test pydantic validation errors map to the configuration code."""
    with pytest.raises(PydanticValidationError) as err:
        _Strict.model_validate({"value": "x"})
    assert exit_code_for(err.value) == EXIT_CONFIG
