import csv

import numpy as np
import yaml

from safebandits.cli import main
from safebandits.geometry import geometry_from_text


def test_geometry_subcommands(tmp_path, capsys):
    poly_file = tmp_path / "set.txt"
    poly_file.write_text("simplex\nc\n1.0 0.25 0.5\n")

    assert main(["geometry", "max-shrinkage", "--polytope", str(poly_file)]) == 0
    out = capsys.readouterr().out.strip()
    assert float(out) == 1 / 14

    assert main(["geometry", "sharpness", "--polytope", str(poly_file),
                 "--delta", "0.03"]) == 0
    sharp = float(capsys.readouterr().out.strip())
    assert sharp > 0

    assert main(["geometry", "shrink", "--polytope", str(poly_file),
                 "--delta", "0.01"]) == 0
    text = capsys.readouterr().out
    shrunk = geometry_from_text(text)
    assert shrunk.n_rows == 4
    np.testing.assert_allclose(shrunk.b, np.array([0.5, 1 / 14, 1 / 14, 1 / 14])
                               - 0.01 * np.array([7.0, 1, 1, 1]))


def test_geometry_missing_delta_fails(tmp_path, capsys):
    poly_file = tmp_path / "set.txt"
    poly_file.write_text("simplex\nc\n1.0 1.0\n")
    assert main(["geometry", "sharpness", "--polytope", str(poly_file)]) == 1
    assert "delta" in capsys.readouterr().err


def test_allocate_subcommand(tmp_path, capsys):
    spec = {"u_budget": 3.0, "lipschitz": 0.81, "k_bound": 2.0,
            "s_bound": 0.5, "d": 3, "m": 3, "sigma": 0.405,
            "r_sub_gaussian": 0.0, "c": [1.0, 0.25, 0.5],
            "lambda_check": 1 / 1764}
    path = tmp_path / "budget.yaml"
    path.write_text(yaml.safe_dump(spec))
    assert main(["allocate", "--input", str(path), "--samples", "500"]) == 0
    out = capsys.readouterr().out
    assert "a* =" in out and "PASS" in out
    a = [float(v) for v in out.splitlines()[0].split("=")[1].split()]
    ratios = np.array(a) / np.array([1.0, 0.25, 0.5])
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)


def test_allocate_infeasible_budget_exits_nonzero(tmp_path, capsys):
    spec = {"u_budget": 1e-12, "lipschitz": 1.0, "k_bound": 1.0,
            "s_bound": 0.5, "d": 2, "m": 2, "sigma": 0.4,
            "r_sub_gaussian": 0.3, "c": [1.0, 1.0], "lambda_check": 0.2}
    path = tmp_path / "budget.yaml"
    path.write_text(yaml.safe_dump(spec))
    assert main(["allocate", "--input", str(path)]) == 1
    assert "minimum feasible budget" in capsys.readouterr().err


def test_simulate_subcommand(tmp_path, capsys):
    raw = {
        "m": 3, "d": 3, "horizon": 40, "t_prime": 20,
        "theta_star": [[0.0, 0.0, 0.5], [-1 / 13] * 3, [-1 / 13] * 3],
        "c_reward": [0.8, 0.1, 0.1],
        "safe_set": {"simplex": [1.0, 0.25, 0.5]},
        "privacy": {"epsilon": 2.0, "delta": 0.9, "sensitivity": 1.0,
                    "alpha": [1.0, 0.25, 0.5]},
        "r_sub_gaussian": 0.001, "s_bound": 0.5, "k_bound": 2.0,
        "nu": 0.1, "delta_prime": 0.01, "seeds": [0],
    }
    cfg = tmp_path / "config.yaml"
    cfg.write_text(yaml.safe_dump(raw))
    out_dir = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out_dir)]) == 0
    rows = list(csv.DictReader(open(out_dir / "summary.csv")))
    assert len(rows) == 1
    assert (out_dir / "rounds_setup1_vec1-0.25-0.5_seed0.csv").exists()


def test_bad_config_path_exits_nonzero(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "nope.yaml"),
                 "--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err
