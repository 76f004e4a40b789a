import json

import numpy as np
import pytest

import main
from designs import optimize_lhs
from spacefill import mmphi, mmphi_intensive

FAST = [
    "--data.synthetic.n", "50",
    "--surrogate.forest.n_estimators", "5",
    "--optimizer.budget", "120",
]


def run(capsys, *argv):
    code = main.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_design(capsys, tmp_path, write_csv):
    csv = write_csv("x3.csv", "x1,x2\n0,0\n0.5,0.5\n1,1\n")
    code, out, _ = run(capsys, "eval-design", csv, "--output-dir", str(tmp_path))
    assert code == 0
    assert "Quality (Phi_q_intensive): 1.22474487139158" in out
    summary = json.loads((tmp_path / "eval-design_summary.json").read_text(encoding="utf-8"))
    assert summary["M"] == 3
    assert summary["phi_intensive"] == pytest.approx(1.224744871391589, rel=1e-12)


def _summary(tmp_path):
    return json.loads((tmp_path / "eval-design_summary.json").read_text(encoding="utf-8"))


def test_eval_design_unit_distance_is_one(capsys, tmp_path, write_csv):
    csv = write_csv("pair.csv", "x1,x2\n0,0\n0.6,0.8\n")
    assert run(capsys, "eval-design", csv, "--output-dir", str(tmp_path))[0] == 0
    summary = _summary(tmp_path)
    assert summary["M"] == 1
    assert summary["phi"] == pytest.approx(1.0, rel=1e-12)
    assert summary["phi_intensive"] == pytest.approx(1.0, rel=1e-12)


def test_eval_design_matches_library_on_exported_design(capsys, tmp_path):
    assert run(capsys, "opt-lhs", "--output-dir", str(tmp_path), "--studies.opt_lhs.n", "20",
               "--studies.opt_lhs.iterations", "100")[0] == 0
    design = tmp_path / "opt-lhs_design.csv"
    assert run(capsys, "eval-design", str(design), "--output-dir", str(tmp_path))[0] == 0

    expected = optimize_lhs(20, 2, iterations=100, seed=0)
    summary = _summary(tmp_path)
    assert summary["phi"] == mmphi(expected).quality
    assert summary["phi_intensive"] == mmphi_intensive(expected).quality


def test_eval_design_normalize_is_opt_in(capsys, tmp_path, write_csv):
    csv = write_csv("scaled.csv", "t,p\n0,0\n5,10\n10,20\n")
    assert run(capsys, "eval-design", csv, "--output-dir", str(tmp_path))[0] == 0
    assert _summary(tmp_path)["phi_intensive"] == pytest.approx(mmphi_intensive(np.array([[0, 0], [5, 10], [10, 20]])).quality)

    assert run(capsys, "eval-design", csv, "--output-dir", str(tmp_path), "--normalize")[0] == 0
    assert _summary(tmp_path)["phi_intensive"] == pytest.approx(1.224744871391589, rel=1e-12)


def test_eval_design_duplicates_exit_3(capsys, tmp_path, write_csv):
    csv = write_csv("dup.csv", "x1,x2\n0,0\n1,1\n1,1\n")
    code, _, err = run(capsys, "eval-design", csv, "--output-dir", str(tmp_path))
    assert code == 3
    assert "DuplicatePointError" in err
    assert "(1, 2)" in err


def test_eval_design_bad_csv_exit_3(capsys, tmp_path, write_csv):
    csv = write_csv("bad.csv", "x1,x2\n0,0\n1,abc\n")
    code, _, err = run(capsys, "eval-design", csv, "--output-dir", str(tmp_path))
    assert code == 3
    assert "bad.csv:3:" in err


def test_bad_override_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "scaling", "--output-dir", str(tmp_path), "--studies.scaling.n_values", "[1]")
    assert code == 2
    assert "ConfigError" in err


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as err:
        main.main(["fly"])
    assert err.value.code == 2


def test_unexpected_error_exit_1(capsys, mocker, tmp_path):
    mocker.patch.dict(main.COMMANDS, {"scaling": mocker.Mock(side_effect=RuntimeError("boom"))})
    code, _, _ = run(capsys, "scaling", "--output-dir", str(tmp_path))
    assert code == 1


def test_scaling(capsys, tmp_path):
    code, out, _ = run(capsys, "scaling", "--output-dir", str(tmp_path), "--studies.scaling.n_values", "[5, 10, 20]")
    assert code == 0
    assert (tmp_path / "scaling_mm_vs_n.svg").exists()
    assert (tmp_path / "scaling_mm_vs_n.csv").read_text(encoding="utf-8").startswith("n,phi,phi_intensive,M\n")
    assert "phi_intensive" in out


def test_noise_sweep(capsys, tmp_path):
    code, _, _ = run(capsys, "noise-sweep", "--output-dir", str(tmp_path), "--data.synthetic.n", "40",
                     "--studies.noise_sweep.sigmas", "[0.01, 0.05, 0.1, 0.3]", "--studies.noise_sweep.reps", "10")
    assert code == 0
    lines = (tmp_path / "noise-sweep_sigma_noise.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 5


def test_point_addition_and_opt_lhs(capsys, tmp_path):
    assert run(capsys, "point-addition", "--output-dir", str(tmp_path), "--data.synthetic.n", "40",
               "--studies.point_addition.mode", "single-injection")[0] == 0
    assert (tmp_path / "point-addition_point_addition_single_injection.svg").exists()
    assert run(capsys, "opt-lhs", "--output-dir", str(tmp_path), "--studies.opt_lhs.n", "20",
               "--studies.opt_lhs.iterations", "100")[0] == 0
    assert (tmp_path / "opt-lhs_criteria.csv").exists()
    assert (tmp_path / "opt-lhs_designs.svg").exists()


def test_generate_then_suggest_from_csv(capsys, tmp_path):
    assert run(capsys, "generate", "--output-dir", str(tmp_path), "--data.synthetic.n", "50")[0] == 0
    features = tmp_path / "generate_features.csv"
    targets = tmp_path / "generate_targets.csv"
    assert features.exists() and targets.exists()

    code, out, _ = run(capsys, "suggest", "--output-dir", str(tmp_path), *FAST,
                       "--data.features_csv", str(features), "--data.targets_csv", str(targets))
    assert code == 0
    assert "Input values of the best point (z1 + z2)" in out
    assert "Best desirability (z1 + z2 + mm)" in out


def test_suggest_artifacts(capsys, tmp_path):
    code, _, _ = run(capsys, "suggest", "--output-dir", str(tmp_path), *FAST)
    assert code == 0
    svgs = sorted(p.name for p in tmp_path.glob("suggest_*.svg"))
    assert len(svgs) == 7
    assert "suggest_updated_design_scatter.svg" in svgs
    with_mm = json.loads((tmp_path / "suggest_with_mm.json").read_text(encoding="utf-8"))
    assert with_mm["objective_names"] == ["z1", "z2", "mm"]
    assert len(with_mm["y_best"]) == 3


def test_suggest_is_reproducible(capsys, tmp_path):
    for name in ("a", "b"):
        assert run(capsys, "suggest", "--output-dir", str(tmp_path / name), *FAST)[0] == 0
    for path in (tmp_path / "a").iterdir():
        assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes(), path.name


def test_suggest_without_mm(capsys, tmp_path):
    code, _, _ = run(capsys, "suggest", "--output-dir", str(tmp_path), *FAST, "--mm.enabled", "false")
    assert code == 0
    assert not (tmp_path / "suggest_with_mm.json").exists()
    without = json.loads((tmp_path / "suggest_without_mm.json").read_text(encoding="utf-8"))
    assert len(without["y_best"]) == 2


def test_fit_cv(capsys, tmp_path):
    code, out, _ = run(capsys, "fit-cv", "--output-dir", str(tmp_path), "--data.synthetic.n", "40",
                       "--studies.cv.k_folds", "3", "--studies.cv.models", '["forest"]',
                       "--surrogate.forest.n_estimators", "5")
    assert code == 0
    assert "| Target | Model | Metric | Mean | Std | Min | Max |" in out
    assert (tmp_path / "fit-cv_cv_table.txt").exists()
    assert (tmp_path / "fit-cv_pareto_forest.svg").exists()


def test_desirability(capsys, tmp_path):
    code, out, _ = run(capsys, "desirability", "--output-dir", str(tmp_path), "--data.synthetic.n", "40")
    assert code == 0
    assert "target z1: min: 0.0, max: 1.1, scale: 5.0" in out
    assert "mmphi_min:" in out
    assert (tmp_path / "desirability_desirability_curves.svg").exists()
