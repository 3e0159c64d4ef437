import json
import os
import subprocess
import sys

import numpy as np
import pytest

from pot_ood.cli import main
from pot_ood.ingest import FeatureMatrix, load_features, save_features

FAR_SPEC = {
    "num_classes": 3,
    "dim": 8,
    "train_per_class": 30,
    "test_id_count": 60,
    "radius": 8.0,
    "sigma": 0.5,
    "ood_clusters": [{"offset": 8.0, "sigma": 0.5, "count": 60}],
    "seed": 0,
}


@pytest.fixture(scope="session")
def far_data(tmp_path_factory):
    """Synthetic far-OOD dataset materialized once through the CLI itself."""
    root = tmp_path_factory.mktemp("far")
    spec_path = root / "spec.json"
    spec_path.write_text(json.dumps(FAR_SPEC))
    assert main(["synth", "--spec", str(spec_path), "--out", str(root / "data")]) == 0
    return root / "data"


def _proto_flags(far_data):
    return [
        "--train-features", str(far_data / "train_features.potf"),
        "--train-labels", str(far_data / "train_labels.txt"),
    ]


class TestSynthCommand:
    def test_writes_dataset_and_manifest(self, far_data):
        for name in ("train_features.potf", "train_labels.txt", "test_id.potf",
                     "test_ood.potf", "manifest.json"):
            assert (far_data / name).exists()
        manifest = json.loads((far_data / "manifest.json").read_text())
        assert manifest["shapes"] == {
            "train": [90, 8], "test_id": [60, 8], "test_ood": [60, 8]
        }
        assert manifest["spec"]["seed"] == 0

    def test_rerun_is_byte_identical(self, far_data, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(FAR_SPEC))
        assert main(["synth", "--spec", str(spec_path), "--out", str(tmp_path / "again")]) == 0
        for name in ("train_features.potf", "test_id.potf", "test_ood.potf",
                     "train_labels.txt", "manifest.json"):
            assert (tmp_path / "again" / name).read_bytes() == (far_data / name).read_bytes()

    def test_bad_spec_is_a_validation_error(self, tmp_path, capsys):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text('{"num_classes": 1}')
        assert main(["synth", "--spec", str(spec_path), "--out", str(tmp_path / "x")]) == 3
        assert "InvalidSpec" in capsys.readouterr().err

    def test_missing_spec_file(self, tmp_path, capsys):
        rc = main(["synth", "--spec", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
        assert rc == 2


class TestPrototypesCommand:
    def test_from_train_data_with_sidecar(self, far_data, tmp_path):
        out = tmp_path / "protos.potf"
        assert main(["prototypes", *_proto_flags(far_data), "--out", str(out)]) == 0
        vectors = load_features(out)
        assert vectors.data.shape == (3, 8)
        sidecar = json.loads((tmp_path / "protos.potf.json").read_text())
        assert sidecar["num_classes"] == 3
        assert sidecar["dim"] == 8
        assert sidecar["source"] == "from_data"
        np.testing.assert_allclose(sidecar["masses"], [1 / 3] * 3, atol=1e-12)

    def test_missing_label_file_exits_2(self, far_data, tmp_path, capsys):
        rc = main([
            "prototypes",
            "--train-features", str(far_data / "train_features.potf"),
            "--train-labels", str(far_data / "no_such_labels.txt"),
            "--out", str(tmp_path / "p.potf"),
        ])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_weights_transpose_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        weights = rng.normal(size=(5, 3))  # stored dim x classes
        save_features(FeatureMatrix.from_array(weights), tmp_path / "w.potf")
        save_features(FeatureMatrix.from_array(weights.T.copy()), tmp_path / "wt.potf")
        assert main(["prototypes", "--weights", str(tmp_path / "w.potf"),
                     "--out", str(tmp_path / "a.potf")]) == 0
        assert main(["prototypes", "--weights", str(tmp_path / "wt.potf"), "--transpose",
                     "--out", str(tmp_path / "b.potf")]) == 0
        assert (tmp_path / "a.potf").read_bytes() == (tmp_path / "b.potf").read_bytes()
        assert (tmp_path / "a.potf.json").read_text() == (tmp_path / "b.potf.json").read_text()

    def test_conflicting_sources_exit_3(self, far_data, tmp_path, capsys):
        rc = main([
            "prototypes", *_proto_flags(far_data),
            "--weights", str(far_data / "train_features.potf"),
            "--out", str(tmp_path / "p.potf"),
        ])
        assert rc == 3
        assert "mutually exclusive" in capsys.readouterr().err

    def test_no_source_exits_3(self, tmp_path):
        assert main(["prototypes", "--out", str(tmp_path / "p.potf")]) == 3

    def test_normalize_flag_produces_unit_rows(self, far_data, tmp_path):
        out = tmp_path / "protos.potf"
        assert main(["prototypes", *_proto_flags(far_data), "--normalize",
                     "--out", str(out)]) == 0
        norms = np.linalg.norm(load_features(out).data, axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-6)  # f32 storage


class TestScoreCommand:
    def test_scores_csv_shape_and_content(self, far_data, tmp_path):
        out = tmp_path / "scores.csv"
        rc = main([
            "score", *_proto_flags(far_data),
            "--test-id", str(far_data / "test_id.potf"),
            "--test-ood", str(far_data / "test_ood.potf"),
            "--out", str(out),
        ])
        assert rc == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "sample_index,score,t_id,t_out,batch_index"
        assert len(lines) == 1 + 120
        for j, line in enumerate(lines[1:]):
            index, score, t_id, t_out, batch = line.split(",")
            assert int(index) == j
            assert np.isfinite(float(score))
            assert float(score) == pytest.approx(float(t_id) - float(t_out))
            assert int(batch) == 0  # 120 samples fit one default batch

    def test_rerun_is_byte_identical(self, far_data, tmp_path):
        args = [
            "score", *_proto_flags(far_data),
            "--test-id", str(far_data / "test_id.potf"),
            "--seed", "3",
        ]
        assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
        assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_omega_at_one_exits_3(self, far_data, tmp_path, capsys):
        rc = main([
            "score", *_proto_flags(far_data),
            "--test-id", str(far_data / "test_id.potf"),
            "--omega", "1.0",
            "--out", str(tmp_path / "s.csv"),
        ])
        assert rc == 3
        assert "OmegaOutOfRange" in capsys.readouterr().err

    def test_plain_mode_underflow_exits_4(self, far_data, tmp_path, capsys):
        rc = main([
            "score", *_proto_flags(far_data),
            "--test-id", str(far_data / "test_id.potf"),
            "--stabilization", "plain", "--lambda", "1e-6",
            "--out", str(tmp_path / "s.csv"),
        ])
        assert rc == 4
        assert "NumericalUnderflow" in capsys.readouterr().err


class TestEvalCommand:
    def _eval_args(self, far_data, **named):
        args = [
            "eval", *_proto_flags(far_data),
            "--test-id", str(far_data / "test_id.potf"),
            "--test-ood", str(named.pop("ood", far_data / "test_ood.potf")),
        ]
        for flag, value in named.items():
            args += [f"--{flag.replace('_', '-')}", str(value)]
        return args

    def test_far_ood_separates_perfectly(self, far_data, tmp_path):
        out = tmp_path / "report.json"
        assert main(self._eval_args(far_data, out=out)) == 0
        report = json.loads(out.read_text())
        assert report["auroc"] == 1.0
        assert report["fpr95"] == 0.0

    def test_report_schema(self, far_data, tmp_path):
        out = tmp_path / "report.json"
        assert main(self._eval_args(far_data, out=out)) == 0
        report = json.loads(out.read_text())
        assert set(report) == {"auroc", "fpr95", "threshold", "n_id", "n_ood", "config"}
        assert (report["n_id"], report["n_ood"]) == (60, 60)
        assert set(report["config"]) == {
            "lambda", "lambda_relative", "omega", "batch_size", "seed",
            "stabilization", "tolerance", "max_iters", "normalize",
        }
        assert report["config"]["batch_size"] == 512
        assert report["config"]["omega"] == 2.0

    def test_identical_score_distributions_tie_at_half(self, far_data, tmp_path):
        # same file on both sides: duplicated rows land in the same (single)
        # batch, get bitwise-equal scores, and the tie rule pins AUROC at 1/2
        out = tmp_path / "tie.json"
        assert main(self._eval_args(far_data, ood=far_data / "test_id.potf", out=out)) == 0
        assert json.loads(out.read_text())["auroc"] == 0.5

    def test_csv_format(self, far_data, tmp_path):
        out = tmp_path / "report.csv"
        args = self._eval_args(far_data, out=out) + ["--format", "csv"]
        assert main(args) == 0
        header, row = out.read_text().strip().split("\n")
        assert header == "auroc,fpr95,threshold,n_id,n_ood"
        fields = row.split(",")
        assert float(fields[0]) == 1.0
        assert fields[3] == "60" and fields[4] == "60"

    def test_defaults_to_stdout(self, far_data, capsys):
        assert main(self._eval_args(far_data)) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["auroc"] == 1.0


class TestSweepCommand:
    def _sweep_args(self, far_data, out, **named):
        args = [
            "sweep", *_proto_flags(far_data),
            "--test-id", str(far_data / "test_id.potf"),
            "--test-ood", str(far_data / "test_ood.potf"),
            "--out", str(out),
        ]
        for flag, value in named.items():
            args += [f"--{flag.replace('_', '-')}", str(value)]
        return args

    def test_single_point_grid_matches_eval(self, far_data, tmp_path):
        sweep_out = tmp_path / "sweep.csv"
        assert main(self._sweep_args(far_data, sweep_out, **{"lambda": "0.7"})) == 0
        header, row = sweep_out.read_text().strip().split("\n")
        assert header == "parameter,value,seed,auroc,fpr95"
        name, value, seed, auroc, fpr = row.split(",")
        assert (name, value, seed) == ("lambda", "0.7", "0")

        eval_out = tmp_path / "eval.json"
        assert main([
            "eval", *_proto_flags(far_data),
            "--test-id", str(far_data / "test_id.potf"),
            "--test-ood", str(far_data / "test_ood.potf"),
            "--lambda", "0.7", "--out", str(eval_out),
        ]) == 0
        report = json.loads(eval_out.read_text())
        assert float(auroc) == report["auroc"]
        assert float(fpr) == report["fpr95"]

    def test_omega_grid_emits_one_row_per_value(self, far_data, tmp_path):
        out = tmp_path / "sweep.csv"
        assert main(self._sweep_args(far_data, out, omega="1.5,2,4")) == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 4
        for line in lines[1:]:
            name, value, _, auroc, fpr = line.split(",")
            assert name == "omega"
            assert 0.0 <= float(auroc) <= 1.0
            assert 0.0 <= float(fpr) <= 1.0
        assert [line.split(",")[1] for line in lines[1:]] == ["1.5", "2.0", "4.0"]

    def test_two_grids_sweep_one_parameter_at_a_time(self, far_data, tmp_path):
        out = tmp_path / "sweep.csv"
        assert main(self._sweep_args(
            far_data, out, **{"lambda": "0.5,1.0", "batch_size": "32,64"}
        )) == 0
        rows = [line.split(",") for line in out.read_text().strip().split("\n")[1:]]
        assert [(r[0], r[1]) for r in rows] == [
            ("lambda", "0.5"), ("lambda", "1.0"),
            ("batch_size", "32"), ("batch_size", "64"),
        ]

    def test_no_grids_exits_3(self, far_data, tmp_path, capsys):
        assert main(self._sweep_args(far_data, tmp_path / "s.csv")) == 3
        assert "nothing to sweep" in capsys.readouterr().err

    def test_unparseable_grid_exits_3(self, far_data, tmp_path):
        rc = main(self._sweep_args(far_data, tmp_path / "s.csv", omega="2,wide"))
        assert rc == 3


class TestCliPlumbing:
    def test_unknown_subcommand_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 2

    def test_console_script_and_log_env(self, far_data, tmp_path):
        # the installed entry point, exercised end to end in a subprocess so
        # POT_LOG-driven logging configuration starts from a clean slate
        env = dict(os.environ, POT_LOG="info")
        result = subprocess.run(
            [sys.executable, "-m", "pot_ood",
             "prototypes", *_proto_flags(far_data),
             "--out", str(tmp_path / "p.potf")],
            capture_output=True, text=True, env=env,
        )
        assert result.returncode == 0
        assert "built 3 prototypes" in result.stderr

    def test_csv_feature_files_accepted_by_extension(self, far_data, tmp_path):
        rows = load_features(far_data / "test_id.potf").data[:10]
        csv_path = tmp_path / "test_id.csv"
        csv_path.write_text(
            "\n".join(",".join(repr(float(v)) for v in row) for row in rows) + "\n"
        )
        out = tmp_path / "scores.csv"
        rc = main([
            "score", *_proto_flags(far_data),
            "--test-id", str(csv_path),
            "--out", str(out),
        ])
        assert rc == 0
        assert len(out.read_text().strip().split("\n")) == 11
