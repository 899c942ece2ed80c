"""Command-line surface: flags, defaults, determinism plumbing."""

import hashlib
from pathlib import Path

import pytest

from conftest import SAMPLES, line_layout, make_config
from offloadsim.cli import build_parser, main
from offloadsim.config import write_scenario
from offloadsim.metrics import read_csv_rows


def tree_digest(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


@pytest.fixture
def scenario_dir(tmp_path):
    folder = tmp_path / "inputs"
    write_scenario(folder, make_config(line_layout(3, [0, 2]), minutes=1.0,
                                       devices=6))
    return folder


class TestParser:
    def test_default_mode_is_evaluation(self):
        parser = build_parser()
        args = parser.parse_args(["simulate", "--input", "x", "--output", "y"])
        assert args.train is False

    def test_train_flag_flips_mode(self):
        args = build_parser().parse_args(
            ["simulate", "--input", "x", "--output", "y", "--train"]
        )
        assert args.train is True

    def test_learning_rates_parse(self):
        args = build_parser().parse_args([
            "simulate", "--input", "x", "--output", "y",
            "--actor-lr", "5e-4", "--critic-lr", "5e-4",
        ])
        assert args.actor_lr == 5e-4 and args.critic_lr == 5e-4

    def test_unknown_flag_is_a_usage_error(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(
                ["simulate", "--input", "x", "--output", "y", "--bogus", "1"]
            )

    def test_every_hyperparameter_flag_exists(self):
        args = build_parser().parse_args([
            "simulate", "--input", "x", "--output", "y",
            "--replay-capacity", "1000", "--batch-size", "32", "--gamma", "0.9",
            "--tau", "0.01", "--updates-per-slot", "2", "--noise-theta", "0.2",
            "--noise-sigma", "0.1", "--random-steps", "10",
            "--random-episodes", "2", "--energy-cost", "2e-5",
            "--slot-length", "4", "--normalize-state", "--seed", "9",
            "--topology", "HYBRID", "--devices", "12",
        ])
        assert args.replay_capacity == 1000
        assert args.slot_length == 4.0
        assert args.normalize_state is True
        assert args.topology == "HYBRID"


class TestSimulateCommand:
    def test_writes_episode_tree(self, scenario_dir, tmp_path):
        out = tmp_path / "out"
        code = main([
            "simulate", "--input", str(scenario_dir), "--output", str(out),
            "--seed", "42", "--train", "--models", str(tmp_path / "models"),
            "--random-steps", "3",
        ])
        assert code == 0
        assert (out / "tasks.csv").exists()
        assert (out / "summary.csv").exists()
        assert sorted(p.name for p in (out / "agents").iterdir()) == [
            "dc1.csv", "dc2.csv",
        ]

    def test_same_seed_byte_identical_trees(self, scenario_dir, tmp_path):
        trees = []
        for name in ("a", "b"):
            out = tmp_path / name
            main([
                "simulate", "--input", str(scenario_dir), "--output", str(out),
                "--seed", "42", "--pricing", "random",
            ])
            trees.append(tree_digest(out))
        assert trees[0] == trees[1]

    def test_evaluation_without_models_fails(self, scenario_dir, tmp_path):
        from offloadsim.agents import AgentStateError

        with pytest.raises(AgentStateError):
            main([
                "simulate", "--input", str(scenario_dir),
                "--output", str(tmp_path / "out"),
                "--models", str(tmp_path / "none"),
            ])


class TestEnvgenCommand:
    def test_writes_parseable_file(self, tmp_path):
        out = tmp_path / "dc.xml"
        code = main([
            "envgen", "--side", "500", "--coverage", "60", "--servers", "4",
            "--clusters", "2", "--seed", "3", "--out", str(out),
            "--twst-weight", "0.8", "--extra-edges", "2",
        ])
        assert code == 0
        from offloadsim.config import parse_datacenters

        layout = parse_datacenters(out)
        assert len(layout.servers) == 4
        assert sum(s.is_head for s in layout.servers) == 2


class TestSummarizeCommand:
    def test_run_verification_passes(self, scenario_dir, tmp_path, capsys):
        out = tmp_path / "out"
        main(["simulate", "--input", str(scenario_dir), "--output", str(out),
              "--seed", "1", "--pricing", "random"])
        assert main(["summarize", "--run", str(out)]) == 0
        assert "summary verified" in capsys.readouterr().out

    def test_run_verification_detects_tampering(self, scenario_dir, tmp_path):
        out = tmp_path / "out"
        main(["simulate", "--input", str(scenario_dir), "--output", str(out),
              "--seed", "1", "--pricing", "random"])
        summary = (out / "summary.csv").read_text().splitlines()
        header = summary[0].split(",")
        values = summary[1].split(",")
        values[header.index("offloaded")] = "999999"
        (out / "summary.csv").write_text("\n".join([summary[0], ",".join(values)]) + "\n")
        assert main(["summarize", "--run", str(out)]) == 1

    def test_campaign_aggregation(self, scenario_dir, tmp_path):
        for i, name in enumerate(("ep_000", "ep_001", "ep_002")):
            out = tmp_path / "camp" / name
            main(["simulate", "--input", str(scenario_dir), "--output", str(out),
                  "--seed", str(i), "--pricing", "random"])
        assert main(["summarize", "--campaign", str(tmp_path / "camp")]) == 0
        rows = read_csv_rows(tmp_path / "camp" / "aggregate.csv")
        by_metric = {r["metric"]: r for r in rows}
        assert by_metric["generated"]["episodes"] == 3


class TestSmokeSampleCli:
    def test_sample_runs_via_cli(self, tmp_path):
        code = main([
            "simulate", "--input", str(SAMPLES / "smoke"),
            "--output", str(tmp_path / "out"), "--seed", "7",
            "--pricing", "random", "--devices", "10",
        ])
        assert code == 0
        rows = read_csv_rows(tmp_path / "out" / "tasks.csv")
        assert len(rows) > 100
