"""Regenerate the CSV fixtures consumed by the frontend test suite.

Everything is produced through the public campaign surfaces so the fixtures
track the real output schemas.
"""

import shutil
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from conftest import line_layout, make_config
from offloadsim.agents import AgentHyperparams
from offloadsim.campaign import (
    run_evaluate_campaign,
    run_train_campaign,
    run_tune_campaign,
)

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "frontend" / "test" / "fixtures"

HP = AgentHyperparams(random_steps=3, random_episodes=1)


def config(topology="DECENTRALIZED", devices=8):
    return make_config(
        line_layout(3, [0, 2], clusters=[0, 0], heads=[True, False]),
        minutes=2.0, devices=devices, topology=topology,
    )


def prune(root: Path, keep: set[str]) -> None:
    """Drop everything the renderer does not consume."""
    for path in sorted(root.rglob("*"), reverse=True):
        if path.is_file() and path.name not in keep:
            path.unlink()
        elif path.is_dir() and not any(path.iterdir()):
            path.rmdir()


def main():
    if FIXTURES.exists():
        shutil.rmtree(FIXTURES)
    work = ROOT / "build" / "fixture-work"
    if work.exists():
        shutil.rmtree(work)

    tune_dir = run_tune_campaign(
        config(), work / "out", work / "models", HP, master_seed=21,
        train_episodes=1, eval_episodes=2,
    )
    shutil.copytree(tune_dir, FIXTURES / "tune")
    prune(FIXTURES / "tune", {"aggregate.csv", "tuning_combos.csv"})

    train_dir = run_train_campaign(
        config(devices=6), work / "out", work / "models", HP, master_seed=22,
        episodes=12, snapshot_every=0,
    )
    shutil.copytree(train_dir, FIXTURES / "train")
    prune(FIXTURES / "train", {"training_progress.csv"})

    for topology in ("DECENTRALIZED", "HYBRID", "CENTRALIZED"):
        for devices in (8, 16, 24, 32):
            out = run_evaluate_campaign(
                config(topology, devices), work / "out", work / "models", HP,
                master_seed=23, episodes=2, pricing="random",
            )
            target = FIXTURES / "eval" / out.name
            target.parent.mkdir(parents=True, exist_ok=True)
            shutil.copytree(out, target)
    prune(FIXTURES / "eval", {"aggregate.csv"})
    shutil.rmtree(work)
    print(f"fixtures under {FIXTURES}")


if __name__ == "__main__":
    main()
