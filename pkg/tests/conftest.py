from pathlib import Path

import pytest

from layoutlab.maze import load_maze

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN


@pytest.fixture(scope="session")
def maze4():
    return load_maze(GOLDEN / "maze_4x4_seed42.llm")


@pytest.fixture(scope="session")
def maze200():
    return load_maze(GOLDEN / "maze_200x200_seed1.llm")
