import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
GOLDEN = Path(__file__).resolve().parent / "golden"

# any DIMACS solver with the s/v output protocol works here; the repo ships
# a minimal one so the suite has no external dependency
SOLVER_CMD = [sys.executable, str(REPO_ROOT / "tools" / "dpll_solve.py")]


@pytest.fixture(scope="session")
def solver_cmd() -> list[str]:
    return SOLVER_CMD


@pytest.fixture(scope="session")
def perez_profile_path() -> Path:
    return REPO_ROOT / "data" / "perez41.txt"
