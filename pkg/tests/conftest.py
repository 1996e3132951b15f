import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(Path(__file__).parent))

from actr_confluence.parser import load_model  # noqa: E402


@pytest.fixture(scope="session")
def det_model():
    return load_model(ROOT / "models" / "counting_det.actr")


@pytest.fixture(scope="session")
def ambig_model():
    return load_model(ROOT / "models" / "counting_ambig.actr")


@pytest.fixture(scope="session")
def models_dir():
    return ROOT / "models"
