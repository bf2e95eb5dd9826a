from __future__ import annotations

from pathlib import Path

import pytest

from pfta.dsl import parse_model
from pfta.model import PftModel

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def model_text() -> str:
    return (DATA / "multiprocessor.pft").read_text()


@pytest.fixture(scope="session")
def model(model_text: str) -> PftModel:
    return parse_model(model_text)
