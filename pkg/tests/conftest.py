import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from probevm import Engine


@pytest.fixture
def engine():
    return Engine()


def run_toylang(text: str, name: str = "test.toy"):
    """Run a toylang program on a fresh engine; returns (engine, result)."""
    engine = Engine()
    source = engine.create_source(name, "toylang", text)
    result = engine.run(source)
    return engine, result
