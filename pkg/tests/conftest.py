from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hetmec.config import bundled_config  # noqa: E402
from hetmec.topology import Scenario, chain  # noqa: E402


@pytest.fixture
def low_load_chain():
    """CC 2 / AP 0.4 / ED 0.2 compute, both links 2, one ED at 1 Mbit/s."""
    return chain([2.0, 0.4, 0.2], [2.0, 2.0]), Scenario((1.0,), 0.1)


@pytest.fixture
def small_cc_chain():
    return chain([0.5, 0.4, 0.2], [2.0, 2.0]), Scenario((1.0,), 0.1)


@pytest.fixture
def trans_short_chain():
    cfg = bundled_config("chain_transmission_shortage.json")
    return cfg.topology, cfg.scenario
