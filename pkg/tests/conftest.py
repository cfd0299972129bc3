"""Test fixtures for the proofchain simulator test suite."""

import os
from collections.abc import Callable
from pathlib import Path

import pytest

# Set test environment variables BEFORE importing app modules
os.environ.update({
    "PROOFCHAIN_ENVIRONMENT": "test",
    "PROOFCHAIN_LOG_LEVEL": "WARNING",
})

from app.models.ledger import Ledger  # noqa: E402
from app.models.world import World  # noqa: E402
from app.schemas.record import RightToUse, SubmissionResult  # noqa: E402
from app.schemas.tcr import TcrParams  # noqa: E402
from app.services import (  # noqa: E402
    agent_service,
    client_service,
    ledger_service,
    simulation_service,
)
from app.utils.scenario_parser import expand_blob  # noqa: E402

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"

GENESIS = [
    ("C", 1000),
    ("P", 100),
    ("A", 100),
    ("Q", 100),
    ("T", 100),
    ("U", 100),
    ("V", 100),
]

TEST_TCR_PARAMS = TcrParams(
    min_bond=10,
    inclusion_stake=20,
    dispute_stake=20,
    delay_period=2,
    vote_period=2,
)


@pytest.fixture
def fixture_dir() -> Path:
    """Committed scenarios and goldens."""
    return FIXTURE_DIR


@pytest.fixture
def ledger() -> Ledger:
    """Fresh ledger with the worked example's genesis allocation (supply 1600)."""
    return ledger_service.genesis(GENESIS)


@pytest.fixture
def world() -> World:
    """Empty world with genesis balances and small TCR stakes."""
    world = simulation_service.new_world()
    world.ledger = ledger_service.genesis(GENESIS)
    world.tcr.params = TEST_TCR_PARAMS
    return world


@pytest.fixture
def contribute(world: World) -> Callable[..., SubmissionResult]:
    """
    Publish a blob under a label and submit it as a record of the same id.

    Blobs are written the way scenario files write them: declarations
    separated by `;`, earlier blobs referenced as `@label`.
    """

    def _contribute(
        author: str,
        record_id: str,
        blob: str,
        filetype: str | None = None,
        right_to_use: RightToUse | None = None,
    ) -> SubmissionResult:
        address = client_service.publish(world, record_id, expand_blob(blob, world.labels))
        return client_service.submit(
            world, author, record_id, address, filetype=filetype, right_to_use=right_to_use
        )

    return _contribute


@pytest.fixture
def sort_world(world: World, contribute: Callable[..., SubmissionResult]) -> World:
    """
    The insertion-sort graph: conjecture ct00, split ct01, base case A-sort_base
    (by AI agent A) and inductive step ct03. sort_prog is proven.
    """
    agent_service.register_agent(world, "A", "ai")
    contribute("C", "ct00", "target: sort_prog; kind: conjecture")
    contribute(
        "P",
        "ct01",
        "target: sort_prog; kind: partial; premises: sort_base, sort_prog_IH; imports: @ct00",
    )
    contribute("A", "A-sort_base", "target: sort_base; kind: complete; imports: @ct01")
    contribute("Q", "ct03", "target: sort_prog_IH; kind: complete; imports: @ct01")
    return world
