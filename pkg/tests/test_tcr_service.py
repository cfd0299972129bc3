"""Tests for the token-curated registry."""

from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.models.world import World
from app.schemas.common import ProtocolError
from app.schemas.record import Filetype
from app.schemas.tcr import ListingState, TcrParams
from app.services import ledger_service, registry_service, tcr_service

VOTERS = ["V1", "V2", "V3", "V4", "V5"]


def build_tcr_world() -> World:
    """A world with one record r1, proposer P, challenger X and five voters."""
    world = World()
    world.ledger = ledger_service.genesis(
        [("P", 100), ("X", 100)] + [(voter, 100) for voter in VOTERS]
    )
    world.tcr.params = TcrParams(
        min_bond=10, inclusion_stake=20, dispute_stake=20, delay_period=2, vote_period=2
    )
    registry_service.submit_record(
        world.registry,
        registry_service.build_record(
            record_id="r1",
            author="P",
            file="ab" * 32,
            coq_ver="8.12",
            filetype=Filetype.THEOREM,
            submitted_at=0,
        ),
    )
    for account in ["X", *VOTERS]:
        tcr_service.bond(world.tcr, world.ledger, account, 10)
    return world


@pytest.fixture
def tcr_world() -> World:
    return build_tcr_world()


def propose(world: World, now: int = 0):
    return tcr_service.propose(world.tcr, world.ledger, world.registry, "r1", "P", now)


class TestBond:
    def test_below_minimum(self, tcr_world: World):
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.bond(tcr_world.tcr, tcr_world.ledger, "P", 9)
        assert exc_info.value.code == "BELOW_MIN_BOND"

    def test_bond_once(self, tcr_world: World):
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.bond(tcr_world.tcr, tcr_world.ledger, "X", 10)
        assert exc_info.value.code == "ALREADY_BONDED"

    def test_bond_is_escrowed(self, tcr_world: World):
        assert tcr_world.ledger.balances["X"] == 90
        assert tcr_service.is_bonded(tcr_world.tcr, "X")
        assert not tcr_service.is_bonded(tcr_world.tcr, "P")


class TestPropose:
    def test_pending_until_deadline(self, tcr_world: World):
        listing = propose(tcr_world, now=3)
        assert listing.state == ListingState.PENDING
        assert listing.deadline == 5
        assert tcr_world.ledger.balances["P"] == 80

    def test_unknown_record(self, tcr_world: World):
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.propose(
                tcr_world.tcr, tcr_world.ledger, tcr_world.registry, "nope", "P", 0
            )
        assert exc_info.value.code == "UNKNOWN_RECORD"

    def test_propose_twice(self, tcr_world: World):
        propose(tcr_world)
        with pytest.raises(ProtocolError) as exc_info:
            propose(tcr_world)
        assert exc_info.value.code == "ALREADY_PROPOSED"

    def test_insufficient_stake_leaves_no_listing(self, tcr_world: World):
        tcr_world.ledger.balances["P"] = 5
        tcr_world.ledger.balances["X"] += 95
        with pytest.raises(ProtocolError) as exc_info:
            propose(tcr_world)
        assert exc_info.value.code == "INSUFFICIENT_BALANCE"
        assert "r1" not in tcr_world.tcr.listings


class TestUnchallenged:
    def test_listed_after_deadline(self, tcr_world: World):
        propose(tcr_world)
        assert not tcr_service.is_canonical(tcr_world.tcr, "r1", 1)
        assert tcr_service.is_canonical(tcr_world.tcr, "r1", 2)

        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.resolve(tcr_world.tcr, tcr_world.ledger, "r1", 1)
        assert exc_info.value.code == "NOT_DUE"

        payouts = tcr_service.resolve(tcr_world.tcr, tcr_world.ledger, "r1", 2)
        listing = tcr_world.tcr.listings["r1"]
        assert listing.state == ListingState.LISTED
        assert listing.weight == 0
        assert [(p.account, p.amount) for p in payouts] == [("P", 20)]
        assert tcr_world.ledger.balances["P"] == 100

    def test_resolve_twice(self, tcr_world: World):
        propose(tcr_world)
        tcr_service.resolve(tcr_world.tcr, tcr_world.ledger, "r1", 2)
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.resolve(tcr_world.tcr, tcr_world.ledger, "r1", 3)
        assert exc_info.value.code == "ALREADY_RESOLVED"

    def test_prelisted_is_canonical(self, tcr_world: World):
        tcr_service.prelist(tcr_world.tcr, "r1", "stdlib", 0)
        assert tcr_service.is_canonical(tcr_world.tcr, "r1", 0)


class TestChallenge:
    def test_challenge_window(self, tcr_world: World):
        propose(tcr_world)
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.challenge(tcr_world.tcr, tcr_world.ledger, "r1", "X", 2)
        assert exc_info.value.code == "DEADLINE_PASSED"

    def test_unbonded_challenger(self, tcr_world: World):
        propose(tcr_world)
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.challenge(tcr_world.tcr, tcr_world.ledger, "r1", "P", 1)
        assert exc_info.value.code == "NOT_BONDED"
        assert tcr_world.tcr.listings["r1"].state == ListingState.PENDING

    def test_challenged_is_not_canonical(self, tcr_world: World):
        propose(tcr_world)
        tcr_service.challenge(tcr_world.tcr, tcr_world.ledger, "r1", "X", 1)
        assert not tcr_service.is_canonical(tcr_world.tcr, "r1", 10)

    def test_second_challenge(self, tcr_world: World):
        propose(tcr_world)
        tcr_service.challenge(tcr_world.tcr, tcr_world.ledger, "r1", "X", 1)
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.challenge(tcr_world.tcr, tcr_world.ledger, "r1", "V1", 1)
        assert exc_info.value.code == "NOT_PENDING"


class TestVote:
    @pytest.fixture
    def challenged(self, tcr_world: World) -> World:
        propose(tcr_world)
        tcr_service.challenge(tcr_world.tcr, tcr_world.ledger, "r1", "X", 1)
        return tcr_world

    def test_vote_is_immutable(self, challenged: World):
        tcr_service.vote(challenged.tcr, "r1", "V1", "include", 1)
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.vote(challenged.tcr, "r1", "V1", "exclude", 1)
        assert exc_info.value.code == "ALREADY_VOTED"

    def test_vote_after_period(self, challenged: World):
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.vote(challenged.tcr, "r1", "V1", "include", 3)
        assert exc_info.value.code == "NO_ACTIVE_VOTE"

    def test_vote_without_challenge(self, tcr_world: World):
        propose(tcr_world)
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.vote(tcr_world.tcr, "r1", "V1", "include", 1)
        assert exc_info.value.code == "NO_ACTIVE_VOTE"

    def test_invalid_choice(self, challenged: World):
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.vote(challenged.tcr, "r1", "V1", "abstain", 1)
        assert exc_info.value.code == "INVALID_CHOICE"

    def test_unbonded_voter(self, challenged: World):
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.vote(challenged.tcr, "r1", "P", "include", 1)
        assert exc_info.value.code == "NOT_BONDED"

    def test_resolve_waits_for_vote_period(self, challenged: World):
        with pytest.raises(ProtocolError) as exc_info:
            tcr_service.resolve(challenged.tcr, challenged.ledger, "r1", 2)
        assert exc_info.value.code == "NOT_DUE"


class TestResolveOutcomes:
    @pytest.mark.parametrize("voter_count", range(len(VOTERS) + 1))
    def test_every_ballot_combination(self, tcr_world: World, voter_count: int):
        for ballots in product(["include", "exclude"], repeat=voter_count):
            world = tcr_world.model_copy(deep=True)
            propose(world)
            tcr_service.challenge(world.tcr, world.ledger, "r1", "X", 1)
            for voter, choice in zip(VOTERS, ballots, strict=False):
                tcr_service.vote(world.tcr, "r1", voter, choice, 2)

            before = dict(world.ledger.balances)
            tcr_service.resolve(world.tcr, world.ledger, "r1", 3)
            ledger_service.check_conservation(world.ledger)

            includers = [v for v, c in zip(VOTERS, ballots, strict=False) if c == "include"]
            excluders = [v for v, c in zip(VOTERS, ballots, strict=False) if c == "exclude"]
            listing = world.tcr.listings["r1"]
            gained = {a: world.ledger.balances[a] - before[a] for a in before}

            if len(includers) >= len(excluders):
                assert listing.state == ListingState.LISTED
                assert listing.weight == len(includers)
                assert gained["P"] == 20 + (10 if includers else 20)
                assert sum(gained[v] for v in includers) == (10 if includers else 0)
                assert gained["X"] == 0
            else:
                assert listing.state == ListingState.REJECTED
                assert gained["P"] == 0
                assert gained["X"] == 10 + 20
                assert sum(gained[v] for v in excluders) == 10
                assert max(gained[v] for v in excluders) - min(gained[v] for v in excluders) <= 1
            assert all(gained[v] == 0 for v in VOTERS if v not in includers + excluders)

    def test_odd_dispute_stake_rounds_toward_contributor(self, tcr_world: World):
        tcr_world.tcr.params = tcr_world.tcr.params.model_copy(update={"dispute_stake": 21})
        propose(tcr_world)
        tcr_service.challenge(tcr_world.tcr, tcr_world.ledger, "r1", "X", 1)
        for voter in ["V1", "V2", "V3"]:
            tcr_service.vote(tcr_world.tcr, "r1", voter, "include", 2)

        payouts = tcr_service.resolve(tcr_world.tcr, tcr_world.ledger, "r1", 3)
        assert [(p.account, p.amount) for p in payouts] == [
            ("P", 11),
            ("V1", 4),
            ("V2", 3),
            ("V3", 3),
            ("P", 20),
        ]

    def test_tie_includes(self, tcr_world: World):
        propose(tcr_world)
        tcr_service.challenge(tcr_world.tcr, tcr_world.ledger, "r1", "X", 1)
        tcr_service.vote(tcr_world.tcr, "r1", "V1", "include", 1)
        tcr_service.vote(tcr_world.tcr, "r1", "V2", "exclude", 1)
        tcr_service.resolve(tcr_world.tcr, tcr_world.ledger, "r1", 3)
        assert tcr_world.tcr.listings["r1"].state == ListingState.LISTED
        assert tcr_world.tcr.listings["r1"].weight == 1


class TestSelfChallenge:
    @settings(max_examples=300, deadline=None)
    @given(
        ballots=st.lists(
            st.sampled_from([None, "include", "exclude"]),
            min_size=len(VOTERS),
            max_size=len(VOTERS),
        ),
        proposer_ballot=st.sampled_from([None, "include", "exclude"]),
        resolve_at=st.integers(min_value=2, max_value=6),
    )
    def test_challenging_own_record_conserves_supply(
        self, ballots: list[str | None], proposer_ballot: str | None, resolve_at: int
    ):
        world = build_tcr_world()
        supply = world.ledger.total_supply
        tcr_service.bond(world.tcr, world.ledger, "P", 10)
        propose(world)
        tcr_service.challenge(world.tcr, world.ledger, "r1", "P", 0)
        for voter, choice in [*zip(VOTERS, ballots, strict=True), ("P", proposer_ballot)]:
            if choice is not None:
                tcr_service.vote(world.tcr, "r1", voter, choice, 1)

        tcr_service.resolve(world.tcr, world.ledger, "r1", resolve_at)

        ledger_service.check_conservation(world.ledger)
        assert sum(world.ledger.balances.values()) + ledger_service.total_escrowed(
            world.ledger
        ) == supply
        assert world.tcr.listings["r1"].state in (ListingState.LISTED, ListingState.REJECTED)
        # only the bonds stay escrowed once the dispute settles
        assert ledger_service.total_escrowed(world.ledger) == 10 * (len(VOTERS) + 2)
