"""Tests for the scenario engine, its event log and replay."""

from pathlib import Path

import pytest

from app.models.ledger import Ledger
from app.models.world import World
from app.schemas.common import DivergenceDetected, InvariantViolation, ProtocolError
from app.schemas.scenario import EventAction, ScenarioEvent
from app.services import ledger_service, proof_dag_service, simulation_service
from app.utils.scenario_parser import parse_scenario, parse_scenario_text


@pytest.fixture
def insertion_sort(fixture_dir: Path):
    return simulation_service.run(parse_scenario(fixture_dir / "insertion_sort.scn"))


def mint(ledger: Ledger, sender: str, recipient: str, amount: int) -> Ledger:
    ledger.balances[recipient] += amount
    return ledger


class TestRun:
    def test_insertion_sort(self, insertion_sort):
        world, log = insertion_sort
        assert world.tick == 8
        assert len(log) == 33
        assert proof_dag_service.is_proven(world.dag, "sort_prog")
        assert list(world.snapshots) == ["fig2", "fig3", "fig4", "fig5"]
        assert world.ledger.balances["C"] == 782
        assert ledger_service.total_escrowed(world.ledger) == 74

    def test_derived_entries(self, insertion_sort):
        _, log = insertion_sort
        awards = [e for e in log if e.action == "award"]
        assert [(e.tick, e.actor, e.derived, e.detail) for e in awards] == [
            (8, "halving00", True, "P+22, A+21, Q+21")
        ]
        agent_entries = [e for e in log if e.derived and e.actor == "A"]
        assert [(e.tick, e.action, e.outcome) for e in agent_entries] == [
            (5, "contribute", "ok"),
            (5, "attempt", "failed"),
            (5, "attempt", "failed"),
        ]

    def test_deterministic(self, fixture_dir: Path):
        scenario = parse_scenario(fixture_dir / "merge_sort_extension.scn")
        first_world, first_log = simulation_service.run(scenario)
        second_world, second_log = simulation_service.run(scenario)
        assert first_log == second_log
        assert first_world.model_dump() == second_world.model_dump()

    def test_failed_events_are_logged(self):
        scenario = parse_scenario_text(
            "0 | system | genesis | C=10 P=1\n"
            "1 | C | transfer | P | 50\n"
            "2 | C | transfer | P | 5\n"
        )
        world, log = simulation_service.run(scenario)
        assert [e.outcome for e in log] == ["ok", "failed", "ok"]
        assert log[1].detail.startswith("INSUFFICIENT_BALANCE")
        assert world.ledger.balances == {"C": 5, "P": 6}

    def test_genesis_runs_once(self):
        scenario = parse_scenario_text("0 | system | genesis | C=10\n0 | system | genesis | C=20\n")
        world, log = simulation_service.run(scenario)
        assert log[1].outcome == "failed"
        assert log[1].detail.startswith("GENESIS_DONE")
        assert world.ledger.total_supply == 10

    def test_genesis_rejects_a_repeated_account(self):
        scenario = parse_scenario_text("0 | system | genesis | A=100 A=1\n")
        world, log = simulation_service.run(scenario)
        assert log[0].outcome == "failed"
        assert log[0].detail.startswith("DUPLICATE_ACCOUNT")
        assert world.ledger.total_supply == 0
        assert world.ledger.balances == {}

    def test_configure(self):
        scenario = parse_scenario_text("0 | system | configure | min_bond=5 challenger_share=1/3\n")
        world, log = simulation_service.run(scenario)
        assert world.tcr.params.min_bond == 5
        assert str(world.tcr.params.challenger_share) == "1/3"
        assert "min_bond=5" in log[0].detail

    def test_human_directive_runs_as_derived_event(self):
        scenario = parse_scenario_text(
            "0 | system | genesis | H=100 V=10\n"
            "0 | H | agent | human\n"
            "0 | H | script | transfer | V | 5\n"
            "1 | H | step\n"
        )
        world, log = simulation_service.run(scenario)
        assert [(e.action, e.derived, e.outcome) for e in log] == [
            ("genesis", False, "ok"),
            ("agent", False, "ok"),
            ("script", False, "ok"),
            ("step", False, "ok"),
            ("transfer", True, "ok"),
        ]
        assert world.ledger.balances["V"] == 15

    def test_agent_registration_order(self):
        setup = (
            "0 | system | genesis | C=100 X=10 Y=10\n"
            "0 | C | put | c | target: goal; kind: conjecture\n"
            "0 | C | submit | c\n"
            "0 | C | put | p | target: goal; kind: partial; premises: a, b; imports: @c\n"
            "0 | C | submit | p\n"
        )
        agents = ["0 | X | agent | ai | solvable=a\n", "0 | Y | agent | ai | solvable=b\n"]
        step = "1 | * | step\n"

        forward, _ = simulation_service.run(
            parse_scenario_text(setup + agents[0] + agents[1] + step)
        )
        backward, _ = simulation_service.run(
            parse_scenario_text(setup + agents[1] + agents[0] + step)
        )
        assert forward.dag.statements == backward.dag.statements
        assert forward.dag.statements["goal"] == "Proven"
        assert set(forward.dag.justifications) == set(backward.dag.justifications)
        assert forward.ledger == backward.ledger

    def test_clock_regression(self):
        world = simulation_service.new_world()
        world.tick = 5
        event = ScenarioEvent(at=4, index=0, actor="C", action=EventAction.SNAPSHOT, args=("s",))
        with pytest.raises(ProtocolError) as exc_info:
            simulation_service.apply(world, event, [])
        assert exc_info.value.code == "CLOCK_REGRESSION"

    def test_conservation_fault_aborts(self, monkeypatch: pytest.MonkeyPatch):
        monkeypatch.setattr(ledger_service, "transfer", mint)
        scenario = parse_scenario_text(
            "0 | system | genesis | C=10 P=1\n1 | C | transfer | P | 5\n"
        )
        with pytest.raises(InvariantViolation) as exc_info:
            simulation_service.run(scenario)
        assert exc_info.value.code == "CONSERVATION_VIOLATED"


class TestReplay:
    def test_replay_rebuilds_the_world(self, insertion_sort):
        world, log = insertion_sort
        replayed = simulation_service.replay(log)
        assert replayed.ledger == world.ledger
        assert replayed.dag == world.dag
        assert replayed.snapshots == world.snapshots

    def test_tampered_detail(self, insertion_sort):
        _, log = insertion_sort
        tampered = list(log)
        tampered[10] = tampered[10].model_copy(update={"detail": "something else"})
        with pytest.raises(DivergenceDetected) as exc_info:
            simulation_service.replay(tampered)
        assert exc_info.value.details["position"] == 10

    def test_forged_derived_entry(self, insertion_sort):
        _, log = insertion_sort
        forged = log[-1].model_copy(update={"derived": True, "action": "award"})
        with pytest.raises(DivergenceDetected):
            simulation_service.replay([*log, forged])

    def test_divergence_is_an_invariant_violation(self):
        assert issubclass(DivergenceDetected, InvariantViolation)


class TestWorld:
    def test_new_world_uses_configured_tcr_defaults(self):
        world = simulation_service.new_world()
        assert isinstance(world, World)
        assert world.tcr.params.min_bond == 10
        assert world.dag.statements == {"True": "Proven"}
