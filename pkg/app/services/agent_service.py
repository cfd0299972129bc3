"""Scripted prover agents: human directive queues and AI proof tools."""

import logging
from collections.abc import Iterable

from app.models.proof_dag import StatementStatus
from app.models.world import AgentAttempt, AgentKind, AgentScript, World
from app.schemas.common import ProtocolError, raise_protocol_error
from app.schemas.record import Contribution, ContributionKind, Filetype, SubmissionResult
from app.schemas.scenario import AgentStepResult, EventLogEntry, ScenarioEvent
from app.services import client_service, proof_dag_service, registry_service, tcr_service
from app.utils.blob_parser import render_contribution

logger = logging.getLogger(__name__)


def register_agent(
    world: World,
    agent: str,
    kind: AgentKind | str,
    watch: Iterable[str] = (),
    solvable: Iterable[str] = (),
    auto_propose: bool = False,
) -> AgentScript:
    """
    Register a scripted prover.

    Raises:
        ProtocolError: DUPLICATE_AGENT or BAD_ARGUMENT (unknown kind)
    """
    if world.agent(agent) is not None:
        raise_protocol_error(
            code="DUPLICATE_AGENT",
            message=f"Agent {agent} is already registered",
            details={"agent": agent},
        )
    if kind not in {k.value for k in AgentKind}:
        raise_protocol_error(
            code="BAD_ARGUMENT",
            message=f"Agent kind must be human or ai, got {kind!r}",
            details={"kind": str(kind)},
        )
    script = AgentScript(
        agent=agent,
        kind=AgentKind(kind),
        watch=tuple(watch),
        solvable=frozenset(solvable),
        auto_propose=auto_propose,
    )
    world.agents.append(script)
    logger.info(f"Registered {script.kind} agent {agent}")
    return script


def get_agent(world: World, agent: str) -> AgentScript:
    """
    Raises:
        ProtocolError: UNKNOWN_AGENT
    """
    script = world.agent(agent)
    if script is None:
        raise_protocol_error(
            code="UNKNOWN_AGENT",
            message=f"Agent {agent} is not registered",
            details={"agent": agent},
        )
    return script


def queue_directive(world: World, agent: str, directive: ScenarioEvent) -> int:
    """Append a directive to a human agent's script; returns the queue length."""
    script = get_agent(world, agent)
    if script.kind != AgentKind.HUMAN:
        raise_protocol_error(
            code="NOT_SCRIPTABLE",
            message=f"Agent {agent} is an AI tool and takes no directives",
            details={"agent": agent},
        )
    script.directives.append(directive)
    return len(script.directives)


def frontier_for(world: World, script: AgentScript) -> list[str]:
    """Statements an AI tool looks at: its watched targets' gaps, or every open statement."""
    if not script.watch:
        return proof_dag_service.open_statements(world.dag)
    gaps: set[str] = set()
    for target in script.watch:
        if target in world.dag.statements:
            gaps.update(proof_dag_service.gap_frontier(world.dag, target))
    return sorted(gaps)


def step_agent(world: World, agent: str) -> AgentStepResult:
    """
    Advance one agent by one step.

    A human agent hands back its next directive for the scheduler to run.
    An AI tool tries every statement of its frontier as it stood when the
    step began: it files a complete proof for each statement it can solve
    and logs a failed attempt for the rest.

    Raises:
        ProtocolError: UNKNOWN_AGENT
    """
    script = get_agent(world, agent)
    if script.kind == AgentKind.HUMAN:
        if not script.directives:
            return AgentStepResult()
        return AgentStepResult(directive=script.directives.pop(0))

    entries: list[EventLogEntry] = []

    def log(action: str, args: tuple[str, ...], ok: bool, detail: str) -> None:
        entries.append(
            EventLogEntry(
                tick=world.tick,
                actor=agent,
                action=action,
                args=args,
                outcome="ok" if ok else "failed",
                detail=detail,
                derived=True,
            )
        )

    for statement in frontier_for(world, script):
        if world.dag.statements.get(statement) != StatementStatus.OPEN:
            continue
        if statement not in script.solvable:
            _attempt(world, script, statement, success=False)
            log("attempt", (statement,), False, "no proof found")
            continue

        record_id = _fresh_record_id(world, agent, statement)
        try:
            submission = _contribute(world, script, record_id, statement)
            detail, success = submission.detail, submission.ingested
        except ProtocolError as e:
            detail, success = f"{e.code}: {e.message}", False
        _attempt(world, script, statement, success)

        propose_error: ProtocolError | None = None
        if success and script.auto_propose:
            try:
                tcr_service.propose(
                    world.tcr, world.ledger, world.registry, record_id, agent, world.tick
                )
                detail += "; proposed"
            except ProtocolError as e:
                propose_error = e
        log("contribute", (record_id, statement), success, detail)
        if propose_error is not None:
            log("propose", (record_id,), False, f"{propose_error.code}: {propose_error.message}")

    logger.info(f"AI agent {agent} stepped: {len(entries)} attempts")
    return AgentStepResult(entries=entries)


def _attempt(world: World, script: AgentScript, statement: str, success: bool) -> None:
    script.attempt_log.append(AgentAttempt(tick=world.tick, statement=statement, success=success))


def _fresh_record_id(world: World, agent: str, statement: str) -> str:
    """`<agent>-<statement>`, suffixed `-2`, `-3`, ... once earlier attempts used it."""
    base = f"{agent}-{statement}"
    record_id, attempt = base, 1
    while registry_service.get_record(world.registry, record_id) is not None:
        attempt += 1
        record_id = f"{base}-{attempt}"
    return record_id


def _contribute(
    world: World, script: AgentScript, record_id: str, statement: str
) -> SubmissionResult:
    origin = world.dag.introduced_by.get(statement)
    blob = render_contribution(
        Contribution(
            target=statement,
            kind=ContributionKind.COMPLETE,
            imports=(origin,) if origin else (),
        )
    )
    address = client_service.publish(world, record_id, blob)
    return client_service.submit(
        world, script.agent, record_id, address, filetype=Filetype.COMPLETED_PROOF
    )
