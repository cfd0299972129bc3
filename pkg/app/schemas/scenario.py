"""Scenario and event log schemas."""

from enum import StrEnum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class EventAction(StrEnum):
    """Actions a scenario line (or an agent) may schedule."""

    CONFIGURE = "configure"
    GENESIS = "genesis"
    BOOTSTRAP = "bootstrap"
    PUT_BLOB = "put"
    SUBMIT_RECORD = "submit"
    PROPOSE = "propose"
    BOND = "bond"
    CHALLENGE = "challenge"
    VOTE = "vote"
    RESOLVE = "resolve"
    TRANSFER = "transfer"
    DEPLOY_MECHANISM = "deploy"
    APPROVE = "approve"
    STAKE_BRANCH = "stake"
    REGISTER_AGENT = "agent"
    SCRIPT = "script"
    AGENT_STEP = "step"
    SET_HOSTED = "hosted"
    SNAPSHOT = "snapshot"


class ScenarioEvent(BaseModel):
    """One scheduled action."""

    model_config = ConfigDict(frozen=True)

    at: int = Field(..., ge=0)
    index: int = Field(..., ge=0)
    actor: str
    action: EventAction
    args: tuple[str, ...] = ()

    def arg(self, position: int, default: str = "") -> str:
        """Positional argument or a default."""
        return self.args[position] if position < len(self.args) else default


class Scenario(BaseModel):
    """A parsed scenario file."""

    model_config = ConfigDict(frozen=True)

    name: str
    events: tuple[ScenarioEvent, ...] = ()

    @property
    def last_tick(self) -> int:
        return self.events[-1].at if self.events else 0


class EventLogEntry(BaseModel):
    """Append-only record of what happened at one step."""

    model_config = ConfigDict(frozen=True)

    tick: int
    actor: str
    action: str
    args: tuple[str, ...] = ()
    outcome: Literal["ok", "failed"]
    detail: str = ""
    derived: bool = False


class AgentStepResult(BaseModel):
    """Derived log entries of one agent step, or the human directive to run."""

    entries: list[EventLogEntry] = Field(default_factory=list)
    directive: ScenarioEvent | None = None
