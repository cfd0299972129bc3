"""Whole-world state advanced by the simulation loop."""

from enum import StrEnum

from pydantic import BaseModel, Field

from app.config import settings
from app.models.incentive import LicenseState, Mechanism
from app.models.ledger import Ledger
from app.models.proof_dag import ProofDag
from app.models.registry import ContentStore, Registry
from app.models.tcr import TcrState
from app.schemas.scenario import ScenarioEvent


class AgentKind(StrEnum):
    HUMAN = "human"
    AI_TOOL = "ai"


class AgentAttempt(BaseModel):
    """One statement an AI tool tried to close."""

    tick: int
    statement: str
    success: bool


class AgentScript(BaseModel):
    """A scripted prover: humans replay directives, AI tools close what they can."""

    agent: str
    kind: AgentKind
    directives: list[ScenarioEvent] = Field(default_factory=list)
    watch: tuple[str, ...] = ()
    solvable: frozenset[str] = frozenset()
    auto_propose: bool = False
    attempt_log: list[AgentAttempt] = Field(default_factory=list)


class World(BaseModel):
    """Everything one scenario run mutates."""

    tick: int = 0
    ledger: Ledger = Field(default_factory=Ledger)
    store: ContentStore = Field(default_factory=ContentStore)
    registry: Registry = Field(default_factory=Registry)
    dag: ProofDag = Field(default_factory=ProofDag)
    tcr: TcrState = Field(default_factory=lambda: TcrState(params=settings.default_tcr_params))
    mechanisms: dict[str, Mechanism] = Field(default_factory=dict)
    licenses: LicenseState = Field(default_factory=LicenseState)
    agents: list[AgentScript] = Field(default_factory=list)
    labels: dict[str, str] = Field(default_factory=dict)
    snapshots: dict[str, str] = Field(default_factory=dict)

    @property
    def ai_accounts(self) -> frozenset[str]:
        return frozenset(a.agent for a in self.agents if a.kind == AgentKind.AI_TOOL)

    def agent(self, name: str) -> AgentScript | None:
        for script in self.agents:
            if script.agent == name:
                return script
        return None
