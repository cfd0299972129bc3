"""Mutable protocol state models."""

from app.models.incentive import BranchStake, FixedPrize, HalvingSeries, LicenseState
from app.models.ledger import Escrow, Ledger
from app.models.proof_dag import Justification, ProofDag, ProofTree
from app.models.registry import ContentStore, Registry
from app.models.tcr import TcrListing, TcrState
from app.models.world import AgentScript, World

__all__ = [
    "Ledger",
    "Escrow",
    "ContentStore",
    "Registry",
    "ProofDag",
    "Justification",
    "ProofTree",
    "TcrListing",
    "TcrState",
    "FixedPrize",
    "HalvingSeries",
    "BranchStake",
    "LicenseState",
    "AgentScript",
    "World",
]
