"""Simulator configuration using pydantic-settings."""

from fractions import Fraction

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.schemas.tcr import TcrParams


class Settings(BaseSettings):
    """Simulator settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="PROOFCHAIN_",
        case_sensitive=False,
        extra="ignore",
    )

    # Records
    COQ_VERSION: str = Field(
        default="8.12",
        description="Proof assistant version stamped on records that do not name one",
    )

    # TCR defaults (a scenario's configure event overrides these per run)
    TCR_MIN_BOND: int = Field(default=10, description="Minimum stake to become a bonded prover")
    TCR_INCLUSION_STAKE: int = Field(default=100, description="Stake attached to a proposal")
    TCR_DISPUTE_STAKE: int = Field(default=100, description="Stake posted by a challenger")
    TCR_DELAY_PERIOD: int = Field(default=3, description="Ticks a proposal stays challengeable")
    TCR_VOTE_PERIOD: int = Field(default=3, description="Ticks a challenge vote stays open")
    TCR_CHALLENGER_SHARE: str = Field(
        default="1/2",
        description="Share of the inclusion stake paid to a winning challenger",
    )

    # Incentives
    BRANCH_STAKER_FRACTION: str = Field(
        default="1/4",
        description="Default share of a branch-passing reward paid to branch stakers",
    )
    SHAPLEY_MAX_PLAYERS: int = Field(
        default=12,
        description="Largest coalition for which Shapley values are computed exactly",
    )

    # Fixtures and rendering
    FIXTURE_DIR: str = Field(default="fixtures", description="Directory of committed scenarios")
    GOLDEN_DIR_NAME: str = Field(
        default="golden",
        description="Sub-directory of a fixture directory holding golden outputs",
    )
    DOT_GRAPH_NAME: str = Field(default="proof_dag", description="Graph name in DOT exports")

    # Logging
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")

    # Environment
    ENVIRONMENT: str = Field(default="development", description="Environment name")

    @property
    def default_tcr_params(self) -> TcrParams:
        """Build TCR parameters from the configured defaults."""
        share = Fraction(self.TCR_CHALLENGER_SHARE)
        return TcrParams(
            min_bond=self.TCR_MIN_BOND,
            inclusion_stake=self.TCR_INCLUSION_STAKE,
            dispute_stake=self.TCR_DISPUTE_STAKE,
            delay_period=self.TCR_DELAY_PERIOD,
            vote_period=self.TCR_VOTE_PERIOD,
            challenger_share_num=share.numerator,
            challenger_share_denom=share.denominator,
        )

    @property
    def branch_staker_fraction(self) -> Fraction:
        """Parse the default branch staker fraction."""
        return Fraction(self.BRANCH_STAKER_FRACTION)


# Global settings instance
settings = Settings()
