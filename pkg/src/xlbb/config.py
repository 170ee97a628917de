from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from xlbb.common.errors import ConfigError
from xlbb.common.file_util import find_project_root, read_json
from xlbb.models.types import Backend, JudgeKind, PayloadSource

PROJECT_ROOT = find_project_root()


@dataclass
class DirectoryConstants:
    XLBB_EXPERIMENTS_DIR: Path = PROJECT_ROOT / "experiments"


class Environment(str, Enum):
    DEVELOPMENT = "development"
    PRODUCTION = "production"


class AppEnvironment(BaseSettings):
    """Application environment settings."""

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # --- Environment ---
    XLBB_ENVIRONMENT: Environment = Environment.DEVELOPMENT
    XLBB_LOG_LEVEL: str = "INFO"

    # --- Remote model ---
    XLBB_API_KEY: str = ""
    XLBB_ENDPOINT: str = "http://localhost:8000/v1/chat/completions"
    XLBB_MODEL: str = "gpt-4o-mini"
    XLBB_TEMPERATURE: float = 0.0
    XLBB_REQUEST_TIMEOUT: float = 60.0
    XLBB_RETRY_DELAYS: list[float] = [0.5, 2.0]
    XLBB_JUDGE_ENDPOINT: str = ""

    # --- Evaluation ---
    XLBB_PARALLEL: int = 4

    # --- N-gram backend ---
    XLBB_NGRAM_ORDER: int = 3
    XLBB_NGRAM_DELTA: float = 0.01

    def is_dev(self) -> bool:
        """Is development environment"""

        return self.XLBB_ENVIRONMENT == Environment.DEVELOPMENT


ENV = AppEnvironment()
DIRS = DirectoryConstants()


class CliConfig(BaseModel):
    """Per-invocation configuration, a `--config` JSON file overlaid with command-line flags"""

    dataset_root: Path | None = Field(description="Directory of per-language dataset files", default=None)
    spec_path: Path | None = Field(description="Attack spec JSON", default=None)
    backend: Backend = Field(description="Model backend, exactly one per invocation", default=Backend.MOCK)
    endpoint: str | None = Field(description="Chat-completions URL of the remote backend", default=None)
    model_path: Path | None = Field(description="Saved n-gram model for the ngram backend", default=None)
    payload_source: PayloadSource = Field(
        description="Where refusal and injection payloads come from", default=PayloadSource.FALLBACK
    )
    judge: JudgeKind = Field(description="Refusal judge, the lexicon or a remote model", default=JudgeKind.RULES)
    judge_endpoint: str | None = Field(description="Chat-completions URL of the remote judge", default=None)
    out: Path = Field(description="Output directory", default=DIRS.XLBB_EXPERIMENTS_DIR / "latest")
    seed: int = Field(description="64-bit seed", default=0)
    parallel: int = Field(description="Bounded evaluation fan-out", ge=1, default=4)
    onion_threshold: float | None = Field(description="Fixed ONION removal threshold", default=None)
    onion_percentile: float = Field(description="ONION calibration percentile", ge=0.0, le=100.0, default=99.0)
    cleangen_k: int = Field(description="CleanGen draft window", ge=1, default=4)
    cleangen_alpha: float = Field(description="CleanGen suspicion threshold", gt=1.0, default=20.0)

    @classmethod
    def load(cls, config_path: Path | None, **flags: Any) -> "CliConfig":
        """Merge an optional config file with flags; flags that were given (not None) win

        Args:
            config_path: JSON document with any subset of the fields
            flags: Command-line values, None meaning "not given"

        Returns:
            The merged configuration
        """
        data: dict[str, Any] = {}
        if config_path is not None:
            if not config_path.exists():
                raise ConfigError(f"config file not found: {config_path}")
            loaded = read_json(config_path)
            if not isinstance(loaded, dict):
                raise ConfigError(f"config file must hold a JSON object: {config_path}")
            data.update(loaded)
        data.update({key: value for key, value in flags.items() if value is not None})
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"invalid configuration: {e}") from e
