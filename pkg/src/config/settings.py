"""
Application Settings
Environment configuration management using Pydantic
"""
from typing import Optional
from functools import lru_cache
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class RuntimeSettings(BaseSettings):
    """Runtime settings shared by every subcommand"""
    num_workers: int = Field(default=1, ge=1, validation_alias="INTEL_NUM_WORKERS")
    device: str = Field(default="cpu", validation_alias="INTEL_DEVICE")
    deterministic: bool = Field(default=True, validation_alias="INTEL_DETERMINISTIC")

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=False,
        extra="allow"  # Allow extra fields in .env
    )


class LoggingSettings(BaseSettings):
    """Logging settings"""
    level: str = Field(default="INFO", validation_alias="LOG_LEVEL")
    format: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        validation_alias="LOG_FORMAT"
    )
    file_path: Optional[str] = Field(default=None, validation_alias="LOG_FILE_PATH")

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=False,
        extra="allow"
    )


class Settings:
    """Main settings class - simplified to avoid nested validation issues"""
    def __init__(self):
        self.runtime = RuntimeSettings()
        self.logging = LoggingSettings()


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
