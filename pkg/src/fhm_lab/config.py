"""Configuration management for the f-harmonic measure laboratory."""

from functools import lru_cache
from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    log_level: str = "INFO"
    log_json: bool = False
    output_dir: str = "outputs"
    # 17 significant digits round-trips every float64
    float_format: str = "%.17g"
    model_config = SettingsConfigDict(
        env_file=".env", env_prefix="FHM_", extra="ignore"
    )

@lru_cache
def get_settings() -> Settings:
    # lazy, validated on first use only
    return Settings()

def __getattr__(name: str):
    # allows:  from fhm_lab.config import settings
    if name == "settings":
        return get_settings()
    raise AttributeError(name)
