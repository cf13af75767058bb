import os
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional

class Settings(BaseSettings):
    # Server Config
    PORT: int = 8000
    LOG_LEVEL: str = "INFO"

    # Sweep execution
    SWEEP_WORKERS: int = Field(default=1, ge=1)
    MAX_API_EPISODES: int = Field(default=500, ge=0)

    # Experiment config used when no --config is given
    DEFAULT_CONFIG_PATH: Optional[str] = None

    # Paths
    BASE_DIR: str = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    OUTPUT_DIR: str = os.path.join(BASE_DIR, "results")
    MODEL_DIR: str = os.path.join(BASE_DIR, "models_store")

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

settings = Settings()

# Ensure directories exist
os.makedirs(settings.OUTPUT_DIR, exist_ok=True)
os.makedirs(settings.MODEL_DIR, exist_ok=True)
