# app/core/config.py
from pydantic_settings import BaseSettings
from typing import List, Optional


class Settings(BaseSettings):
    # Project
    PROJECT_NAME: str = "nilgeo"
    VERSION: str = "1.0.0"
    API_V1_STR: str = "/api/v1"
    DEBUG: bool = False

    # Environment
    ENVIRONMENT: str = "development"  # development, production

    # CORS Settings (HTTP surface)
    ALLOWED_ORIGINS: List[str] = ["http://localhost:3000", "http://127.0.0.1:3000"]
    MAX_REQUEST_BYTES: int = 1_000_000

    # Metric search
    SEED: int = 42
    BUDGET: int = 10_000  # numeric iterations per search
    RESTARTS: int = 8
    MAX_DENOMINATOR_DOUBLINGS: int = 24  # rationalization bounds 1, 2, 4, ..., 2**k
    NUMERIC_TOLERANCE: float = 1e-9

    # Inputs
    MAX_DIMENSION: int = 6

    # Reports
    SCHEMA_VERSION: int = 1

    # Monitoring Settings
    LOG_LEVEL: str = "WARNING"
    LOG_FILE: Optional[str] = None

    class Config:
        env_file = ".env"
        env_prefix = "NILGEO_"
        case_sensitive = True

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self._validate_settings()

    def _validate_settings(self):
        """Validate critical settings"""
        if self.ENVIRONMENT == "production" and self.DEBUG:
            raise ValueError("DEBUG must be False in production")
        if self.BUDGET < 1:
            raise ValueError("BUDGET must be a positive number of iterations")
        if self.RESTARTS < 1:
            raise ValueError("RESTARTS must be at least 1")
        if not 1 <= self.MAX_DIMENSION <= 6:
            raise ValueError("MAX_DIMENSION must lie in 1..6")


# Create settings instance
settings = Settings()
