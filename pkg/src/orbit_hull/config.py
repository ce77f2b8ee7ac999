import os

from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, Field

# Load .env file from the project root
load_dotenv(find_dotenv())


class Settings(BaseModel):
    """Process-wide defaults, read once from the environment."""
    tol: float = Field(default=1e-7, gt=0, description="Default membership tolerance.")
    seed: int = Field(default=0, ge=0, description="Default seed for randomized suites.")
    log_dir: str = Field(default="logs", description="Directory receiving the log file.")
    log_level: str = Field(default="INFO", description="Level of the file handler.")


def get_settings() -> Settings:
    """Builds Settings from ORBIT_HULL_* environment variables."""
    values = {
        "tol": os.getenv("ORBIT_HULL_TOL"),
        "seed": os.getenv("ORBIT_HULL_SEED"),
        "log_dir": os.getenv("ORBIT_HULL_LOG_DIR"),
        "log_level": os.getenv("ORBIT_HULL_LOG_LEVEL"),
    }
    return Settings(**{key: value for key, value in values.items() if value is not None})
