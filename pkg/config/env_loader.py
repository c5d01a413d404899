import os
from pathlib import Path

from dotenv import load_dotenv

ENV_MARKER = "_SEMIGRAD_ENV_INITIALIZED"
PROJECT_ROOT = Path(__file__).parent.parent


def load_env(env_file: str | Path | None = None) -> bool:
    """
    Load ``.env`` into the process environment once.

    Variables already set in the environment win over the file. Returns
    whether a file was read; the command line runs on defaults without one.
    """
    if os.getenv(ENV_MARKER):
        return False

    env_file_path = Path(env_file) if env_file else PROJECT_ROOT / ".env"
    loaded = env_file_path.is_file() and load_dotenv(dotenv_path=env_file_path, override=False)
    os.environ[ENV_MARKER] = "true"
    return bool(loaded)
