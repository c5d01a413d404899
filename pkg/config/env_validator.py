from pydantic import ValidationError

from config.settings import Settings, get_settings
from custom_utilities.custom_exception import ConfigError

ENV_NAMES = {
    "threads": "SEMIGRAD_THREADS",
    "log_level": "SEMIGRAD_LOG_LEVEL",
    "log_file": "SEMIGRAD_LOG_FILE",
    "default_seed": "SEMIGRAD_DEFAULT_SEED",
}


def validate_env_vars() -> Settings:
    try:
        return get_settings()
    except ValidationError as exc:
        bad_vars = sorted({ENV_NAMES.get(str(err["loc"][0]), str(err["loc"][0])) for err in exc.errors()})
        raise ConfigError(f"Invalid environment variables: {', '.join(bad_vars)}") from exc
