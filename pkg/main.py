import sys
from typing import Optional, Sequence

from config.env_loader import load_env
from config.threads import apply_thread_cap

# BLAS reads its thread count once, when numpy is first imported.
load_env()
apply_thread_cap()

from config.env_validator import validate_env_vars  # noqa: E402
from custom_utilities.custom_exception import CustomException  # noqa: E402
from custom_utilities.logging_setup import configure_logging  # noqa: E402
from routers import cli_router  # noqa: E402


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        settings = validate_env_vars()
    except CustomException as exc:
        print(exc.to_line(), file=sys.stderr)
        return int(exc.exit_code)

    configure_logging(settings)
    return cli_router.run(argv, default_seed=settings.default_seed)


if __name__ == "__main__":
    sys.exit(main())
