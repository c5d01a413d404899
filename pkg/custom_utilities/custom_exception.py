from enums.cli import ExitCode


class CustomException(Exception):
    """
    Base error for the engine, the attacks and the command line.

    Attributes:
        message (str): The error message to be displayed.
        exit_code (ExitCode): Process exit code the CLI returns for this error.
        data (dict): Optional extra data describing the failure.
    """
    default_exit_code = ExitCode.NUMERIC_FAILURE

    def __init__(self, message, exit_code=None, data=None):
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code if exit_code is not None else self.default_exit_code
        self.data = data or {}

    def __str__(self):
        return self.message

    def to_line(self) -> str:
        """Single-line, machine-parsable rendering used on stderr."""
        text = self.message.replace('"', "'").replace("\n", " ")
        return f'error code={int(self.exit_code)} kind={type(self).__name__} message="{text}"'


class ShapeMismatchError(CustomException):
    default_exit_code = ExitCode.LOAD_FAILURE

    def __init__(self, message, left=None, right=None):
        super().__init__(
            f"{message}: {tuple(left) if left is not None else None} vs {tuple(right) if right is not None else None}",
            data={"left": left, "right": right},
        )


class NonFiniteError(CustomException):
    default_exit_code = ExitCode.NUMERIC_FAILURE

    def __init__(self, message, step=None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message, data={"step": step})
        self.step = step


class TapeError(CustomException):
    default_exit_code = ExitCode.NUMERIC_FAILURE


class DataLoadError(CustomException):
    default_exit_code = ExitCode.LOAD_FAILURE

    def __init__(self, message, offset=None, path=None):
        if offset is not None:
            message = f"{message} at offset {offset}"
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message, data={"offset": offset, "path": str(path) if path else None})
        self.offset = offset


class ConfigError(CustomException):
    default_exit_code = ExitCode.BAD_FLAGS
