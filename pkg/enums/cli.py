from enum import IntEnum


class ExitCode(IntEnum):
    OK = 0
    BAD_FLAGS = 2
    LOAD_FAILURE = 3
    NUMERIC_FAILURE = 4
