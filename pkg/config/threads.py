import os

THREAD_ENV_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def apply_thread_cap(threads: int | str | None = None) -> int:
    """Pin BLAS thread pools. Only effective before numpy is first imported."""
    if threads is None:
        threads = os.getenv("SEMIGRAD_THREADS", "1")
    try:
        count = max(1, int(threads))
    except ValueError:
        count = 1
    for name in THREAD_ENV_VARS:
        os.environ[name] = str(count)
    return count
