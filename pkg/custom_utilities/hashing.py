import hashlib

import numpy as np


def tensor_digest(array: np.ndarray) -> str:
    """SHA-256 over the shape and little-endian float64 bytes of ``array``."""
    data = np.ascontiguousarray(array, dtype="<f8")
    digest = hashlib.sha256()
    digest.update(repr(tuple(data.shape)).encode())
    digest.update(data.tobytes())
    return digest.hexdigest()
