"""Deterministic seed derivation.

All randomness in the package flows from a single integer seed.  Sub-seeds for
independent purposes (reservoir retries, probe loops, sweep cells, ...) are
derived by hashing the root seed together with string/integer labels, so that
adding a consumer never shifts the random stream of another.
"""

import hashlib


def derive(seed: int, *labels) -> int:
    """Derive a 64-bit sub-seed from `seed` and a label path.

    The same (seed, labels) always yields the same value; distinct label paths
    are independent for all practical purposes (SHA-256 based).
    """
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for lab in labels:
        h.update(b"/")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest()[:8], "little")
