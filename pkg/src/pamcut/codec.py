"""Hex <-> spin-configuration codec.

A configuration of n spins is published as a string of ceil(n/4) hex
digits. Each digit expands to 4 bits, most-significant bit first; bit k
(1-based) belongs to variable k; bit 1 maps to spin +1 and bit 0 to -1.
When 4*len > n the trailing pad bits must be zero.
"""

from __future__ import annotations

import numpy as np

from .graph import as_spins

_HEX = "0123456789abcdef"


class CodecError(ValueError):
    pass


def hex_length(n: int) -> int:
    return (n + 3) // 4


def decode_hex(text: str, n: int) -> np.ndarray:
    """Decode a hex solution string into an int8 spin vector of length n."""
    if n < 1:
        raise CodecError(f"node count must be positive, got {n}")
    h = text.strip().lower()
    want = hex_length(n)
    if len(h) != want:
        raise CodecError(f"hex string has {len(h)} digits, expected {want} for n={n}")
    try:
        digits = np.array([_HEX.index(c) for c in h], dtype=np.uint8)
    except ValueError:
        bad = next(c for c in h if c not in _HEX)
        raise CodecError(f"invalid hex character {bad!r}") from None
    shifts = np.array([3, 2, 1, 0], dtype=np.uint8)
    bits = ((digits[:, None] >> shifts) & 1).reshape(-1)
    pad = bits[n:]
    if pad.any():
        raise CodecError(f"{int(pad.sum())} nonzero padding bit(s) beyond position {n}")
    return (bits[:n].astype(np.int8) * 2) - 1


def encode_hex(s) -> str:
    """Encode a spin vector as lowercase hex (round-trips with decode_hex)."""
    spins = as_spins(s)
    n = spins.shape[0]
    bits = (spins > 0).astype(np.uint8)
    padded = np.zeros(4 * hex_length(n), dtype=np.uint8)
    padded[:n] = bits
    quads = padded.reshape(-1, 4)
    digits = quads[:, 0] * 8 + quads[:, 1] * 4 + quads[:, 2] * 2 + quads[:, 3]
    return "".join(_HEX[d] for d in digits)


def random_config(n: int, rng: np.random.Generator) -> np.ndarray:
    """n independent fair spins drawn from the given generator."""
    if n < 1:
        raise CodecError(f"node count must be positive, got {n}")
    return (rng.integers(0, 2, size=n, dtype=np.int8) * 2) - 1


def spins_to_text(s) -> str:
    """One spin per line, as '1' / '-1'."""
    spins = as_spins(s)
    return "\n".join(str(int(v)) for v in spins) + "\n"


def spins_from_text(text: str) -> np.ndarray:
    """Parse one-spin-per-line text; accepts '1', '+1' and '-1'."""
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tok = raw.strip()
        if not tok:
            continue
        if tok in ("1", "+1"):
            values.append(1)
        elif tok == "-1":
            values.append(-1)
        else:
            raise CodecError(f"line {lineno}: expected +1 or -1, got {tok!r}")
    if not values:
        raise CodecError("no spins found")
    return np.asarray(values, dtype=np.int8)


def read_hex_token(text: str) -> str:
    """Collapse a hex string that may be wrapped over several lines."""
    return "".join(text.split())
