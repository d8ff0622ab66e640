"""Packed bit files: 8-byte little-endian bit count, then MSB-first bytes."""
from __future__ import annotations

import struct

from .bitcore import check_bits
from .errors import FormatError

_HEADER = struct.Struct("<Q")


def bytes_to_bits(data: bytes) -> str:
    """Unpack raw bytes most-significant bit first."""
    return "".join(format(b, "08b") for b in data)


def bits_to_bytes(bits: str) -> bytes:
    """Pack whole bytes MSB first; ``len(bits)`` must be a multiple of 8."""
    check_bits(bits)
    if len(bits) % 8:
        raise ValueError("bit count is not a multiple of 8")
    return bytes(int(bits[i:i + 8], 2) for i in range(0, len(bits), 8))


def pack_bits(bits: str) -> bytes:
    check_bits(bits)
    pad = -len(bits) % 8
    return _HEADER.pack(len(bits)) + bits_to_bytes(bits + "0" * pad)


def unpack_bits(data: bytes) -> str:
    if len(data) < _HEADER.size:
        raise FormatError("bitstream shorter than its 8-byte header")
    (count,) = _HEADER.unpack_from(data)
    body = data[_HEADER.size:]
    if len(body) != (count + 7) // 8:
        raise FormatError(f"header announces {count} bits but body has {len(body)} bytes")
    bits = bytes_to_bits(body)
    if bits[count:].strip("0"):
        raise FormatError("nonzero padding bits")
    return bits[:count]
