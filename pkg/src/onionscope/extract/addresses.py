"""Bitcoin address candidate scanning and checksum validation.

Onion pages embed payment addresses as plain text, so extraction is a scan
for legacy Base58Check and bech32 shapes followed by strict checksum
validation. Candidates that fail their network checksum are dropped.
"""

from __future__ import annotations

import hashlib
import re
from typing import Iterable, Optional

_B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_B58_INDEX = {c: i for i, c in enumerate(_B58_ALPHABET)}

# P2PKH ('1') and P2SH ('3') mainnet shapes.
LEGACY_PATTERN = re.compile(r"\b[13][1-9A-HJ-NP-Za-km-z]{24,38}\b")
# Segwit bech32/bech32m, lowercase or uppercase (mixed case is invalid).
BECH32_PATTERN = re.compile(
    r"\b(?:bc1[qpzry9x8gf2tvdw0s3jn54khce6mua7l]{11,87}"
    r"|BC1[QPZRY9X8GF2TVDW0S3JN54KHCE6MUA7L]{11,87})\b"
)

BECH32_CHARSET = "qpzry9x8gf2tvdw0s3jn54khce6mua7l"
_BECH32_CONST = 1
_BECH32M_CONST = 0x2BC830A3


def base58check_decode(s: str) -> Optional[bytes]:
    """Decode a Base58Check string, returning the payload (version byte
    included) or None if the alphabet or the double-SHA256 checksum fails."""
    value = 0
    for ch in s:
        digit = _B58_INDEX.get(ch)
        if digit is None:
            return None
        value = value * 58 + digit
    n_leading = len(s) - len(s.lstrip("1"))
    body = value.to_bytes((value.bit_length() + 7) // 8, "big")
    decoded = b"\x00" * n_leading + body
    if len(decoded) < 5:
        return None
    payload, checksum = decoded[:-4], decoded[-4:]
    digest = hashlib.sha256(hashlib.sha256(payload).digest()).digest()
    if digest[:4] != checksum:
        return None
    return payload


def _is_valid_legacy(s: str) -> bool:
    payload = base58check_decode(s)
    if payload is None:
        return False
    # version byte + 20-byte hash for standard P2PKH/P2SH
    return len(payload) == 21 and payload[0] in (0x00, 0x05)


def _bech32_polymod(values: Iterable[int]) -> int:
    generator = (0x3B6A57B2, 0x26508E6D, 0x1EA119FA, 0x3D4233DD, 0x2A1462B3)
    chk = 1
    for value in values:
        top = chk >> 25
        chk = (chk & 0x1FFFFFF) << 5 ^ value
        for i in range(5):
            if (top >> i) & 1:
                chk ^= generator[i]
    return chk


def _bech32_hrp_expand(hrp: str) -> list[int]:
    return [ord(c) >> 5 for c in hrp] + [0] + [ord(c) & 31 for c in hrp]


def _convertbits(data: Iterable[int], frombits: int, tobits: int) -> Optional[list[int]]:
    # Strict (no padding) regrouping used for witness programs.
    acc = 0
    bits = 0
    out = []
    maxv = (1 << tobits) - 1
    for value in data:
        acc = (acc << frombits) | value
        bits += frombits
        while bits >= tobits:
            bits -= tobits
            out.append((acc >> bits) & maxv)
    if bits >= frombits or ((acc << (tobits - bits)) & maxv):
        return None
    return out


def _is_valid_bech32(s: str) -> bool:
    if s != s.lower() and s != s.upper():
        return False
    s = s.lower()
    pos = s.rfind("1")
    if pos < 1 or pos + 7 > len(s) or len(s) > 90:
        return False
    hrp, data_part = s[:pos], s[pos + 1 :]
    if hrp != "bc":
        return False
    try:
        data = [BECH32_CHARSET.index(c) for c in data_part]
    except ValueError:
        return False
    const = _bech32_polymod(_bech32_hrp_expand(hrp) + data)
    if const not in (_BECH32_CONST, _BECH32M_CONST):
        return False
    if len(data) < 7:
        return False
    witver, program5 = data[0], data[1:-6]
    if witver > 16:
        return False
    program = _convertbits(program5, 5, 8)
    if program is None or not 2 <= len(program) <= 40:
        return False
    if witver == 0:
        # v0 must be bech32 and carry a 20- or 32-byte program (BIP-173)
        return const == _BECH32_CONST and len(program) in (20, 32)
    return const == _BECH32M_CONST


def validate_address(candidate: str) -> Optional[str]:
    """The address kind ("legacy" or "segwit") when the candidate passes its
    network checksum, else None."""
    if candidate[:3].lower() == "bc1":
        return "segwit" if _is_valid_bech32(candidate) else None
    return "legacy" if _is_valid_legacy(candidate) else None


def scan_addresses(text: str) -> list[str]:
    """All checksum-valid address occurrences in the text, in document
    order, with repeats preserved (callers count occurrences)."""
    hits = []
    for pattern in (LEGACY_PATTERN, BECH32_PATTERN):
        for m in pattern.finditer(text):
            if validate_address(m.group(0)):
                hits.append((m.start(), m.group(0)))
    hits.sort()
    return [addr for _, addr in hits]
