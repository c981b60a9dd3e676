"""Address recognition against an independently written checksum oracle."""

import hashlib
import random
import string

import pytest

from onionscope.extract.addresses import (
    BECH32_CHARSET,
    base58check_decode,
    scan_addresses,
    validate_address,
)

B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"

GENESIS = "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa"


def oracle_base58check(addr: str) -> bool:
    """Base58Check written from the encoding definition, not from the
    implementation under test: big-integer decode, leading-'1' zero bytes,
    double-SHA256 checksum over the payload, 21-byte payload, version 0 or 5.
    """
    num = 0
    for ch in addr:
        idx = B58_ALPHABET.find(ch)
        if idx < 0:
            return False
        num = num * 58 + idx
    raw = num.to_bytes((num.bit_length() + 7) // 8, "big")
    pad = 0
    for ch in addr:
        if ch == "1":
            pad += 1
        else:
            break
    raw = b"\x00" * pad + raw
    if len(raw) != 25:
        return False
    payload, checksum = raw[:-4], raw[-4:]
    digest = hashlib.sha256(hashlib.sha256(payload).digest()).digest()[:4]
    if digest != checksum:
        return False
    return payload[0] in (0x00, 0x05)


def b58_encode(raw: bytes) -> str:
    num = int.from_bytes(raw, "big")
    out = []
    while num:
        num, rem = divmod(num, 58)
        out.append(B58_ALPHABET[rem])
    pad = 0
    for b in raw:
        if b == 0:
            pad += 1
        else:
            break
    return "1" * pad + "".join(reversed(out))


def make_legacy(version: int, payload20: bytes) -> str:
    body = bytes([version]) + payload20
    checksum = hashlib.sha256(hashlib.sha256(body).digest()).digest()[:4]
    return b58_encode(body + checksum)


class TestLegacy:
    def test_genesis_address_valid(self):
        assert validate_address(GENESIS) == "legacy"
        assert oracle_base58check(GENESIS)

    def test_genesis_last_char_mutated_invalid(self):
        broken = GENESIS[:-1] + ("b" if GENESIS[-1] != "b" else "c")
        assert validate_address(broken) is None
        assert not oracle_base58check(broken)

    def test_p2sh_version_accepted(self):
        addr = make_legacy(0x05, bytes(20))
        assert validate_address(addr) == "legacy"

    def test_other_version_rejected(self):
        addr = make_legacy(0x6F, bytes(20))  # testnet prefix
        assert validate_address(addr) is None

    def test_decode_matches_oracle_on_random_payloads(self):
        rng = random.Random(1311)
        for _ in range(300):
            version = rng.choice([0x00, 0x05])
            payload = rng.randbytes(20)
            addr = make_legacy(version, payload)
            assert validate_address(addr) == "legacy"
            assert oracle_base58check(addr)
            decoded = base58check_decode(addr)
            assert decoded is not None and decoded[0] == version

    def test_mutations_always_fail_both(self):
        rng = random.Random(99)
        for _ in range(300):
            addr = make_legacy(0x00, rng.randbytes(20))
            pos = rng.randrange(len(addr))
            repl = rng.choice([c for c in B58_ALPHABET if c != addr[pos]])
            broken = addr[:pos] + repl + addr[pos + 1:]
            assert (validate_address(broken) == "legacy") == oracle_base58check(broken)


def bech32_polymod_oracle(values):
    gen = [0x3B6A57B2, 0x26508E6D, 0x1EA119FA, 0x3D4233DD, 0x2A1462B3]
    chk = 1
    for v in values:
        top = chk >> 25
        chk = (chk & 0x1FFFFFF) << 5 ^ v
        for i in range(5):
            if (top >> i) & 1:
                chk ^= gen[i]
    return chk


def make_segwit(witver: int, program: bytes, hrp: str = "bc") -> str:
    """Reference encoder from BIP-173/350 pseudocode."""
    spec_const = 1 if witver == 0 else 0x2BC830A3
    data = [witver]
    acc = bits = 0
    for b in program:
        acc = (acc << 8) | b
        bits += 8
        while bits >= 5:
            bits -= 5
            data.append((acc >> bits) & 31)
    if bits:
        data.append((acc << (5 - bits)) & 31)
    hrp_exp = [ord(c) >> 5 for c in hrp] + [0] + [ord(c) & 31 for c in hrp]
    polymod = bech32_polymod_oracle(hrp_exp + data + [0] * 6) ^ spec_const
    checksum = [(polymod >> 5 * (5 - i)) & 31 for i in range(6)]
    return hrp + "1" + "".join(BECH32_CHARSET[d] for d in data + checksum)


class TestSegwit:
    def test_v0_p2wpkh(self):
        addr = make_segwit(0, bytes(20))
        assert validate_address(addr) == "segwit"

    def test_v0_p2wsh(self):
        addr = make_segwit(0, bytes(32))
        assert validate_address(addr) == "segwit"

    def test_v1_taproot_needs_bech32m(self):
        good = make_segwit(1, bytes(32))
        assert validate_address(good) == "segwit"

    def test_v0_with_bech32m_constant_rejected(self):
        # build v0 with the wrong checksum constant
        data = [0]
        program = bytes(20)
        acc = bits = 0
        vals = []
        for b in program:
            acc = (acc << 8) | b
            bits += 8
            while bits >= 5:
                bits -= 5
                vals.append((acc >> bits) & 31)
        data += vals
        hrp_exp = [ord(c) >> 5 for c in "bc"] + [0] + [ord(c) & 31 for c in "bc"]
        polymod = bech32_polymod_oracle(hrp_exp + data + [0] * 6) ^ 0x2BC830A3
        checksum = [(polymod >> 5 * (5 - i)) & 31 for i in range(6)]
        addr = "bc1" + "".join(BECH32_CHARSET[d] for d in data + checksum)
        assert validate_address(addr) is None

    def test_bad_program_length_rejected(self):
        addr = make_segwit(0, bytes(25))
        assert validate_address(addr) is None

    def test_mixed_case_rejected(self):
        addr = make_segwit(0, bytes(20))
        mixed = addr[:4] + addr[4].upper() + addr[5:]
        if mixed != addr:
            assert validate_address(mixed) is None

    def test_random_programs_roundtrip(self):
        rng = random.Random(7)
        for _ in range(200):
            witver = rng.choice([0, 0, 1, 2, 16])
            size = rng.choice([20, 32]) if witver == 0 else rng.randrange(2, 41)
            addr = make_segwit(witver, rng.randbytes(size))
            assert validate_address(addr) == "segwit"


class TestScan:
    def test_scan_finds_in_prose(self):
        text = f"send donations to {GENESIS} thanks"
        assert scan_addresses(text) == [GENESIS]

    def test_scan_drops_checksum_failures(self):
        broken = GENESIS[:-1] + "b"
        text = f"maybe {broken} or {GENESIS}"
        assert scan_addresses(text) == [GENESIS]

    def test_scan_preserves_order_and_repeats(self):
        other = make_legacy(0x00, bytes(range(20)))
        text = f"{GENESIS} then {other} then {GENESIS} again"
        assert scan_addresses(text) == [GENESIS, other, GENESIS]

    def test_scan_respects_word_boundaries(self):
        # embedded in a longer base58 run: the regex must not carve a prefix
        text = f"x{GENESIS}"
        hits = scan_addresses(text)
        assert GENESIS not in hits

    def test_scan_segwit_uppercase_form(self):
        addr = make_segwit(0, bytes(20)).upper()
        assert scan_addresses(f"PAY {addr} NOW") == [addr]

    def test_fuzz_random_text_no_false_positives(self):
        rng = random.Random(4242)
        alphabet = string.ascii_letters + string.digits + " .,:/\n"
        for _ in range(200):
            blob = "".join(rng.choice(alphabet) for _ in range(400))
            for hit in scan_addresses(blob):
                # anything reported must satisfy the independent oracle
                assert oracle_base58check(hit) or validate_address(hit) == "segwit"
