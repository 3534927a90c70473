"""
5GPP: the 20-bit covert command-and-control header.

Wire layout (bit 1 is the most significant bit of the 20-bit word):

    bits  1-4   key id            clear
    bits  5-6   routing option    clear
    bits  7-9   time-to-live      clear
    bit   10    split indication  encrypted
    bits 11-13  execution point   encrypted
    bits 14-16  attack id         encrypted
    bits 17-18  attack type       encrypted
    bits 19-20  exit point        encrypted

Every field is listed with 1-based code values; the wire carries value - 1 so
each value fits its width. The encrypted region is XORed with a keystream
keyed by the key id, so only holders of that key can read execution and exit
points, while any node can still route on the clear bits.

Bit strings are plain str objects of '0' and '1' characters.
"""

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Union

from src.core_model import AttackType, NodeId, RoutingOption
from src.errors import CapacityTooSmall, ConflictingTotals, FieldOutOfRange, MissingKey


HEADER_BITS = 20
CLEAR_BITS = 9
ENCRYPTED_BITS = 11
MAX_KEYS = 16
KEY_BYTES = 16

EXECUTION_CODES: Dict[NodeId, int] = {
    NodeId.UDM: 1, NodeId.AMF: 2, NodeId.GNB: 3, NodeId.SMF: 4,
    NodeId.UPF: 5, NodeId.AUSF: 6, NodeId.PCF: 7, NodeId.NEF: 8,
}
EXIT_CODES: Dict[NodeId, int] = {NodeId.UE: 1, NodeId.UPF: 2, NodeId.SEPP: 3, NodeId.NEF: 4}

_EXECUTION_BY_CODE = {code: node for node, code in EXECUTION_CODES.items()}
_EXIT_BY_CODE = {code: node for node, code in EXIT_CODES.items()}

BitString = str


def int_to_bits(value: int, width: int) -> BitString:
    if width == 0:
        return ""
    return format(value, f"0{width}b")


def bits_to_int(bits: BitString) -> int:
    return int(bits, 2) if bits else 0


# Keystream ciphers

class KeystreamCipher(ABC):
    """Self-inverse cipher: output = input XOR keystream(key, salt)"""

    name = "abstract"

    @abstractmethod
    def keystream(self, key: bytes, salt: BitString, length: int) -> int:
        """Return `length` keystream bits as an integer"""


class ShakeKeystream(KeystreamCipher):
    """Keyed pseudorandom generator built on SHAKE-256(key || salt)"""

    name = "shake"

    def keystream(self, key, salt, length):
        if length == 0:
            return 0
        n_bytes = (length + 7) // 8
        digest = hashlib.shake_256(key + b"|" + salt.encode("ascii")).digest(n_bytes)
        return int.from_bytes(digest, "big") >> (8 * n_bytes - length)


class IdentityKeystream(KeystreamCipher):
    """All-zero keystream, for tests and hand-checkable encodings"""

    name = "identity"

    def keystream(self, key, salt, length):
        return 0


CIPHERS: Dict[str, KeystreamCipher] = {c.name: c for c in (ShakeKeystream(), IdentityKeystream())}
DEFAULT_CIPHER = CIPHERS["shake"]


def get_cipher(name: str) -> KeystreamCipher:
    try:
        return CIPHERS[name]
    except KeyError:
        raise ValueError(f"unknown cipher '{name}' (expected one of {', '.join(sorted(CIPHERS))})") from None


def cipher_transform(bits: BitString, key: bytes, salt: BitString,
                     cipher: KeystreamCipher = DEFAULT_CIPHER) -> BitString:
    """XOR `bits` with the keystream; applying it twice restores the input"""
    if not bits:
        return ""
    stream = cipher.keystream(key, salt, len(bits))
    return int_to_bits(bits_to_int(bits) ^ stream, len(bits))


def derive_key(key_id: int, seed: int = 0) -> bytes:
    """Deterministic 128-bit key material for a key id"""
    return hashlib.sha256(f"k_attack:{seed}:{key_id}".encode("ascii")).digest()[:KEY_BYTES]


@dataclass
class Keyring:
    """Symmetric keys a node holds, indexed by 4-bit key id"""
    entries: Dict[int, bytes] = field(default_factory=dict)
    cipher: KeystreamCipher = DEFAULT_CIPHER

    def __post_init__(self):
        if len(self.entries) > MAX_KEYS:
            raise ValueError(f"a keyring holds at most {MAX_KEYS} keys")
        for key_id in self.entries:
            if not 1 <= key_id <= MAX_KEYS:
                raise FieldOutOfRange("key_id", key_id)

    def __contains__(self, key_id):
        return key_id in self.entries

    def key(self, key_id: int) -> bytes:
        try:
            return self.entries[key_id]
        except KeyError:
            raise MissingKey(key_id) from None

    @classmethod
    def derived(cls, key_ids, seed: int = 0, cipher: KeystreamCipher = DEFAULT_CIPHER) -> "Keyring":
        return cls({key_id: derive_key(key_id, seed) for key_id in key_ids}, cipher)


# Header

@dataclass(frozen=True)
class GppHeader:
    key_id: int
    routing_option: RoutingOption
    ttl: int
    split: bool
    execution_point: NodeId
    attack_id: int
    attack_type: AttackType
    exit_point: NodeId


@dataclass(frozen=True)
class Undecryptable:
    """Clear region of a header whose key the decoding node does not hold"""
    key_id: int
    routing_option: RoutingOption
    ttl: int


def _check_range(name, value, low, high):
    if not isinstance(value, int) or isinstance(value, bool) or not low <= value <= high:
        raise FieldOutOfRange(name, value)


TTL_MASK = 0b111 << ENCRYPTED_BITS


def _header_salt(clear: int, fragment_index: int) -> BitString:
    # TTL stays out of the salt so relays can rewrite it without the key
    return int_to_bits(clear >> 3, CLEAR_BITS - 3) + format(fragment_index, "b")


def ttl_of(word: int) -> int:
    return ((word & TTL_MASK) >> ENCRYPTED_BITS) + 1


def with_ttl(word: int, ttl: int) -> int:
    """Rewrite the clear TTL field of an encoded header"""
    _check_range("ttl", ttl, 1, 8)
    return (word & ~TTL_MASK) | ((ttl - 1) << ENCRYPTED_BITS)


def encode_header(h: GppHeader, keyring: Keyring, fragment_index: int = 0) -> int:
    """Pack a header into a 20-bit word, encrypting bits 10-20"""
    _check_range("key_id", h.key_id, 1, MAX_KEYS)
    _check_range("ttl", h.ttl, 1, 8)
    _check_range("attack_id", h.attack_id, 1, 8)
    if not isinstance(h.routing_option, RoutingOption):
        raise FieldOutOfRange("routing_option", h.routing_option)
    if not isinstance(h.attack_type, AttackType):
        raise FieldOutOfRange("attack_type", h.attack_type)
    if h.execution_point not in EXECUTION_CODES:
        raise FieldOutOfRange("execution_point", h.execution_point)
    if h.exit_point not in EXIT_CODES:
        raise FieldOutOfRange("exit_point", h.exit_point)
    key = keyring.key(h.key_id)

    clear = ((h.key_id - 1) << 5) | ((h.routing_option.value - 1) << 3) | (h.ttl - 1)
    secret = ((int(bool(h.split)) << 10)
              | ((EXECUTION_CODES[h.execution_point] - 1) << 7)
              | ((h.attack_id - 1) << 4)
              | ((h.attack_type.value - 1) << 2)
              | (EXIT_CODES[h.exit_point] - 1))
    secret ^= keyring.cipher.keystream(key, _header_salt(clear, fragment_index), ENCRYPTED_BITS)
    return (clear << ENCRYPTED_BITS) | secret


def decode_header(word: int, keyring: Keyring, fragment_index: int = 0) -> Union[GppHeader, Undecryptable]:
    """Unpack a 20-bit word; without the key only the clear fields come back"""
    if not 0 <= word < (1 << HEADER_BITS):
        raise FieldOutOfRange("word", word)
    clear = word >> ENCRYPTED_BITS
    key_id = (clear >> 5) + 1
    routing_code = ((clear >> 3) & 0b11) + 1
    ttl = (clear & 0b111) + 1
    try:
        routing = RoutingOption(routing_code)
    except ValueError:
        raise FieldOutOfRange("routing_option", routing_code) from None

    if key_id not in keyring:
        return Undecryptable(key_id, routing, ttl)

    secret = word & ((1 << ENCRYPTED_BITS) - 1)
    secret ^= keyring.cipher.keystream(keyring.key(key_id), _header_salt(clear, fragment_index), ENCRYPTED_BITS)
    type_code = ((secret >> 2) & 0b11) + 1
    try:
        attack_type = AttackType(type_code)
    except ValueError:
        raise FieldOutOfRange("attack_type", type_code) from None
    return GppHeader(
        key_id=key_id,
        routing_option=routing,
        ttl=ttl,
        split=bool(secret >> 10),
        execution_point=_EXECUTION_BY_CODE[((secret >> 7) & 0b111) + 1],
        attack_id=((secret >> 4) & 0b111) + 1,
        attack_type=attack_type,
        exit_point=_EXIT_BY_CODE[(secret & 0b11) + 1],
    )


# Fragmentation

@dataclass(frozen=True)
class Fragment:
    header: GppHeader
    payload_bits: BitString
    fragment_index: int
    total_fragments: int
    header_bits: int = HEADER_BITS

    @property
    def wire_bits(self) -> int:
        """Bits the fragment occupies in a carrier message"""
        return self.header_bits + len(self.payload_bits)


@dataclass(frozen=True)
class Incomplete:
    missing: int


def fragment_payload(payload: BitString, per_message_capacity: int, header: GppHeader,
                     header_bits: int = HEADER_BITS) -> List[Fragment]:
    """
    Split a payload so every fragment, header included, fits one message.

    Index and total travel with the carrier rather than inside the payload,
    so a 21-bit message still moves one payload bit.
    """
    minimum = header_bits + 1
    if per_message_capacity < minimum:
        raise CapacityTooSmall(per_message_capacity, minimum)
    if not payload:
        return []
    room = per_message_capacity - header_bits
    chunks = [payload[i:i + room] for i in range(0, len(payload), room)]
    total = len(chunks)
    stamped = replace(header, split=total > 1)
    return [Fragment(stamped, chunk, index, total, header_bits) for index, chunk in enumerate(chunks)]


def reassemble(fragments: List[Fragment]) -> Union[BitString, Incomplete]:
    """Concatenate fragments in index order once every piece is present"""
    if not fragments:
        return ""
    totals = {f.total_fragments for f in fragments}
    if len(totals) > 1:
        raise ConflictingTotals(totals)
    total = totals.pop()
    by_index = {}
    for fragment in fragments:
        by_index.setdefault(fragment.fragment_index, fragment)
    present = sum(1 for index in by_index if 0 <= index < total)
    if present < total:
        return Incomplete(total - present)
    return "".join(by_index[index].payload_bits for index in range(total))


def header_for(key_id: int, routing: RoutingOption, ttl: int, execution: NodeId, attack_id: int,
               attack_type: AttackType, exit_point: Optional[NodeId]) -> GppHeader:
    """Build a header for an attack; a missing exit point is filled with the UE code"""
    return GppHeader(
        key_id=key_id,
        routing_option=routing,
        ttl=ttl,
        split=False,
        execution_point=execution,
        attack_id=attack_id,
        attack_type=attack_type,
        exit_point=exit_point if exit_point is not None else NodeId.UE,
    )
