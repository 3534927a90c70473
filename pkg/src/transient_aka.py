"""
Key extraction over the authentication transient channels.

The UE puts the encrypted target SUPI into the 64-bit MAC tag of its SUCI,
which gNB, AMF and AUSF relay untouched to the UDM. The compromised UDM looks
up the target's long-term key and returns it encrypted inside RAND and AUTN,
which travel back to the UE just as unmodified. No 5GPP header is used; both
ends know the layout in advance.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from src.catalog import LONG_TERM_KEY_BITS, MAC_TAG_BITS, RAND_AUTN_BITS, SUPI_BITS
from src.errors import FieldOutOfRange, TargetUnknown
from src.fivegpp import Keyring, bits_to_int, cipher_transform, int_to_bits


KEYS_PER_CARRIER = RAND_AUTN_BITS // LONG_TERM_KEY_BITS
KEY_BYTES = LONG_TERM_KEY_BITS // 8

# Separate salt spaces so the two directions never share keystream
FORWARD_SALT = "0"
BACKWARD_SALT = "1"


@dataclass
class SubscriberKeyStore:
    """Long-term subscriber keys as held by the UDM, indexed by SUPI"""
    keys: Dict[int, bytes] = field(default_factory=dict)

    def __contains__(self, supi):
        return supi in self.keys

    def __len__(self):
        return len(self.keys)

    def lookup(self, supi: int) -> bytes:
        try:
            return self.keys[supi]
        except KeyError:
            raise TargetUnknown(supi) from None


@dataclass(frozen=True)
class AttackScript:
    targets: Tuple[int, ...]
    # 64-bit MAC tag contents, one per target
    forward_carriers: Tuple[str, ...]
    # 256-bit RAND+AUTN contents, two keys each
    backward_carriers: Tuple[str, ...]
    recovered: Dict[int, bytes]

    @property
    def procedures_needed(self) -> int:
        """Registrations until every key is back; the last key rides with the last SUPI"""
        return len(self.forward_carriers)

    def steps(self) -> List[str]:
        lines = []
        for index, supi in enumerate(self.targets):
            lines.append(f"registration {index + 1}: UE -> UDM MAC tag carries SUPI {supi:#018x}")
        for index in range(len(self.backward_carriers)):
            batch_end = min(len(self.targets), (index + 1) * KEYS_PER_CARRIER)
            lines.append(f"registration {batch_end}: UDM -> UE RAND+AUTN carries key(s) "
                         f"{index * KEYS_PER_CARRIER + 1}-{batch_end}")
        return lines


def _salt(direction: str, index: int) -> str:
    return direction + format(index, "b")


def _chunks(items: Sequence, size: int) -> Iterable[Sequence]:
    for start in range(0, len(items), size):
        yield items[start:start + size]


def transient_aka_attack(target_supis: Union[int, Sequence[int]], keyring: Keyring,
                         key_store: SubscriberKeyStore, key_id: int = 1) -> AttackScript:
    """Script the full exchange for one or more target subscribers"""
    targets = (target_supis,) if isinstance(target_supis, int) else tuple(target_supis)
    for supi in targets:
        if not 0 <= supi < (1 << SUPI_BITS):
            raise FieldOutOfRange("supi", supi)
    key = keyring.key(key_id)
    cipher = keyring.cipher

    # UE side
    forward = tuple(
        cipher_transform(int_to_bits(supi, MAC_TAG_BITS), key, _salt(FORWARD_SALT, index), cipher)
        for index, supi in enumerate(targets)
    )

    # UDM side
    extracted = []
    for index, carrier in enumerate(forward):
        supi = bits_to_int(cipher_transform(carrier, key, _salt(FORWARD_SALT, index), cipher))
        long_term = key_store.lookup(supi)
        extracted.append(int_to_bits(int.from_bytes(long_term, "big"), LONG_TERM_KEY_BITS))

    backward = []
    for index, batch in enumerate(_chunks(extracted, KEYS_PER_CARRIER)):
        plain = "".join(batch).ljust(RAND_AUTN_BITS, "0")
        backward.append(cipher_transform(plain, key, _salt(BACKWARD_SALT, index), cipher))

    # exit side
    recovered = {}
    for index, carrier in enumerate(backward):
        plain = cipher_transform(carrier, key, _salt(BACKWARD_SALT, index), cipher)
        batch = targets[index * KEYS_PER_CARRIER:(index + 1) * KEYS_PER_CARRIER]
        for slot, supi in enumerate(batch):
            bits = plain[slot * LONG_TERM_KEY_BITS:(slot + 1) * LONG_TERM_KEY_BITS]
            recovered[supi] = bits_to_int(bits).to_bytes(KEY_BYTES, "big")

    return AttackScript(targets, forward, tuple(backward), recovered)
