import random
from dataclasses import replace

import pytest

from src.core_model import AttackType, NodeId, RoutingOption
from src.errors import CapacityTooSmall, ConflictingTotals, FieldOutOfRange, MissingKey
from src.fivegpp import (
    CIPHERS,
    EXECUTION_CODES,
    EXIT_CODES,
    HEADER_BITS,
    GppHeader,
    Incomplete,
    Keyring,
    Undecryptable,
    cipher_transform,
    decode_header,
    derive_key,
    encode_header,
    fragment_payload,
    get_cipher,
    header_for,
    reassemble,
    ttl_of,
    with_ttl,
)


def _header(**fields):
    base = dict(key_id=1, routing_option=RoutingOption.PF, ttl=1, split=False, execution_point=NodeId.UDM,
                attack_id=1, attack_type=AttackType.UDM_KEY_EXTRACTION, exit_point=NodeId.UE)
    base.update(fields)
    return GppHeader(**base)


def _bits(rng, n):
    return "".join(rng.choice("01") for _ in range(n))


class TestHeaderCodec:
    def test_all_minimum_values_encode_to_zero(self, identity_keyring):
        assert encode_header(_header(), identity_keyring) == 0x00000

    def test_field_positions(self, identity_keyring):
        word = encode_header(_header(key_id=16, routing_option=RoutingOption.EERR, ttl=8, split=True,
                                     execution_point=NodeId.NEF, attack_id=8,
                                     attack_type=AttackType.UE_LOCALIZATION, exit_point=NodeId.NEF),
                             identity_keyring)
        assert format(word, "020b") == "1111" + "10" + "111" + "1" + "111" + "111" + "10" + "11"

    def test_key_extraction_example_word(self, identity_keyring):
        word = encode_header(header_for(3, RoutingOption.RR, 5, NodeId.UDM, 2, AttackType.UDM_KEY_EXTRACTION,
                                        NodeId.UE), identity_keyring)
        bits = format(word, "020b")
        assert bits[10:13] == "000"   # execution point 1
        assert bits[16:18] == "00"    # attack type 1
        assert bits[18:20] == "00"    # exit point 1

    def test_missing_exit_is_encoded_as_ue(self):
        assert header_for(1, RoutingOption.PF, 8, NodeId.GNB, 1, AttackType.PWS_ABUSE, None).exit_point == NodeId.UE

    def test_round_trip_every_field_combination(self, identity_keyring, shake_keyring):
        rng = random.Random(7)
        for execution in EXECUTION_CODES:
            for exit_point in EXIT_CODES:
                for attack_type in AttackType:
                    for attack_id in range(1, 9):
                        for split in (False, True):
                            h = _header(key_id=rng.randint(1, 16), routing_option=rng.choice(list(RoutingOption)),
                                        ttl=rng.randint(1, 8), split=split, execution_point=execution,
                                        attack_id=attack_id, attack_type=attack_type, exit_point=exit_point)
                            assert decode_header(encode_header(h, identity_keyring), identity_keyring) == h
                            index = rng.randint(0, 40)
                            assert decode_header(encode_header(h, shake_keyring, index), shake_keyring, index) == h

    def test_every_word_decodes_or_is_out_of_range(self, identity_keyring):
        decoded = rejected = 0
        for word in range(1 << HEADER_BITS):
            try:
                result = decode_header(word, identity_keyring)
            except FieldOutOfRange:
                rejected += 1
            else:
                assert isinstance(result, GppHeader)
                decoded += 1
        # routing code 4 or attack type code 4 are the only invalid code points
        assert decoded == 16 * 3 * 8 * 2 * 8 * 8 * 3 * 4
        assert decoded + rejected == 1 << HEADER_BITS

    def test_undecryptable_without_key(self, shake_keyring):
        word = encode_header(_header(key_id=5, routing_option=RoutingOption.RR, ttl=6), shake_keyring)
        result = decode_header(word, Keyring(cipher=CIPHERS["shake"]))
        assert result == Undecryptable(5, RoutingOption.RR, 6)

    def test_encode_needs_the_key(self):
        with pytest.raises(MissingKey):
            encode_header(_header(key_id=2), Keyring.derived([1]))

    @pytest.mark.parametrize("fields", [
        {"key_id": 0}, {"key_id": 17}, {"ttl": 0}, {"ttl": 9}, {"attack_id": 9},
        {"execution_point": NodeId.UE}, {"exit_point": NodeId.AMF},
    ])
    def test_field_out_of_range(self, identity_keyring, fields):
        with pytest.raises(FieldOutOfRange):
            encode_header(_header(**fields), identity_keyring)

    def test_word_out_of_range(self, identity_keyring):
        with pytest.raises(FieldOutOfRange):
            decode_header(1 << HEADER_BITS, identity_keyring)

    def test_encrypted_bit_flips_leave_clear_fields(self, identity_keyring):
        h = _header(key_id=9, routing_option=RoutingOption.RR, ttl=4)
        word = encode_header(h, identity_keyring)
        for position in range(11):
            try:
                flipped = decode_header(word ^ (1 << position), identity_keyring)
            except FieldOutOfRange:
                continue
            assert (flipped.key_id, flipped.routing_option, flipped.ttl) == (9, RoutingOption.RR, 4)
            assert flipped != h

    def test_shake_hides_encrypted_region(self, identity_keyring, shake_keyring):
        h = _header(key_id=3)
        plain, sealed = encode_header(h, identity_keyring), encode_header(h, shake_keyring)
        assert plain >> 11 == sealed >> 11
        assert any(encode_header(h, shake_keyring, i) != sealed for i in range(1, 8))

    def test_ttl_rewrite_keeps_header_readable(self, shake_keyring):
        h = _header(key_id=4, ttl=8)
        word = with_ttl(encode_header(h, shake_keyring), 3)
        assert ttl_of(word) == 3
        assert decode_header(word, shake_keyring) == replace(h, ttl=3)


class TestCipher:
    def test_involution(self):
        rng = random.Random(1)
        for _ in range(50):
            bits = _bits(rng, rng.randint(1, 300))
            key = derive_key(rng.randint(1, 16), seed=rng.randint(0, 99))
            assert cipher_transform(cipher_transform(bits, key, "101"), key, "101") == bits

    def test_identity(self):
        assert cipher_transform("1011", b"k", "0", CIPHERS["identity"]) == "1011"

    def test_distinct_keys_give_distinct_outputs(self):
        rng = random.Random(2)
        bits = _bits(rng, 64)
        outputs = {cipher_transform(bits, derive_key(1, seed), "0") for seed in range(100)}
        assert len(outputs) == 100

    def test_empty(self):
        assert cipher_transform("", b"k", "0") == ""

    def test_unknown_cipher(self):
        with pytest.raises(ValueError):
            get_cipher("aes")

    def test_derived_keys_are_deterministic(self):
        assert derive_key(3, 42) == derive_key(3, 42)
        assert len(derive_key(3, 42)) == 16
        assert derive_key(3, 42) != derive_key(4, 42)


class TestKeyring:
    def test_key_id_range(self):
        with pytest.raises(FieldOutOfRange):
            Keyring({17: b"x"})

    def test_missing_key(self):
        with pytest.raises(MissingKey):
            Keyring.derived([1]).key(2)


class TestFragmentation:
    def test_three_fragments_at_64(self):
        fragments = fragment_payload("1" * 128, 64, _header())
        assert [len(f.payload_bits) for f in fragments] == [44, 44, 40]
        assert all(f.header.split for f in fragments)
        assert all(f.wire_bits <= 64 for f in fragments)
        assert [f.total_fragments for f in fragments] == [3, 3, 3]

    def test_single_bit_at_minimum(self):
        fragments = fragment_payload("1", 21, _header(split=True))
        assert len(fragments) == 1
        assert fragments[0].header.split is False

    def test_minimum_capacity(self):
        with pytest.raises(CapacityTooSmall):
            fragment_payload("1", 20, _header())
        assert fragment_payload("1", 21, _header())

    def test_empty_payload(self):
        assert fragment_payload("", 64, _header()) == []

    def test_raw_framing(self):
        fragments = fragment_payload("0" * 128, 256, _header(), header_bits=0)
        assert len(fragments) == 1 and fragments[0].wire_bits == 128

    def test_fragment_count_formula(self):
        rng = random.Random(3)
        for _ in range(100):
            length, capacity = rng.randint(1, 400), rng.randint(21, 200)
            fragments = fragment_payload(_bits(rng, length), capacity, _header())
            assert len(fragments) == -(-length // (capacity - 20))


class TestReassembly:
    def test_any_order(self):
        rng = random.Random(4)
        payload = _bits(rng, 128)
        fragments = fragment_payload(payload, 64, _header())
        rng.shuffle(fragments)
        assert reassemble(fragments) == payload

    def test_incomplete(self):
        fragments = fragment_payload("1" * 128, 64, _header())
        assert reassemble(fragments[:2]) == Incomplete(1)

    def test_duplicates_are_ignored(self):
        fragments = fragment_payload("10" * 50, 40, _header())
        assert reassemble(fragments + fragments[:1]) == "10" * 50

    def test_conflicting_totals(self):
        three = fragment_payload("1" * 128, 64, _header())
        four = fragment_payload("1" * 128, 53, _header())
        with pytest.raises(ConflictingTotals):
            reassemble([three[0], four[1]])
