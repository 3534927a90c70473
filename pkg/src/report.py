"""
Header overhead of the example attacks.

Ratios are kept as exact fractions and only rounded (half up, one decimal
percent) for display.
"""

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence

import pandas as pd

from src.catalog import AttackCatalogEntry, attack_catalog
from src.core_model import Direction, NodeId
from src.fivegpp import HEADER_BITS


class Convention(str, Enum):
    HEADER_OVER_PAYLOAD = "header/payload"
    HEADER_OVER_TOTAL = "header/(header+payload)"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class OverheadRow:
    attack_label: str
    direction: Direction
    header_bits: int
    payload_bits: int
    convention: Convention
    overhead_ratio: Fraction

    @property
    def total_packet_bits(self) -> int:
        return self.header_bits + self.payload_bits

    @property
    def display(self) -> str:
        return format_percent(self.overhead_ratio)


def overhead(header_bits: int, payload_bits: int,
             convention: Convention = Convention.HEADER_OVER_PAYLOAD) -> Fraction:
    """Exact header overhead; raises ZeroDivisionError for an empty payload over payload"""
    if convention == Convention.HEADER_OVER_PAYLOAD:
        return Fraction(header_bits, payload_bits)
    return Fraction(header_bits, header_bits + payload_bits)


def format_percent(ratio: Fraction) -> str:
    percent = Decimal(ratio.numerator * 100) / Decimal(ratio.denominator)
    return f"{percent.quantize(Decimal('0.1'), rounding=ROUND_HALF_UP)}%"


def _backward_convention(entry: AttackCatalogEntry) -> Convention:
    # IP exits are quoted against the whole packet, subscriber exits against the payload
    if entry.attack.exit in (NodeId.UE, None):
        return Convention.HEADER_OVER_PAYLOAD
    return Convention.HEADER_OVER_TOTAL


def overhead_table(catalog_entries: Optional[Sequence[AttackCatalogEntry]] = None,
                   header_bits: int = HEADER_BITS, include_split_minimum: bool = True) -> List[OverheadRow]:
    """One row per direction of each header-framed attack"""
    entries = catalog_entries if catalog_entries is not None else attack_catalog()
    rows = []
    for entry in entries:
        if entry.framing != "5gpp":
            continue
        attack = entry.attack
        for forward_bits in entry.forward_variants or (attack.forward_bits,):
            label = attack.name if not entry.forward_variants else f"{attack.name} ({forward_bits} bit)"
            rows.append(OverheadRow(label, Direction.FORWARD, header_bits, forward_bits,
                                    Convention.HEADER_OVER_PAYLOAD,
                                    overhead(header_bits, forward_bits)))
        if attack.backward_bits:
            convention = _backward_convention(entry)
            rows.append(OverheadRow(attack.name, Direction.BACKWARD, header_bits, attack.backward_bits, convention,
                                    overhead(header_bits, attack.backward_bits, convention)))
    if include_split_minimum:
        rows.append(OverheadRow("split minimum", Direction.FORWARD, header_bits, 1,
                                Convention.HEADER_OVER_PAYLOAD, overhead(header_bits, 1)))
    return rows


def max_packet_bits(rows: Sequence[OverheadRow]) -> int:
    return max((row.total_packet_bits for row in rows), default=0)


def overhead_frame(rows: Sequence[OverheadRow]) -> pd.DataFrame:
    return pd.DataFrame([
        {
            "attack": row.attack_label,
            "direction": str(row.direction),
            "header_bits": row.header_bits,
            "payload_bits": row.payload_bits,
            "packet_bits": row.total_packet_bits,
            "convention": str(row.convention),
            "overhead": row.display,
        }
        for row in rows
    ])
