"""
Auxiliar module for generating synthetic environments and subscriber data.
"""

import random
from typing import Optional, Sequence

from src.core_model import Environment, NodeId, Procedure, ProcedureMessage
from src.transient_aka import KEY_BYTES, SubscriberKeyStore


DEFAULT_NODES = (NodeId.UE, NodeId.GNB, NodeId.AMF, NodeId.AUSF, NodeId.UDM)
# MCC 001, MNC 01
PLMN_PREFIX = 101


def generate_environment(num_procedures: int = 2, messages_per_procedure: tuple = (3, 6),
                         nodes: Sequence[NodeId] = DEFAULT_NODES, capacities: Sequence[int] = (64, 16),
                         compromise_rate: float = 0.5, seed: Optional[int] = 42) -> Environment:
    """
    Generate a random but valid environment.

    Args:
        num_procedures: Number of procedures (default: 2)
        messages_per_procedure: (min, max) messages per procedure (default: 3-6)
        nodes: Nodes messages are drawn between; the first one is the controlled UE
        capacities: Capacities a message may get, in bits (default: 64 or 16)
        compromise_rate: Probability that each node besides the UE is compromised
        seed: Random seed, None for a fresh draw (default: 42)

    Returns:
        Environment with UE controlled and at least one compromised node
    """
    rng = random.Random(seed)
    nodes = list(nodes)

    procedures = []
    for number in range(num_procedures):
        messages = []
        for _ in range(rng.randint(*messages_per_procedure)):
            source, target = rng.sample(nodes, 2)
            messages.append(ProcedureMessage(source, target, rng.choice(list(capacities)),
                                             label=f"{source}->{target}"))
        procedures.append(Procedure(f"procedure-{number + 1}", tuple(messages)))

    present = set()
    for procedure in procedures:
        for msg in procedure.messages:
            present.update((msg.source, msg.target))

    controlled = frozenset({nodes[0]}) if nodes[0] in present else frozenset()
    candidates = sorted(present - controlled)
    compromised = {node for node in candidates if rng.random() < compromise_rate}
    if not compromised and candidates:
        compromised.add(rng.choice(candidates))

    return Environment(procedures=tuple(procedures), compromised=frozenset(compromised), controlled=controlled)


def generate_key_store(num_subscribers: int = 50, seed: Optional[int] = 42) -> SubscriberKeyStore:
    """
    Generate a UDM key store with random SUPIs and 128-bit long-term keys.

    Args:
        num_subscribers: Number of subscribers (default: 50)
        seed: Random seed (default: 42)

    Returns:
        SubscriberKeyStore mapping SUPI to key
    """
    rng = random.Random(seed)
    # IMSI-style SUPIs with a 10-digit MSIN
    supis = rng.sample(range(1_000_000_000, 10_000_000_000), num_subscribers)
    return SubscriberKeyStore({
        PLMN_PREFIX * 10 ** 10 + msin: rng.getrandbits(KEY_BYTES * 8).to_bytes(KEY_BYTES, "big")
        for msin in supis
    })
