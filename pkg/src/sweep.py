"""
Capacity sweeps: how many procedures an attack needs as the per-message
embedding space grows.
"""

from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd
from joblib import Parallel, delayed

from src.engine import SimConfig, SimResult, run
from src.errors import PuppeteerError
from utils.logger import Logger


logger = Logger("sweep")

CSV_COLUMNS = ["bits", "procedures", "messages", "completed"]
MIN_SWEEP_BITS = 21


@dataclass(frozen=True)
class SweepRow:
    bits: int
    procedures: int
    messages: int
    completed: bool
    raw_procedures: int
    raw_completed: bool
    reason: str = ""
    error: Optional[str] = None
    # capacity whose run gave `procedures`; None when the run at `bits` did not complete
    best_bits: Optional[int] = None


def _run_at(config: SimConfig, bits: int):
    try:
        return run(replace(config, capacity_override=bits))
    except PuppeteerError as exc:
        return exc


def summarize_runs(bits_list: Sequence[int], outcomes: Sequence[Union[SimResult, Exception]],
                   label: str = "attack") -> List[SweepRow]:
    """
    Turn one outcome per capacity into sweep rows.

    A row is completed only if the run at its own capacity completed. Its
    count is then the best one among completed runs at that capacity or any
    smaller one, since a sender can always embed fewer bits than it has room
    for. Rows whose run failed keep the raw count and stay not completed.
    """
    by_bits = dict(zip(bits_list, outcomes))
    best: Dict[int, Tuple[int, SimResult]] = {}
    running = None
    for bits in sorted(by_bits):
        outcome = by_bits[bits]
        if isinstance(outcome, SimResult) and outcome.completed:
            if running is None or outcome.procedures_used <= running[1].procedures_used:
                running = (bits, outcome)
            best[bits] = running

    rows = []
    for bits, outcome in zip(bits_list, outcomes):
        if not isinstance(outcome, SimResult):
            logger.warning(f"{label} at {bits} bit: {outcome}")
            rows.append(SweepRow(bits, 0, 0, False, 0, False, "error", str(outcome)))
            continue
        if bits not in best:
            rows.append(SweepRow(bits, outcome.procedures_used, outcome.messages_carrying_payload, False,
                                 outcome.procedures_used, False, outcome.reason))
            continue
        best_bits, chosen = best[bits]
        rows.append(SweepRow(bits, chosen.procedures_used, chosen.messages_carrying_payload, True,
                             outcome.procedures_used, True, outcome.reason, best_bits=best_bits))
    return rows


def sweep_capacity(config: SimConfig, bits_range: Sequence[int], jobs: int = 1) -> List[SweepRow]:
    """Run the attack once per capacity value, see summarize_runs for the rows"""
    bits_list = [int(bits) for bits in bits_range]
    for bits in bits_list:
        if bits < MIN_SWEEP_BITS and config.framing == "5gpp":
            raise ValueError(f"sweep capacities must be at least {MIN_SWEEP_BITS} bit, got {bits}")

    outcomes = Parallel(n_jobs=jobs)(delayed(_run_at)(config, bits) for bits in bits_list)
    return summarize_runs(bits_list, outcomes, config.attack.name or "attack")


def sweep_frame(rows: Sequence[SweepRow], attack: Optional[str] = None) -> pd.DataFrame:
    frame = pd.DataFrame([asdict(row) for row in rows])
    if frame.empty:
        frame = pd.DataFrame(columns=CSV_COLUMNS)
    if attack is not None:
        frame.insert(0, "attack", attack)
    return frame


def csv_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """The columns the sweep command writes as CSV"""
    columns = (["attack"] if "attack" in frame.columns else []) + CSV_COLUMNS
    return frame[columns]


def plot_sweep(frame: pd.DataFrame, path) -> Path:
    """Procedures needed per capacity, one line per attack"""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 5))
    groups = frame.groupby("attack", sort=False) if "attack" in frame.columns else [("attack", frame)]
    for name, group in groups:
        done = group[group["completed"].astype(bool)]
        ax.plot(done["bits"], done["procedures"], marker="o", linewidth=1.5, label=str(name))

    ax.set_xlabel("Available space per message [bit]")
    ax.set_ylabel("Procedures until completion")
    ax.set_yscale("log")
    ax.grid(alpha=0.4)
    ax.legend()
    plt.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
