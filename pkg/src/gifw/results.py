"""Run records, JSON result documents and benchmark summaries."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

import numpy as np

__all__ = ["RunRecord", "result_document", "shifted_geometric_mean", "summarize"]

STATUSES = ("isomorphic", "non_isomorphic", "inconclusive")
EXIT_CODES = {"isomorphic": 0, "non_isomorphic": 1, "inconclusive": 2}


def shifted_geometric_mean(values: Iterable[float], shift: float = 1.0) -> float:
    """``exp(mean(log(v + shift))) - shift``."""
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        return math.nan
    return float(np.exp(np.mean(np.log(v + shift))) - shift)


@dataclass
class RunRecord:
    instance: str
    family: str
    n: int
    m: int
    method: str
    status: str
    wall_ms: float
    nodes: int = 0
    fw_iters: int = 0
    fixings_fraction: float = 0.0
    obbt_iters: float = 0.0
    seed: int = 0
    expected: Optional[str] = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.wall_ms < 0:
            raise ValueError("wall_ms must be nonnegative")

    @property
    def solved(self) -> bool:
        return self.status != "inconclusive"

    @property
    def correct(self) -> Optional[bool]:
        if self.expected is None or not self.solved:
            return None
        return self.status == self.expected

    def as_dict(self) -> dict:
        d = asdict(self)
        d["correct"] = self.correct
        return d


def summarize(records: list[RunRecord], time_limit_ms: float, shift_s: float = 1.0) -> list[dict]:
    """Per (family, method): solved count, solved percentage, shifted geomean time.

    Unsolved runs enter the mean at the time limit.
    """
    groups: dict[tuple[str, str], list[RunRecord]] = defaultdict(list)
    for r in records:
        groups[(r.family, r.method)].append(r)
    limit_s = time_limit_ms / 1e3
    rows = []
    for (family, method), rs in sorted(groups.items()):
        times = [min(r.wall_ms / 1e3, limit_s) if r.solved else limit_s for r in rs]
        solved = sum(r.solved for r in rs)
        rows.append({
            "family": family,
            "method": method,
            "instances": len(rs),
            "solved": solved,
            "solved_pct": 100.0 * solved / len(rs),
            "time_s": shifted_geometric_mean(times, shift_s),
        })
    return rows


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return _clean(float(x))
    return x


def result_document(status: str, *, permutation=None, certificate=None, nodes=0, fw_iters=0,
                    wall_ms=0.0, presolve=None, config_echo=None, seed=0, reason="") -> dict:
    """The JSON object printed by ``gifw solve``."""
    doc: dict = {"status": status}
    if permutation is not None:
        doc["permutation"] = [int(v) for v in permutation]
    if certificate is not None:
        doc["certificate"] = certificate
    if reason:
        doc["reason"] = reason
    stats = {
        "nodes": int(nodes),
        "fw_iters": int(fw_iters),
        "wall_ms": float(wall_ms),
        "fixings_fraction": 0.0,
        "obbt_iters_avg": 0.0,
        "stage_times_ms": {},
    }
    if presolve is not None:
        stats.update(presolve.to_dict())
    doc["stats"] = stats
    doc["config_echo"] = config_echo or {}
    doc["seed"] = int(seed)
    return _clean(doc)
