"""Per-trial records shared by the simulators and the experiment harness."""

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

SCHEMA_VERSION = 1


@dataclass
class CheckpointRow:
    """Snapshot of one trial at a requested edge count, deficit or ball count.

    ``kind`` is ``"s"`` (edge count), ``"t"`` (deficit) or ``"m"`` (balls
    dropped). Bin-process deficit rows are taken at the last step spent at
    that deficit; ``m_first`` is the first ball count at which it was
    reached and ``m_last`` the last.
    """

    kind: str
    s: int
    t: int
    reached: bool
    degree_counts: Optional[list] = None
    unsaturated: Optional[int] = None
    unsaturated_edges: Optional[int] = None
    critical_edges: Optional[int] = None
    critical_vertices: Optional[int] = None
    m: Optional[int] = None
    m_first: Optional[int] = None
    m_last: Optional[int] = None
    y_counts: Optional[list] = None
    bad: Optional[int] = None
    bad_unsaturated: Optional[int] = None
    waiting: Optional[int] = None
    clip_excess: Optional[int] = None


@dataclass
class TrajectoryRecord:
    trial: int
    seed: int
    process: str
    mode: Optional[str]
    n: int
    d: int
    final_edges: int
    saturated: bool
    unsaturated_degrees: list
    checkpoints: list = field(default_factory=list)
    last_times: list = field(default_factory=list)
    bad_final: Optional[int] = None
    m_final: Optional[int] = None
    bad_pairs_by_deficit: Optional[dict] = None
    terminal_code: Optional[int] = None
    bin_terminal_code: Optional[int] = None
    violations: int = 0
    clipped_snapshots: Optional[int] = None
    schema: int = SCHEMA_VERSION

    @property
    def N(self):
        return (self.n * self.d) // 2

    def row(self, kind, value):
        """First checkpoint row of ``kind`` keyed by its s, t or m value."""
        key = {"s": "s", "t": "t", "m": "m"}[kind]
        for r in self.checkpoints:
            if r.kind == kind and getattr(r, key) == value:
                return r
        raise KeyError((kind, value))

    def to_dict(self):
        out = {"record": "trial"}
        out.update(asdict(self))
        if self.bad_pairs_by_deficit is not None:
            out["bad_pairs_by_deficit"] = {str(k): v for k, v in sorted(self.bad_pairs_by_deficit.items())}
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data.pop("record", None)
        rows = [CheckpointRow(**r) for r in data.pop("checkpoints", [])]
        w = data.pop("bad_pairs_by_deficit", None)
        if w is not None:
            w = {int(k): v for k, v in w.items()}
        return cls(checkpoints=rows, bad_pairs_by_deficit=w, **data)
