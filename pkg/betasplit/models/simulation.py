from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Tuple

from config import Config
from errors import DomainError


class SimMode(str, Enum):
    CHAIN = 'chain'
    TREE = 'tree'
    CLADE_FRACTION = 'clade_fraction'


@dataclass(frozen=True)
class SimConfig:
    n: int
    samples: int
    seed: int
    mode: SimMode = SimMode.CHAIN
    t: float = 1.0
    streams: int = Config.SIM_STREAMS
    x_grid: Tuple[float, ...] = (1.0,)
    track_states: Tuple[int, ...] = (2, 3, 4, 5, 6)
    powers: Tuple[float, ...] = (1.0, 1.5, 2.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, 'mode', SimMode(self.mode))
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.mode is SimMode.TREE and self.n < 2:
            raise DomainError("tree mode needs n >= 2")
        if self.mode is SimMode.CLADE_FRACTION and self.t < 0:
            raise DomainError("clade_fraction needs t >= 0")
        if not 1 <= self.streams <= self.samples:
            raise DomainError("streams must lie in [1, samples]")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def stream_sizes(self) -> Tuple[int, ...]:
        base, extra = divmod(self.samples, self.streams)
        return tuple(base + (1 if i < extra else 0) for i in range(self.streams))


@dataclass
class SummaryStats:
    count: int
    mean: float
    variance: float
    stderr: float
    min: float
    max: float
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'count': self.count,
            'mean': self.mean,
            'variance': self.variance,
            'stderr': self.stderr,
            'min': self.min,
            'max': self.max,
            'extra': self.extra,
        }
