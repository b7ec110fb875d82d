"""Scenario parameters, shared conventions and RNG plumbing.

Conventions fixed here once and relied on everywhere else:

* time is an integer step counter; an agent travels exactly ``v`` length
  units of Manhattan path per step,
* ``log`` means the natural logarithm in every envelope formula,
* all arithmetic is double precision and threshold comparisons are exact
  (``>=`` / ``<=``, no epsilon fudging),
* randomness comes from numpy PCG64 generators keyed by ``(seed, index)``
  through :func:`derive_substream`; identical keys give identical draw
  sequences, which is what makes reruns and parallel stepping bit-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

#: Identifier of the deterministic generator construction, embedded in all
#: output files so results can be tied to the stream definition.
RNG_ALGORITHM_ID = "numpy-pcg64-seedseq(seed,index)"

#: Default speed-envelope constant: v must not exceed R divided by this.
SPEED_ENVELOPE_DEFAULT = 3.0 * (1.0 + math.sqrt(5.0))

#: Default radius-envelope constant in R >= c1 * L * sqrt(log n / n).
RADIUS_ENVELOPE_DEFAULT = 200.0

# Reserved substream indices.  Agents use their own id (0 .. n-1); all
# infrastructure draws live far above any realistic population size so the
# two ranges can never collide.
_RESERVED_BASE = 2**48
INIT_STREAM_INDEX = _RESERVED_BASE
SOURCE_STREAM_INDEX = _RESERVED_BASE + 1
MONITOR_STREAM_INDEX = _RESERVED_BASE + 2


class Point(NamedTuple):
    """A position in the closed square [0, L]^2."""

    x: float
    y: float


@dataclass(frozen=True)
class WorldParams:
    """Immutable description of one simulated world.

    n       number of agents (>= 1)
    L       side of the square arena (> 0)
    R       transmission radius (> 0)
    v       constant agent speed per step (>= 0)
    seed    64-bit seed from which every substream is derived
    c1      radius-envelope constant: R >= c1 * L * sqrt(log n / n)
    c2      speed-envelope constant: v <= R / c2
    eta     core-density constant: every central-cell core should hold at
            least eta * log n agents
    """

    n: int
    L: float
    R: float
    v: float
    seed: int = 0
    c1: float = RADIUS_ENVELOPE_DEFAULT
    c2: float = SPEED_ENVELOPE_DEFAULT
    eta: float = 0.02

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if self.v < 0:
            raise ValueError(f"v must be >= 0, got {self.v}")
        if not self.c1 > 0 or not self.c2 > 0:
            raise ValueError("envelope constants c1 and c2 must be positive")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")

    @property
    def radius_threshold(self) -> float:
        """Smallest radius the envelope allows: c1 * L * sqrt(log n / n)."""
        return self.c1 * self.L * math.sqrt(math.log(self.n) / self.n)

    @property
    def speed_limit(self) -> float:
        """Largest speed the envelope allows: R / c2."""
        return self.R / self.c2

    @property
    def assumptions_hold(self) -> bool:
        return self.R >= self.radius_threshold and self.v <= self.speed_limit

    def to_dict(self) -> dict:
        """Plain-dict form used when embedding the config in output files."""
        return {
            "n": self.n,
            "L": self.L,
            "R": self.R,
            "v": self.v,
            "seed": self.seed,
            "c1": self.c1,
            "c2": self.c2,
            "eta": self.eta,
        }


@dataclass(frozen=True)
class AssumptionReport:
    """Advisory evaluation of the two operating-regime envelopes.

    Slacks are signed: negative slack means the corresponding inequality is
    violated.  Violations never abort anything; they are recorded so that
    runs outside the analysed regime are visibly flagged.
    """

    radius_ok: bool
    speed_ok: bool
    radius_slack: float
    speed_slack: float

    @property
    def all_ok(self) -> bool:
        return self.radius_ok and self.speed_ok


def check_assumptions(p: WorldParams) -> AssumptionReport:
    """Evaluate R >= c1*L*sqrt(log n / n) and v <= R/c2 with exact compares."""
    thr = p.radius_threshold
    lim = p.speed_limit
    return AssumptionReport(
        radius_ok=p.R >= thr,
        speed_ok=p.v <= lim,
        radius_slack=p.R - thr,
        speed_slack=lim - p.v,
    )


def derive_substream(seed: int, index: int) -> np.random.Generator:
    """Deterministic, statistically independent substream for (seed, index).

    Two calls with the same pair return generators producing identical draw
    sequences; different pairs give independent streams.  Agents use their
    own id as index, infrastructure draws use the reserved indices above.
    """
    if index < 0:
        raise ValueError(f"substream index must be >= 0, got {index}")
    entropy = (seed & 0xFFFF_FFFF_FFFF_FFFF, index)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def validate_point(point: Point | tuple[float, float], L: float) -> Point:
    """Return the point if it lies in the closed square, else raise."""
    x, y = point
    if not (0.0 <= x <= L and 0.0 <= y <= L):
        raise ValueError(f"point ({x}, {y}) outside the closed square [0, {L}]^2")
    return Point(float(x), float(y))
