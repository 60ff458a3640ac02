"""Per-agent reference signals with analytic derivatives and derivative bounds.

Three signal kinds cover the experiments: constants, cosines, and linear
ramps.  Every kind knows its exact derivative and a finite bound on that
derivative's magnitude, which is what gates the gain conditions of the
smooth protocols.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("constant", "sinusoid", "ramp")


@dataclass(frozen=True)
class SignalSpec:
    """One agent's reference signal.

    sinusoid: amplitude * cos(omega * t + phase) + offset
    constant: offset
    ramp:     offset + slope * t
    """

    kind: str
    amplitude: float = 0.0
    omega: float = 0.0
    phase: float = 0.0
    offset: float = 0.0
    slope: float = 0.0

    def __post_init__(self):
        kind = "ramp" if self.kind == "polynomial-ramp" else self.kind
        if kind not in KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        # Zero out the parameters the kind does not use so that evaluation
        # depends only on the meaningful fields.
        if kind == "constant":
            for name in ("amplitude", "omega", "phase", "slope"):
                object.__setattr__(self, name, 0.0)
        elif kind == "ramp":
            for name in ("amplitude", "omega", "phase"):
                object.__setattr__(self, name, 0.0)
        elif kind == "sinusoid":
            object.__setattr__(self, "slope", 0.0)
        for name in ("amplitude", "omega", "phase", "offset", "slope"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def value(self, t: float) -> float:
        return self.offset + self.slope * t + self.amplitude * np.cos(self.omega * t + self.phase)

    def derivative(self, t: float) -> float:
        return self.slope - self.amplitude * self.omega * np.sin(self.omega * t + self.phase)

    @property
    def derivative_sup(self) -> float:
        """Exact bound on |d/dt| over all time (|a*omega| + |slope|)."""
        return abs(self.amplitude * self.omega) + abs(self.slope)


@dataclass(frozen=True, eq=False)
class SignalBank:
    """One SignalSpec per agent, index-aligned with the topology's node ids."""

    specs: tuple[SignalSpec, ...]

    def __post_init__(self):
        specs = tuple(self.specs)
        if not specs:
            raise ValueError("signal bank must not be empty")
        object.__setattr__(self, "specs", specs)
        for name in ("amplitude", "omega", "phase", "offset", "slope"):
            arr = np.array([getattr(s, name) for s in specs])
            object.__setattr__(self, "_" + name, arr)

    def __len__(self) -> int:
        return len(self.specs)

    def eval(self, t: float) -> np.ndarray:
        return self._offset + self._slope * t + self._amplitude * np.cos(self._omega * t + self._phase)

    def eval_derivative(self, t: float) -> np.ndarray:
        return self._slope - self._amplitude * self._omega * np.sin(self._omega * t + self._phase)

    def derivative_sups(self) -> np.ndarray:
        """Per-agent derivative bounds."""
        return np.abs(self._amplitude * self._omega) + np.abs(self._slope)

    def sup_l1_derivative_bound(self) -> float:
        """Upper bound on sup_t ||dz/dt||_1.

        The sum of the per-agent sups; conservative (the sup of a sum never
        exceeds the sum of sups) and always safe for the gain conditions.
        """
        return float(self.derivative_sups().sum())

    def subset(self, indices) -> SignalBank:
        return SignalBank(tuple(self.specs[i] for i in indices))


def constant_bank(values) -> SignalBank:
    return SignalBank(tuple(SignalSpec("constant", offset=float(v)) for v in values))


def benchmark_bank() -> SignalBank:
    """The nine-agent benchmark signals.

    Agents 1-5 run cosines of amplitudes 5, 4, 3, 2, 1 at 1 rad/s; agents
    6-9 run cosines of amplitudes -1, -2, -3, -4 at 0.01 rad/s.  The bank's
    l1 derivative bound is 15.1.
    """
    fast = [SignalSpec("sinusoid", amplitude=a, omega=1.0) for a in (5.0, 4.0, 3.0, 2.0, 1.0)]
    slow = [SignalSpec("sinusoid", amplitude=a, omega=0.01) for a in (-1.0, -2.0, -3.0, -4.0)]
    return SignalBank(tuple(fast + slow))
