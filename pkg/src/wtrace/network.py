"""Mode-indexed amplitude vectors and the immutable interferometer network model.

A network is an ordered list of stages acting on a fixed set of modes.  Each
stage is one of three elements:

* ``BeamSplitter(mode_a, mode_b, R)`` with the real symmetric matrix
  ``[[sqrt(R), sqrt(T)], [sqrt(T), -sqrt(R)]]`` on ``(mode_a, mode_b)``;
* ``PhaseShift(mode, phi)`` multiplying one mode by ``exp(i*phi)``;
* ``Checkpoint(mode, label)``, the identity on the particle.  Marker coupling
  at checkpoints is handled by :mod:`wtrace.engine`.

Three-path preset routing
-------------------------
Modes: 0 carries the C arm (and is the source mode), 1 the A arm, 2 the B arm.

====  ==================  =============================================
step  element             effect
====  ==================  =============================================
0     BS1 (0, 1) R=1/3    1/3 stays on the C arm, 2/3 enters the loop
1     BS2 (1, 2) R=1/2    inner loop splits into the A and B arms
2-7   checkpoints A, B, C each followed by its phase alpha, beta, gamma
8     BS3 (2, 1) R=1/2    bright port -> mode 2 (exit I), dark port -> mode 1
9     BS4 (0, 1) R=R4     mode 0 -> exit III, mode 1 -> exit II
====  ==================  =============================================

BS3 takes the B arm as its first port so the minus sign of the convention
lands on the A amplitude.  The amplitude at exit III is then
``(exp(i*gamma)*sqrt(R4) + (exp(i*beta) - exp(i*alpha))*sqrt((1-R4)/2)) / sqrt(3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

ATOL = 1e-12

__all__ = [
    "ATOL",
    "BeamSplitter",
    "Checkpoint",
    "DomainError",
    "Element",
    "Network",
    "PhaseConfig",
    "PhaseShift",
    "StateVector",
    "StructuralError",
    "apply_element",
    "build_three_path",
    "element_matrix",
    "total_unitary",
]


class StructuralError(ValueError):
    """A network or state refers to modes, labels or stages that do not exist."""


class DomainError(ValueError):
    """A physical parameter lies outside its admissible range."""


@dataclass(frozen=True)
class BeamSplitter:
    mode_a: int
    mode_b: int
    R: float

    def __post_init__(self):
        if not (0.0 <= self.R <= 1.0) or not math.isfinite(self.R):
            raise DomainError(f"beam splitter reflectivity R={self.R!r} outside [0, 1]")
        if self.mode_a == self.mode_b:
            raise StructuralError(f"beam splitter needs two distinct modes, got {self.mode_a} twice")

    @property
    def T(self) -> float:
        return 1.0 - self.R

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.mode_a, self.mode_b)


@dataclass(frozen=True)
class PhaseShift:
    mode: int
    phi: float

    def __post_init__(self):
        if not math.isfinite(self.phi):
            raise DomainError(f"phase {self.phi!r} is not finite")

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.mode,)


@dataclass(frozen=True)
class Checkpoint:
    mode: int
    label: str

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.mode,)


Element = Union[BeamSplitter, PhaseShift, Checkpoint]


@dataclass(frozen=True)
class PhaseConfig:
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitude per mode, positioned before stage ``stage_index``."""

    amplitudes: np.ndarray
    stage_index: int = 0

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1:
            raise StructuralError("state amplitudes must be one-dimensional")
        if not np.all(np.isfinite(amps)):
            raise DomainError("state amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.stage_index == other.stage_index and np.array_equal(
            self.amplitudes, other.amplitudes
        )

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @classmethod
    def unit(cls, mode_count: int, mode: int, stage_index: int = 0) -> "StateVector":
        if not 0 <= mode < mode_count:
            raise StructuralError(f"mode {mode} out of range for {mode_count} modes")
        amps = np.zeros(mode_count, dtype=complex)
        amps[mode] = 1.0
        return cls(amps, stage_index)


@dataclass(frozen=True)
class Network:
    mode_count: int
    stages: tuple[Element, ...]
    source_mode: int
    detector_ports: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        # dict keeps the declared port order; equality stays order-insensitive
        object.__setattr__(self, "detector_ports", dict(self.detector_ports))
        if self.mode_count < 1:
            raise StructuralError("a network needs at least one mode")
        if not 0 <= self.source_mode < self.mode_count:
            raise StructuralError(f"source mode {self.source_mode} out of range")
        for index, element in enumerate(self.stages):
            for m in element.modes:
                if not 0 <= m < self.mode_count:
                    raise StructuralError(
                        f"stage {index} ({type(element).__name__}) references mode {m}, "
                        f"network has {self.mode_count} modes"
                    )
        labels = [e.label for e in self.stages if isinstance(e, Checkpoint)]
        if len(set(labels)) != len(labels):
            raise StructuralError(f"duplicate checkpoint labels in {labels}")
        for label, m in self.detector_ports.items():
            if not 0 <= m < self.mode_count:
                raise StructuralError(f"detector {label!r} on mode {m} out of range")

    def __hash__(self):
        return hash((self.mode_count, self.stages, self.source_mode,
                     tuple(sorted(self.detector_ports.items()))))

    @property
    def checkpoints(self) -> dict[str, int]:
        """Checkpoint label -> stage index, in stage order."""
        return {e.label: i for i, e in enumerate(self.stages) if isinstance(e, Checkpoint)}

    def checkpoint(self, label: str) -> Checkpoint:
        try:
            return self.stages[self.checkpoints[label]]
        except KeyError:
            raise StructuralError(f"no checkpoint labelled {label!r}") from None

    def port_mode(self, port: str) -> int:
        try:
            return self.detector_ports[port]
        except KeyError:
            raise StructuralError(
                f"unknown detector port {port!r}; declared: {sorted(self.detector_ports)}"
            ) from None

    def output_labels(self) -> list[str]:
        """A label for every output mode, falling back to ``mode<k>`` if undeclared."""
        by_mode = {m: label for label, m in self.detector_ports.items()}
        return [by_mode.get(m, f"mode{m}") for m in range(self.mode_count)]

    def with_stage_inserted(self, index: int, element: Element) -> "Network":
        stages = list(self.stages)
        stages.insert(index, element)
        return Network(self.mode_count, tuple(stages), self.source_mode, self.detector_ports)


def element_matrix(element: Element, mode_count: int) -> np.ndarray:
    """Full ``mode_count x mode_count`` unitary induced by one element."""
    for m in element.modes:
        if not 0 <= m < mode_count:
            raise StructuralError(f"mode {m} out of range for {mode_count} modes")
    u = np.eye(mode_count, dtype=complex)
    if isinstance(element, BeamSplitter):
        a, b = element.mode_a, element.mode_b
        r, t = math.sqrt(element.R), math.sqrt(element.T)
        u[a, a], u[a, b] = r, t
        u[b, a], u[b, b] = t, -r
    elif isinstance(element, PhaseShift):
        u[element.mode, element.mode] = np.exp(1j * element.phi)
    elif not isinstance(element, Checkpoint):
        raise StructuralError(f"unknown element {element!r}")
    return u


def apply_element(state: StateVector, element: Element) -> StateVector:
    n = len(state)
    for m in element.modes:
        if not 0 <= m < n:
            raise StructuralError(f"mode {m} out of range for a {n}-mode state")
    amps = np.array(state.amplitudes)
    if isinstance(element, BeamSplitter):
        a, b = element.mode_a, element.mode_b
        r, t = math.sqrt(element.R), math.sqrt(element.T)
        amps[a], amps[b] = r * state.amplitudes[a] + t * state.amplitudes[b], \
            t * state.amplitudes[a] - r * state.amplitudes[b]
    elif isinstance(element, PhaseShift):
        amps[element.mode] *= np.exp(1j * element.phi)
    return StateVector(amps, state.stage_index + 1)


def total_unitary(net: Network) -> np.ndarray:
    u = np.eye(net.mode_count, dtype=complex)
    for element in net.stages:
        u = element_matrix(element, net.mode_count) @ u
    return u


THREE_PATH_PORTS = {"III": 0, "II": 1, "I": 2}


def build_three_path(R4: float = 1 / 3, phases: PhaseConfig | None = None) -> Network:
    """The nested three-path interferometer with a free final reflectivity ``R4``."""
    if not (0.0 <= R4 <= 1.0):
        raise DomainError(f"R4={R4!r} outside [0, 1]")
    phases = phases or PhaseConfig()
    stages: Sequence[Element] = (
        BeamSplitter(0, 1, 1 / 3),
        BeamSplitter(1, 2, 1 / 2),
        Checkpoint(1, "A"),
        PhaseShift(1, phases.alpha),
        Checkpoint(2, "B"),
        PhaseShift(2, phases.beta),
        Checkpoint(0, "C"),
        PhaseShift(0, phases.gamma),
        BeamSplitter(2, 1, 1 / 2),
        BeamSplitter(0, 1, R4),
    )
    return Network(3, tuple(stages), 0, dict(THREE_PATH_PORTS))
