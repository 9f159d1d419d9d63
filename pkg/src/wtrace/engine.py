"""Forward/backward propagation, weak values and faint-trace markers.

Every checkpoint owns a two-level marker (``no``/``yes``).  When the particle
is in the checkpoint's mode the marker is rotated

    |no>  ->  sqrt(1-3*eps)|no> + sqrt(3*eps)|yes>
    |yes> -> -sqrt(3*eps)|no>  + sqrt(1-3*eps)|yes>

so two records left at different checkpoints overlap by ``1 - 3*eps``.  That
single overlap is what produces the ``eps`` offset and the ``1 - 3*eps``
fringe factor of the detection probability:

    P(exit) = (1-3eps) |sum_k a_k|^2 + 3eps sum_k |a_k|^2

where ``a_k`` is the amplitude for reaching ``exit`` through checkpoint ``k``.
At ``eps = 1/3`` the records are orthogonal and each branch carries its own
``yes`` flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .network import (
    Checkpoint,
    DomainError,
    Network,
    PhaseShift,
    StateVector,
    StructuralError,
    apply_element,
    element_matrix,
)

EPS_MAX = 1 / 3
OVERLAP_FLOOR = 1e-14
NULL_PROBABILITY = 1e-15
INCOHERENCE_TOL = 1e-9
METHODS = ("bayes_full", "accounting")


class OrthogonalSelection(ValueError):
    """Pre- and postselected states are orthogonal; the weak value is undefined."""


class ConditioningOnNull(ValueError):
    """Conditioning on an event of zero probability."""


class AccountingNotJustified(ValueError):
    """Amplitudes meeting at the final splitter are coherent, so no path accounting."""


def _check_eps(eps: float) -> float:
    if not (0.0 <= eps <= EPS_MAX) or not math.isfinite(eps):
        raise DomainError(f"trace strength eps={eps!r} outside [0, 1/3]")
    return float(eps)


@dataclass(frozen=True)
class MarkerModel:
    epsilon: float
    checkpoint_labels: tuple[str, ...]

    def __post_init__(self):
        _check_eps(self.epsilon)
        object.__setattr__(self, "checkpoint_labels", tuple(self.checkpoint_labels))

    @property
    def c(self) -> float:
        return math.sqrt(1.0 - 3.0 * self.epsilon)

    @property
    def s(self) -> float:
        return math.sqrt(3.0 * self.epsilon)

    def rotation(self) -> np.ndarray:
        c, s = self.c, self.s
        return np.array([[c, -s], [s, c]])

    def config_name(self, index: int) -> str:
        yes = [lab for k, lab in enumerate(self.checkpoint_labels) if index >> k & 1]
        return "+".join(yes) if yes else "none"

    def record(self, label: str) -> np.ndarray:
        """Marker-register state after a single pass through checkpoint ``label``."""
        k = self.checkpoint_labels.index(label)
        reg = np.zeros(2 ** len(self.checkpoint_labels), dtype=complex)
        reg[0] = self.c
        reg[1 << k] = self.s
        return reg

    def record_overlap(self, j: str, k: str) -> complex:
        return complex(np.vdot(self.record(j), self.record(k)))


@dataclass(frozen=True)
class JointOutcome:
    """Probability of every (exit, marker configuration) pair."""

    table: Mapping[tuple[str, str], float]
    exits: tuple[str, ...]
    checkpoint_labels: tuple[str, ...]
    epsilon: float

    def total(self) -> float:
        return math.fsum(self.table.values())

    def exit_probability(self, exit: str) -> float:
        if exit not in self.exits:
            raise StructuralError(f"unknown exit {exit!r}; known: {list(self.exits)}")
        return math.fsum(p for (e, _), p in self.table.items() if e == exit)


@dataclass(frozen=True)
class Decomposition:
    conclusive: Mapping[str, float]
    inconclusive: float

    @property
    def total(self) -> float:
        return math.fsum(self.conclusive.values()) + self.inconclusive


@dataclass(frozen=True)
class WeakValueReport:
    values: Mapping[str, complex]
    overlap: complex

    def __getitem__(self, label: str) -> complex:
        return self.values[label]

    @property
    def total(self) -> complex:
        return sum(self.values.values(), 0j)


@dataclass(frozen=True)
class PathPosterior:
    probabilities: Mapping[str, float]
    method: str

    def __getitem__(self, label: str) -> float:
        return self.probabilities[label]


class IncoherenceResult(NamedTuple):
    incoherent: bool
    max_variation: float

    def __bool__(self):
        return self.incoherent


def forward_state(net: Network, stage: int) -> StateVector:
    """Source excitation propagated through stages ``[0, stage)``."""
    if not 0 <= stage <= len(net.stages):
        raise StructuralError(f"stage {stage} outside [0, {len(net.stages)}]")
    state = StateVector.unit(net.mode_count, net.source_mode)
    for element in net.stages[:stage]:
        state = apply_element(state, element)
    return state


def backward_state(net: Network, exit: str, stage: int) -> StateVector:
    """Exit excitation propagated back through the adjoints of stages ``[stage, end)``."""
    n = len(net.stages)
    if not 0 <= stage <= n:
        raise StructuralError(f"stage {stage} outside [0, {n}]")
    amps = StateVector.unit(net.mode_count, net.port_mode(exit)).amplitudes
    for element in reversed(net.stages[stage:]):
        amps = element_matrix(element, net.mode_count).conj().T @ amps
    return StateVector(amps, stage)


def transition_amplitude(net: Network, exit: str, stage: int = 0) -> complex:
    return complex(np.vdot(backward_state(net, exit, stage).amplitudes,
                           forward_state(net, stage).amplitudes))


def weak_values(net: Network, exit: str) -> WeakValueReport:
    """Weak value of every checkpoint projector, each taken at its own stage."""
    overlap = transition_amplitude(net, exit)
    if abs(overlap) <= OVERLAP_FLOOR:
        raise OrthogonalSelection(
            f"<backward|forward> = {overlap:.3g} for exit {exit!r}; weak values undefined"
        )
    values = {}
    for label, index in net.checkpoints.items():
        m = net.stages[index].mode
        fwd = forward_state(net, index).amplitudes[m]
        bwd = backward_state(net, exit, index).amplitudes[m]
        values[label] = complex(np.conj(bwd) * fwd / overlap)
    return WeakValueReport(values, overlap)


def weak_value(net: Network, exit: str, checkpoint: str) -> complex:
    net.checkpoint(checkpoint)
    return weak_values(net, exit)[checkpoint]


def _joint_amplitudes(net: Network, model: MarkerModel) -> np.ndarray:
    """Particle (x) markers pure state after the last stage, shape (modes, 2**K)."""
    bit = {label: k for k, label in enumerate(model.checkpoint_labels)}
    K = len(bit)
    psi = np.zeros((net.mode_count, 2 ** K), dtype=complex)
    psi[net.source_mode, 0] = 1.0
    rot = model.rotation()
    configs = np.arange(2 ** K)
    for element in net.stages:
        if isinstance(element, Checkpoint):
            k = bit[element.label]
            low = configs[(configs >> k & 1) == 0]
            high = low | (1 << k)
            row = psi[element.mode]
            no, yes = row[low].copy(), row[high].copy()
            row[low] = rot[0, 0] * no + rot[0, 1] * yes
            row[high] = rot[1, 0] * no + rot[1, 1] * yes
        else:
            psi = element_matrix(element, net.mode_count) @ psi
    return psi


def run_with_markers(net: Network, eps: float) -> JointOutcome:
    model = MarkerModel(_check_eps(eps), tuple(net.checkpoints))
    probs = np.abs(_joint_amplitudes(net, model)) ** 2
    exits = net.output_labels()
    table = {
        (exits[m], model.config_name(i)): float(probs[m, i])
        for m in range(net.mode_count)
        for i in range(probs.shape[1])
    }
    return JointOutcome(table, tuple(exits), model.checkpoint_labels, model.epsilon)


def detection_probability(net: Network, eps: float, exit: str) -> float:
    net.port_mode(exit)
    return run_with_markers(net, eps).exit_probability(exit)


def joint_decomposition(outcome: JointOutcome, exit: str) -> Decomposition:
    """Split P(exit) by marker reading, without conditioning."""
    outcome.exit_probability(exit)
    conclusive = {}
    for label in outcome.checkpoint_labels:
        conclusive[label] = math.fsum(
            p for (e, cfg), p in outcome.table.items()
            if e == exit and label in cfg.split("+")
        )
    return Decomposition(conclusive, outcome.table[(exit, "none")])


def conditional_decomposition(outcome: JointOutcome, exit: str) -> Decomposition:
    p_exit = outcome.exit_probability(exit)
    if p_exit <= NULL_PROBABILITY:
        raise ConditioningOnNull(f"exit {exit!r} has probability {p_exit:.3g}")
    return joint_decomposition(outcome, exit)


def incoherence_test(net: Network, eps: float, exit: str, checkpoint: str,
                     n_samples: int = 32, tol: float = INCOHERENCE_TOL) -> IncoherenceResult:
    """Sweep an extra phase at ``checkpoint`` and report whether P(exit) stays put."""
    if n_samples < 8:
        raise ValueError(f"n_samples must be at least 8, got {n_samples}")
    index = net.checkpoints.get(checkpoint)
    if index is None:
        raise StructuralError(f"no checkpoint labelled {checkpoint!r}")
    mode = net.stages[index].mode
    values = [
        detection_probability(net.with_stage_inserted(index + 1, PhaseShift(mode, theta)), eps, exit)
        for theta in np.arange(n_samples) * (2 * np.pi / n_samples)
    ]
    variation = max(values) - min(values)
    return IncoherenceResult(variation <= tol, variation)


def path_posterior(net: Network, eps: float, exit: str, method: str = "bayes_full",
                   bypass: str = "C") -> PathPosterior:
    """Posterior over checkpoints for particles detected at ``exit``.

    ``bayes_full`` conditions on a conclusive marker reading.  ``accounting``
    attributes conclusive mass to its checkpoint and the inconclusive mass to
    the ``bypass`` checkpoint; it is refused unless the phase at ``bypass`` is
    incoherent at this exit.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    decomp = conditional_decomposition(run_with_markers(net, eps), exit)
    if method == "bayes_full":
        norm = math.fsum(decomp.conclusive.values())
        if norm <= NULL_PROBABILITY:
            raise ConditioningOnNull(
                f"no conclusive marker readings at exit {exit!r} (eps={eps})"
            )
        return PathPosterior({k: v / norm for k, v in decomp.conclusive.items()}, method)

    net.checkpoint(bypass)
    check = incoherence_test(net, eps, exit, bypass)
    if not check.incoherent:
        raise AccountingNotJustified(
            f"P({exit}) varies by {check.max_variation:.3g} with the phase at {bypass}; "
            "the amplitudes meeting at the final splitter are coherent"
        )
    mass = dict(decomp.conclusive)
    mass[bypass] += decomp.inconclusive
    norm = decomp.total
    return PathPosterior({k: v / norm for k, v in mass.items()}, method)
