"""Named experiments on the three-path interferometer and generic parameter sweeps.

Link names used by :func:`figure_weights` (fixed so figure data stays stable):

``S-BS1``, ``BS1-C``, ``BS1-BS2``, ``BS2-A``, ``BS2-B``, ``A-BS3``, ``B-BS3``,
``C-BS4``, ``BS3-BS4``, ``BS3-I``, ``BS4-III``, ``BS4-II``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from . import engine
from .dsl import CircuitDoc, UnboundParameter, lower
from .network import Network, PhaseConfig, build_three_path

PRESET = "three-path"
DEFAULTS = {"alpha": 0.0, "beta": 0.0, "gamma": 0.0, "R4": 1 / 3, "eps": 0.0}
FRINGE_POINTS = 64


class UnknownMetric(ValueError):
    pass


class UnknownParameter(ValueError):
    pass


class Link(NamedTuple):
    mode: int
    stage: int


# (mode, stage index before which the amplitude is read) for the preset layout
PRESET_LINKS: dict[str, Link] = {
    "S-BS1": Link(0, 0),
    "BS1-C": Link(0, 2),
    "BS1-BS2": Link(1, 1),
    "BS2-A": Link(1, 2),
    "BS2-B": Link(2, 2),
    "A-BS3": Link(1, 8),
    "B-BS3": Link(2, 8),
    "C-BS4": Link(0, 9),
    "BS3-BS4": Link(1, 9),
    "BS3-I": Link(2, 9),
    "BS4-III": Link(0, 10),
    "BS4-II": Link(1, 10),
}

# sets of links that together cross the whole network at one instant
PRESET_CUTS: dict[str, tuple[str, ...]] = {
    "source": ("S-BS1",),
    "after-BS1": ("BS1-C", "BS1-BS2"),
    "checkpoints": ("BS2-A", "BS2-B", "BS1-C"),
    "after-BS3": ("C-BS4", "BS3-BS4", "BS3-I"),
    "exits": ("BS4-III", "BS4-II", "BS3-I"),
}


@dataclass(frozen=True)
class LinkWeights:
    forward: Mapping[str, float]
    backward: Mapping[str, float]
    R4: float
    phases: PhaseConfig
    exit: str = "III"
    cuts: Mapping[str, tuple[str, ...]] = field(default_factory=lambda: dict(PRESET_CUTS))

    def rows(self) -> list[dict]:
        return [
            {"link": name, "forward": self.forward[name], "backward": self.backward[name]}
            for name in PRESET_LINKS
        ]


def figure_weights(R4: float, phases: PhaseConfig | None = None, exit: str = "III") -> LinkWeights:
    """Squared forward and backward amplitudes on every link of the preset."""
    phases = phases or PhaseConfig()
    net = build_three_path(R4, phases)
    n = len(net.stages)
    fwd = [engine.forward_state(net, s).probabilities for s in range(n + 1)]
    bwd = [engine.backward_state(net, exit, s).probabilities for s in range(n + 1)]
    forward = {name: float(fwd[l.stage][l.mode]) for name, l in PRESET_LINKS.items()}
    backward = {name: float(bwd[l.stage][l.mode]) for name, l in PRESET_LINKS.items()}
    return LinkWeights(forward, backward, R4, phases, exit)


def retrocausation_compare(eps: float, exit: str = "III") -> list[dict]:
    """Weak values next to the accounting posterior for R4 = 1/3 and R4 = 1."""
    if not 0.0 <= eps < 1 / 3:
        raise engine.DomainError(f"eps={eps!r} outside [0, 1/3)")
    rows = []
    for label, R4 in (("1/3", 1 / 3), ("1", 1.0)):
        net = build_three_path(R4)
        wv = engine.weak_values(net, exit)
        post = engine.path_posterior(net, eps, exit, method="accounting")
        row = {"R4": label, f"P_{exit}": engine.detection_probability(net, eps, exit)}
        for cp in ("A", "B", "C"):
            row[f"W_{cp}_re"] = wv[cp].real
            row[f"W_{cp}_im"] = wv[cp].imag
        for cp in ("A", "B", "C"):
            row[f"post_{cp}"] = post[cp]
        row["method"] = post.method
        rows.append(row)
    return rows


def fit_fringe(delta: Sequence[float], values: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares ``offset + a*cos(delta) + b*sin(delta)``; returns (offset, a, b)."""
    delta = np.asarray(delta, dtype=float)
    design = np.column_stack([np.ones_like(delta), np.cos(delta), np.sin(delta)])
    coef, *_ = np.linalg.lstsq(design, np.asarray(values, dtype=float), rcond=None)
    return float(coef[0]), float(coef[1]), float(coef[2])


Source = Union[str, CircuitDoc]


def _network(source: Source, point: Mapping[str, float]) -> Network:
    if isinstance(source, CircuitDoc):
        if point["R4"] != DEFAULTS["R4"]:
            raise UnknownParameter("R4 is only adjustable on the three-path preset")
        names = source.parameters
        return lower(source, {k: point[k] for k in names if k in point})
    if source != PRESET:
        raise UnknownParameter(f"unknown preset {source!r}; available: {PRESET}")
    return build_three_path(point["R4"], PhaseConfig(point["alpha"], point["beta"], point["gamma"]))


def _detection(source, point, exit):
    return engine.detection_probability(_network(source, point), point["eps"], exit)


def _incoherence(source, point, exit):
    net = _network(source, point)
    return engine.incoherence_test(net, point["eps"], exit, "C").max_variation


def _fringe(source, point, exit):
    deltas = np.arange(FRINGE_POINTS) * (2 * np.pi / FRINGE_POINTS)
    values = []
    for d in deltas:
        p = dict(point, gamma=point["alpha"], beta=point["alpha"] - d)
        values.append(_detection(source, p, exit))
    return fit_fringe(deltas, values)[1]


METRICS: dict[str, Callable] = {
    "detection_probability": _detection,
    "incoherence_variation": _incoherence,
    "fringe_coefficient": _fringe,
}


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    grid: tuple[float, ...]
    metric: str
    values: tuple[float, ...]
    metadata: Mapping[str, object]

    def rows(self) -> list[dict]:
        return [{self.parameter: g, self.metric: v} for g, v in zip(self.grid, self.values)]


def sweep(source: Source, parameter: str, grid: Sequence[float], metric: str,
          fixed: Mapping[str, float] | None = None, exit: str = "III") -> SweepResult:
    """Evaluate ``metric`` at every grid value of ``parameter``.

    ``parameter`` is one of alpha, beta, gamma, R4, eps, a named phase of a
    circuit document, or ``delta``, which sets beta = alpha - delta.
    """
    if metric not in METRICS:
        raise UnknownMetric(f"unknown metric {metric!r}; valid metrics: {', '.join(METRICS)}")
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    known = set(DEFAULTS) | {"delta"}
    if isinstance(source, CircuitDoc):
        known |= set(source.parameters)
    fixed = dict(fixed or {})
    for name in [parameter, *fixed]:
        if name not in known:
            raise UnknownParameter(f"unknown parameter {name!r}; known: {sorted(known)}")
    base = {**DEFAULTS, **fixed}
    if isinstance(source, CircuitDoc):
        for name, span in source.parameters.items():
            if name not in base and name != parameter:
                raise UnboundParameter(name, span)

    def point(value: float) -> dict:
        p = dict(base)
        if parameter == "delta":
            p["beta"] = p["alpha"] - value
        else:
            p[parameter] = value
        return p

    fn = METRICS[metric]
    values = tuple(float(fn(source, point(g), exit)) for g in grid)
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"metric {metric!r} produced non-finite values")
    meta = {
        "source": source if isinstance(source, str) else "file",
        "exit": exit,
        **{k: v for k, v in base.items()
           if k != parameter and not (parameter == "delta" and k == "beta")},
    }
    return SweepResult(parameter, grid, metric, values, meta)
