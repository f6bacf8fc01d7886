"""Run configuration and JSON run reports."""

from __future__ import annotations

import json
import platform
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from . import __version__
from .errors import DomainError
from .protocol import CLASSES, DEFAULT_N_MAX, ProtocolConfig, VolumetricScore
from .randomgen import RNG_ALGORITHM
from .routing import parse_topology
from .sim import NoiseModel

VOLATILE_KEYS = ("timestamp", "timings", "host")

DEFAULTS = {
    "classes": [1, 2, 3, 4],
    "n_max": None,
    "circuits": 100,
    "shots": 1000,
    "noise": {"p1": 0.0, "p2": 0.0, "p_swap": 0.0, "p_readout": 0.0},
    "topology": "all2all",
    "pairing": "adjacent",
    "seed": 0,
}


@dataclass(frozen=True)
class RunConfig:
    classes: tuple[int, ...] = (1, 2, 3, 4)
    n_max: int | None = None
    circuits: int = 100
    shots: int = 1000
    noise: NoiseModel = field(default_factory=NoiseModel)
    topology: str = "all2all"
    pairing: str = "adjacent"
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        bad = [k for k in self.classes if k not in CLASSES]
        if bad or not self.classes:
            raise DomainError(f"classes must be drawn from {CLASSES}, got {list(self.classes)}")
        if self.n_max is not None and self.n_max < 2:
            raise DomainError("n_max must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.pairing not in ("adjacent", "random-disjoint"):
            raise DomainError(f"unknown pairing {self.pairing!r}")
        parse_topology(self.topology)
        self.protocol()

    def protocol(self) -> ProtocolConfig:
        return ProtocolConfig(
            circuits=self.circuits,
            shots=self.shots,
            topology=parse_topology(self.topology),
            pairing=self.pairing,
            jobs=self.jobs,
        )

    def n_max_for(self, k: int) -> int:
        return self.n_max if self.n_max is not None else DEFAULT_N_MAX[k]

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "n_max": self.n_max,
            "circuits": self.circuits,
            "shots": self.shots,
            "noise": self.noise.to_dict(),
            "topology": self.topology,
            "pairing": self.pairing,
            "seed": self.seed,
            "rng_algorithm": RNG_ALGORITHM,
        }

    @classmethod
    def from_dict(cls, data: dict, jobs: int = 1) -> "RunConfig":
        merged = {**DEFAULTS, **{k: v for k, v in data.items() if k in DEFAULTS}}
        noise = {**DEFAULTS["noise"], **(merged["noise"] or {})}
        return cls(
            classes=tuple(int(k) for k in merged["classes"]),
            n_max=None if merged["n_max"] is None else int(merged["n_max"]),
            circuits=int(merged["circuits"]),
            shots=int(merged["shots"]),
            noise=NoiseModel(**{k: float(v) for k, v in noise.items()}),
            topology=str(merged["topology"]),
            pairing=str(merged["pairing"]),
            seed=int(merged["seed"]),
            jobs=jobs,
        )

    def with_jobs(self, jobs: int) -> "RunConfig":
        return replace(self, jobs=jobs)


def load_config_file(path) -> dict:
    """Read a config JSON file; a previous run report is accepted and its echoed config used."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise DomainError(f"{path}: config must be a JSON object")
    return data


def routing_summary(scores: list[VolumetricScore]) -> dict:
    out = {}
    for s in scores:
        out[f"QV-{s.k}"] = [
            {
                "n": w.n,
                "logical_depth": w.depth,
                "physical_depth": w.routed_depth,
                "overhead_layers": w.routed_depth - w.depth,
                "mean_swaps": w.mean_swaps,
            }
            for w in s.widths
        ]
    return out


def build_report(config: RunConfig, scores: list[VolumetricScore], timings: dict) -> dict:
    return {
        "tool": "volbench",
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "host": {"python": platform.python_version(), "machine": platform.machine()},
        "config": config.to_dict(),
        "protocol": {
            "threshold": "2/3",
            "confidence": "pooled HOP minus 2 sigma binomial error over circuits*shots",
            "noise_model": "gate-attached depolarizing (p1 idle, p2 SU(4), p_swap routing SWAP) + readout bit flips",
        },
        "scores": [s.to_dict() for s in scores],
        "routing": routing_summary(scores),
        "timings": timings,
    }


def strip_volatile(report: dict) -> dict:
    return {k: v for k, v in report.items() if k not in VOLATILE_KEYS}


def summary_lines(scores: list[VolumetricScore]) -> list[str]:
    lines = []
    for s in scores:
        passed = ", ".join(
            f"n={w.n}:{'pass' if w.passed else 'fail'}({w.heavy.pooled_hop:.3f})" for w in s.widths
        )
        lines.append(f"QV-{s.k} = {s.score}   [{passed}]")
    return lines
