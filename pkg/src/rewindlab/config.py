"""Experiment configuration: JSON-round-trippable specs for channels,
protocols, and scheme parameters, plus the config hash stamped into every
output file."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

from . import channels, protocol as protocol_mod, scheme

CHANNEL_TYPES = ("bsc", "bec", "biawgn", "mixture")


@dataclass(frozen=True)
class ChannelSpec:
    """Serializable channel description: {type, params}."""

    type: str
    params: dict

    def __post_init__(self):
        if self.type not in CHANNEL_TYPES:
            raise ValueError(f"unknown channel type {self.type!r}")

    def build(self) -> channels.ChannelModel:
        p = self.params
        if self.type == "bsc":
            return channels.make_bsc(p["eps"])
        if self.type == "bec":
            return channels.make_bec(p["eps"], p.get("mark_erasures", True))
        if self.type == "biawgn":
            return channels.make_biawgn(p["sigma"], p.get("n_atoms", 4096))
        return channels.ChannelModel(
            atoms=tuple((t, w) for t, w in p["atoms"]),
            label=p.get("label", "mixture"),
            mark_erasures=p.get("mark_erasures", False),
        )


@dataclass(frozen=True)
class ProtocolSpec:
    kind: str
    length: int
    seed: int = 0

    def build(self) -> protocol_mod.InteractiveProtocol:
        p = protocol_mod.builtin_protocol(self.kind, self.length, self.seed)
        if not p.alternating:
            p = protocol_mod.symmetrize(p)
        return p


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelSpec
    protocol: ProtocolSpec
    scheme: scheme.SchemeConfig
    trials: int
    master_seed: int
    out_dir: str = "results"
    label: str = "experiment"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.master_seed < 0:
            raise ValueError("master seed must be a non-negative integer")

    def validate(self):
        """Admissibility of the referenced parameters; raises on violation."""
        ch = self.channel.build()
        eps_eff = sum(w * t for t, w in ch.atoms)
        scheme.check_admissible(self.scheme, eps_eff)
        self.protocol.build()
        return self

    def to_dict(self) -> dict:
        return {
            "channel": asdict(self.channel),
            "protocol": asdict(self.protocol),
            "scheme": asdict(self.scheme),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "out_dir": self.out_dir,
            "label": self.label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            channel=ChannelSpec(**d["channel"]),
            protocol=ProtocolSpec(**d["protocol"]),
            scheme=scheme.SchemeConfig(**d["scheme"]),
            trials=d["trials"],
            master_seed=d["master_seed"],
            out_dir=d.get("out_dir", "results"),
            label=d.get("label", "experiment"),
        ).validate()

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]
