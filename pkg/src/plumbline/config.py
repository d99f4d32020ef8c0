"""Typed pipeline configuration with a strict JSON file representation.

Unknown keys are rejected (typos should fail loudly, not silently run
with defaults) and to_dict/from_dict round-trip losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .distortion import FREE_PARAM_NAMES, MsacConfig
from .edges import EdgeDetectParams
from .evaluation import MatchConfig
from .imaging import ClaheParams
from .segments import MergePolicy, ShapePolicy


class ConfigError(ValueError):
    """Raised for unknown keys or out-of-range values in a config file."""


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the detect/calibrate/eval commands need to run."""

    clahe_enabled: bool = True
    clahe: ClaheParams = field(default_factory=ClaheParams)
    edge: EdgeDetectParams = field(default_factory=EdgeDetectParams)
    min_chain: int = 10
    merge: MergePolicy = field(default_factory=MergePolicy)
    shape: ShapePolicy = field(default_factory=ShapePolicy)
    msac: MsacConfig = field(default_factory=MsacConfig)
    free_params: tuple[str, ...] = ("k1", "k2")
    match: MatchConfig = field(default_factory=MatchConfig)

    def __post_init__(self) -> None:
        if self.min_chain < 2:
            raise ConfigError(f"chain.min_chain must be >= 2, got {self.min_chain}")
        for name in self.free_params:
            if name not in FREE_PARAM_NAMES:
                raise ConfigError(f"unknown free parameter {name!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "clahe": {
                "enabled": self.clahe_enabled,
                "tile_grid": list(self.clahe.tile_grid),
                "clip_limit": self.clahe.clip_limit,
            },
            "edge": {
                "t_low": self.edge.t_low,
                "t_high": self.edge.t_high,
                "blur_sigma": self.edge.blur_sigma,
            },
            "chain": {"min_chain": self.min_chain},
            "merge": {
                "residual_threshold": self.merge.residual_threshold,
                "neighbor_radius": self.merge.neighbor_radius,
                "max_rounds": self.merge.max_rounds,
            },
            "shape": {"min_arc_length": self.shape.min_arc_length},
            "msac": {
                "inlier_threshold": self.msac.inlier_threshold,
                "max_iterations": self.msac.max_iterations,
                "sample_size": self.msac.sample_size,
                "confidence": self.msac.confidence,
                "rng_seed": self.msac.rng_seed,
            },
            "free_params": list(self.free_params),
            "match": {
                "match_distance": self.match.match_distance,
                "coverage_tp": self.match.coverage_tp,
                "coverage_recalled": self.match.coverage_recalled,
            },
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "PipelineConfig":
        defaults = cls()
        known_sections = {
            "clahe", "edge", "chain", "merge", "shape", "msac",
            "free_params", "match",
        }
        _reject_unknown(raw, known_sections, "config")

        def section(name: str, known: set[str]) -> dict[str, Any]:
            sec = raw.get(name, {})
            if not isinstance(sec, dict):
                raise ConfigError(f"config.{name} must be an object")
            _reject_unknown(sec, known, f"config.{name}")
            return sec

        cl = section("clahe", {"enabled", "tile_grid", "clip_limit"})
        ed = section("edge", {"t_low", "t_high", "blur_sigma"})
        ch = section("chain", {"min_chain"})
        me = section("merge", {"residual_threshold", "neighbor_radius", "max_rounds"})
        sh = section("shape", {"min_arc_length"})
        ms = section(
            "msac",
            {"inlier_threshold", "max_iterations", "sample_size", "confidence", "rng_seed"},
        )
        ma = section("match", {"match_distance", "coverage_tp", "coverage_recalled"})

        free = raw.get("free_params", list(defaults.free_params))
        if not isinstance(free, (list, tuple)) or not all(
            isinstance(x, str) for x in free
        ):
            raise ConfigError("config.free_params must be a list of names")

        tile_grid = cl.get("tile_grid", list(defaults.clahe.tile_grid))
        if not (isinstance(tile_grid, (list, tuple)) and len(tile_grid) == 2):
            raise ConfigError("config.clahe.tile_grid must be a pair")

        try:
            return cls(
                clahe_enabled=bool(cl.get("enabled", defaults.clahe_enabled)),
                clahe=ClaheParams(
                    tile_grid=(int(tile_grid[0]), int(tile_grid[1])),
                    clip_limit=float(cl.get("clip_limit", defaults.clahe.clip_limit)),
                ),
                edge=EdgeDetectParams(
                    t_low=float(ed.get("t_low", defaults.edge.t_low)),
                    t_high=float(ed.get("t_high", defaults.edge.t_high)),
                    blur_sigma=float(ed.get("blur_sigma", defaults.edge.blur_sigma)),
                ),
                min_chain=int(ch.get("min_chain", defaults.min_chain)),
                merge=MergePolicy(
                    residual_threshold=float(
                        me.get("residual_threshold", defaults.merge.residual_threshold)
                    ),
                    neighbor_radius=float(
                        me.get("neighbor_radius", defaults.merge.neighbor_radius)
                    ),
                    max_rounds=int(me.get("max_rounds", defaults.merge.max_rounds)),
                ),
                shape=ShapePolicy(
                    min_arc_length=float(
                        sh.get("min_arc_length", defaults.shape.min_arc_length)
                    )
                ),
                msac=MsacConfig(
                    inlier_threshold=float(
                        ms.get("inlier_threshold", defaults.msac.inlier_threshold)
                    ),
                    max_iterations=int(
                        ms.get("max_iterations", defaults.msac.max_iterations)
                    ),
                    sample_size=int(ms.get("sample_size", defaults.msac.sample_size)),
                    confidence=float(ms.get("confidence", defaults.msac.confidence)),
                    rng_seed=int(ms.get("rng_seed", defaults.msac.rng_seed)),
                ),
                free_params=tuple(free),
                match=MatchConfig(
                    match_distance=float(
                        ma.get("match_distance", defaults.match.match_distance)
                    ),
                    coverage_tp=float(ma.get("coverage_tp", defaults.match.coverage_tp)),
                    coverage_recalled=float(
                        ma.get("coverage_recalled", defaults.match.coverage_recalled)
                    ),
                ),
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e


def _reject_unknown(obj: dict[str, Any], known: set[str], where: str) -> None:
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def load_config(path: str) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return PipelineConfig.from_dict(raw)


def save_config(config: PipelineConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(config.to_dict(), f, indent=2)
        f.write("\n")
