"""Strict JSON pipeline configuration."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from bitext_forge.miner import MiningConfig


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(message)


PATH_KEYS = (
    "queries",
    "query_embeddings",
    "targets",
    "target_embeddings",
    "index_dir",
    "src",
    "src_embeddings",
    "tgt",
    "tgt_embeddings",
    "bitext",
    "benchmarks",
    "blocklist",
    "lid",
    "src_lid",
    "tgt_lid",
)
# keys naming files the pipeline writes rather than reads
OUTPUT_KEYS = ("index_dir",)


@dataclass
class PipelineConfig:
    mining: MiningConfig = field(default_factory=MiningConfig)
    paths: dict[str, Any] = field(default_factory=dict)
    src_lang: str | None = None
    tgt_lang: str | None = None
    qc_delta: float = 10.0
    bootstrap_trials: int = 1000
    alpha: float = 0.05
    seed: int = 12345
    shards: int = 5
    k_c: int = 64
    m_sub: int = 16
    ksub: int | None = None
    kmeans_iters: int = 25

    def path(self, key: str) -> Path:
        value = self.paths.get(key)
        if value is None:
            raise ConfigError(f"config key paths.{key} is required for this subcommand", f"paths.{key}")
        return Path(value)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out.update(out.pop("mining"))
        return out


_MINING_FIELDS = {f.name for f in dataclasses.fields(MiningConfig)}
_TOP_FIELDS = {f.name for f in dataclasses.fields(PipelineConfig)} - {"mining"}


def config_from_dict(raw: dict, *, base_dir: Path | None = None, check_paths: bool = True) -> PipelineConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    mining_kw = {}
    top_kw: dict[str, Any] = {}
    for key, value in raw.items():
        if key in _MINING_FIELDS:
            mining_kw[key] = value
        elif key in _TOP_FIELDS:
            top_kw[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}", key)
    paths = top_kw.get("paths", {})
    if not isinstance(paths, dict):
        raise ConfigError("paths must be an object", "paths")
    for key in paths:
        if key not in PATH_KEYS:
            raise ConfigError(f"unknown config key 'paths.{key}'", f"paths.{key}")
    resolved: dict[str, Any] = {}
    for key, value in paths.items():
        values = value if isinstance(value, list) else [value]
        out = []
        for v in values:
            p = Path(v)
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            if check_paths and key not in OUTPUT_KEYS and not p.exists():
                raise ConfigError(f"paths.{key}: {p} does not exist", f"paths.{key}")
            out.append(str(p))
        resolved[key] = out if isinstance(value, list) else out[0]
    top_kw["paths"] = resolved
    try:
        mining = MiningConfig(**mining_kw)
        return PipelineConfig(mining=mining, **top_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None, *, check_paths: bool = True) -> PipelineConfig:
    """Read a JSON config; absent keys take the defaults, unknown keys are rejected.

    Relative paths inside ``paths`` resolve against the config file's directory.
    """
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return config_from_dict(raw, base_dir=path.parent, check_paths=check_paths)
