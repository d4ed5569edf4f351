"""Flat key-value configuration files.

Format: one ``section.key = value`` per line, ``#`` comments, blank lines
ignored.  Values are parsed as bool/int/float when they look like one,
otherwise kept as strings.  Unknown keys are rejected so typos fail fast.
"""

from __future__ import annotations

from pathlib import Path

from .pipeline import PipelineConfig
from .quality import QualityConfig
from .textregion import ScreenConfig

_QUALITY_KEYS = {
    "quality.window_size": ("window_size", int),
    "quality.subsample_rate": ("subsample_rate", int),
    "quality.lambda": ("lam", float),
    "quality.analysis_max_side": ("analysis_max_side", int),
}
_SCREEN_KEYS = {
    "screen.theta": ("theta", int),
    "screen.alpha": ("alpha", float),
    "screen.canny_low": ("canny_low", float),
    "screen.canny_high": ("canny_high", float),
    "screen.close_w": ("close_w", int),
    "screen.close_h": ("close_h", int),
    "screen.busy_threshold": ("busy_threshold", int),
    "screen.margin_px": ("margin_px", int),
}
_PIPELINE_KEYS = {
    "pipeline.stage1": ("stage1", None),
    "pipeline.stage2": ("stage2", None),
    "pipeline.stage3": ("stage3", None),
    "pipeline.ood_model": ("ood_model_path", str),
    "pipeline.threads": ("threads", int),
}

KNOWN_KEYS = set(_QUALITY_KEYS) | set(_SCREEN_KEYS) | set(_PIPELINE_KEYS)


class ConfigError(Exception):
    pass


def _parse_scalar(text: str):
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> dict:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _parse_scalar(value.strip())
    return values


def load_config_file(path: str | Path) -> dict:
    return parse_config_text(Path(path).read_text())


def build_pipeline_config(values: dict | None = None) -> PipelineConfig:
    values = dict(values or {})
    qkw, skw, pkw = {}, {}, {}
    for key, val in values.items():
        if key in _QUALITY_KEYS:
            name, cast = _QUALITY_KEYS[key]
            qkw[name] = cast(val)
        elif key in _SCREEN_KEYS:
            name, cast = _SCREEN_KEYS[key]
            skw[name] = cast(val)
        elif key in _PIPELINE_KEYS:
            name, cast = _PIPELINE_KEYS[key]
            pkw[name] = cast(val) if cast else bool(val)
        else:
            raise ConfigError(f"unknown key {key!r}")
    try:
        return PipelineConfig(quality=QualityConfig(**qkw),
                              screen=ScreenConfig(**skw), **pkw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
