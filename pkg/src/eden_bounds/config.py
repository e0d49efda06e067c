"""Box capacities per level, and the bundled fast / paper-scale presets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

PRESETS = ("fast", "paper-scale")


def _as_shape(level: int, caps) -> tuple[int, ...]:
    if isinstance(caps, int):
        caps = [caps]
    shape = tuple(int(c) for c in caps)
    if len(shape) != level:
        raise ValueError(f"level {level} needs {level} capacities, got {shape}")
    if min(shape) < 1:
        raise ValueError(f"capacities must be >= 1, got {shape} at level {level}")
    return shape


@dataclass(frozen=True)
class BoxConfig:
    """``shapes[level]`` is the capacity vector of that level's table.

    Level 1 has one entry (i_max); level n has n entries, plane 0 first.
    ``overrides`` maps a dimension to level shapes replacing the defaults.
    """

    shapes: Mapping[int, tuple[int, ...]]
    overrides: Mapping[int, Mapping[int, tuple[int, ...]]] = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "shapes",
                           {int(lv): _as_shape(int(lv), c) for lv, c in self.shapes.items()})
        object.__setattr__(self, "overrides", {
            int(d): {int(lv): _as_shape(int(lv), c) for lv, c in lvls.items()}
            for d, lvls in self.overrides.items()})

    def shape(self, level: int) -> tuple[int, ...]:
        try:
            return self.shapes[level]
        except KeyError:
            raise KeyError(f"config '{self.name}' has no box for level {level}") from None

    @property
    def max_level(self) -> int:
        return max(self.shapes)

    def for_dimension(self, d: int) -> "BoxConfig":
        if d not in self.overrides:
            return self
        shapes = dict(self.shapes)
        shapes.update(self.overrides[d])
        return BoxConfig(shapes, name=f"{self.name}[d={d}]")

    def with_levels(self, shapes: Mapping[int, tuple[int, ...]]) -> "BoxConfig":
        merged = dict(self.shapes)
        merged.update(shapes)
        return BoxConfig(merged, overrides={}, name=f"{self.name}+box")

    def validate(self, max_level: int, first_level: int = 1) -> None:
        """Check every level in range exists and the level below covers its faces."""
        for lv in range(first_level, max_level + 1):
            self.shape(lv)
        for lv in range(first_level + 1, max_level + 1):
            up, low = self.shape(lv), self.shape(lv - 1)
            # faces of level lv read the lower table at (i_1, ..., i_{lv-1})
            if any(u > l for u, l in zip(up[1:], low)):
                raise ValueError(
                    f"level {lv - 1} box {low} does not cover faces of level {lv} box {up}")

    def to_dict(self) -> dict:
        out = {"name": self.name,
               "levels": {str(lv): list(s) for lv, s in sorted(self.shapes.items())}}
        if self.overrides:
            out["overrides"] = {
                str(d): {str(lv): list(s) for lv, s in sorted(lv_map.items())}
                for d, lv_map in sorted(self.overrides.items())}
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "BoxConfig":
        return cls(shapes=data["levels"], overrides=data.get("overrides", {}),
                   name=data.get("name", "custom"))

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_file(cls, path: str | Path) -> "BoxConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    @classmethod
    def parse_box(cls, text: str, name: str = "custom") -> "BoxConfig":
        """Parse ``"1000000,20000x2000,4000x400x100"`` (level 1 first)."""
        shapes = {}
        for lv, part in enumerate(text.split(","), start=1):
            shapes[lv] = tuple(int(x) for x in part.strip().split("x"))
        return cls(shapes, name=name)

    def box_string(self) -> str:
        return ",".join("x".join(str(c) for c in self.shapes[lv]) for lv in sorted(self.shapes))

    @classmethod
    def preset(cls, name: str) -> "BoxConfig":
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
        fname = name.replace("-", "_") + ".json"
        text = resources.files("eden_bounds").joinpath("configs", fname).read_text()
        return cls.from_dict(json.loads(text))
