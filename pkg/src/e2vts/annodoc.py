"""The annotation document: the JSON interchange format shared by the
propagation engine, the evaluation tools, the HTTP service and the UI.

Schema (version 1)::

    {
      "version": 1,
      "frames": [
        {"index": 0,
         "annotations": [
           {"track_id": 0,
            "quad": [[x, y], [x, y], [x, y], [x, y]],
            "label": "EXIT" | null,
            "source": "human" | "propagated"}
        ]}
      ],
      "diagnostics": [
        {"frame": 1, "matches": 120, "inliers": 96,
         "mean_reproj_error": 0.41, "status": "ok" | "failed", ...}
      ]
    }

Coordinates are pixels, origin top-left.  Serialization is canonical
(sorted keys, fixed separators) so identical documents are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import Quad

DOC_VERSION = 1

SOURCE_HUMAN = "human"
SOURCE_PROPAGATED = "propagated"
_SOURCES = {SOURCE_HUMAN, SOURCE_PROPAGATED}


@dataclass
class Annotation:
    track_id: int
    quad: Quad
    label: str | None = None
    source: str = SOURCE_HUMAN

    def __post_init__(self):
        if self.source not in _SOURCES:
            raise ValueError(f"unknown annotation source {self.source!r}")

    def to_dict(self) -> dict:
        return {
            "track_id": self.track_id,
            "quad": [[x, y] for x, y in self.quad.points],
            "label": self.label,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Annotation":
        return cls(
            track_id=int(doc["track_id"]),
            quad=Quad(tuple((float(x), float(y)) for x, y in doc["quad"])),
            label=doc.get("label"),
            source=doc.get("source", SOURCE_HUMAN),
        )


@dataclass
class AnnotationDocument:
    frames: dict[int, list[Annotation]] = field(default_factory=dict)
    diagnostics: list[dict] = field(default_factory=list)

    def annotations_for(self, index: int) -> list[Annotation]:
        return self.frames.get(index, [])

    def set_frame(self, index: int, annotations: list[Annotation]) -> None:
        self.frames[index] = list(annotations)

    def to_dict(self) -> dict:
        return {
            "version": DOC_VERSION,
            "frames": [
                {"index": idx,
                 "annotations": [a.to_dict() for a in self.frames[idx]]}
                for idx in sorted(self.frames)
            ],
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "AnnotationDocument":
        if doc.get("version") != DOC_VERSION:
            raise ValueError(f"unsupported document version {doc.get('version')}")
        frames: dict[int, list[Annotation]] = {}
        for entry in doc.get("frames", []):
            idx = int(entry["index"])
            frames[idx] = [Annotation.from_dict(a)
                           for a in entry.get("annotations", [])]
        return cls(frames=frames, diagnostics=list(doc.get("diagnostics", [])))

    @classmethod
    def from_json(cls, text: str) -> "AnnotationDocument":
        return cls.from_dict(json.loads(text))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "AnnotationDocument":
        return cls.from_json(Path(path).read_text())
