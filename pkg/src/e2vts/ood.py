"""Stage III: early-exit rejection of out-of-distribution frames.

A lightweight feature extractor (default: per-cell edge density on an 8x8
grid of the closed Stage II edge map) feeds a linear SVM trained with
deterministic Pegasos-style subgradient descent on the regularized hinge
loss.  Features are z-scored with the training statistics; ties at the
decision boundary accept, since a false reject loses a scene.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imgcore import Frame, canny, morph_close, to_grayscale
from .textregion import ScreenConfig, closed_edge_map

STD_FLOOR = 1e-8
MODEL_VERSION = 1

ACCEPT = 1
REJECT = -1


def edge_density_grid(binary: np.ndarray, grid: int = 8) -> np.ndarray:
    """Mean edge density of each cell of a ``grid`` x ``grid`` partition."""
    src = (np.asarray(binary) != 0).astype(np.float64)
    h, w = src.shape
    rows = np.array_split(np.arange(h), grid)
    cols = np.array_split(np.arange(w), grid)
    out = np.empty(grid * grid, dtype=np.float64)
    k = 0
    for rs in rows:
        for cs in cols:
            cell = src[rs[0]:rs[-1] + 1, cs[0]:cs[-1] + 1] if len(rs) and len(cs) \
                else np.zeros((1, 1))
            out[k] = cell.mean()
            k += 1
    return out


class EdgeGridExtractor:
    """Default feature extractor: 8x8 edge-density grid of the closed map."""

    def __init__(self, grid: int = 8, screen_cfg: ScreenConfig | None = None):
        self.grid = grid
        self.screen_cfg = screen_cfg or ScreenConfig()

    @property
    def extractor_id(self) -> str:
        return f"edge-grid-{self.grid}x{self.grid}"

    @property
    def dim(self) -> int:
        return self.grid * self.grid

    def __call__(self, frame: Frame) -> np.ndarray:
        cfg = self.screen_cfg
        if frame.channels == 3:
            closed = closed_edge_map(frame, cfg)
        else:
            edges = canny(to_grayscale(frame), cfg.canny_low, cfg.canny_high)
            closed = morph_close(edges, cfg.close_w, cfg.close_h)
        return edge_density_grid(closed, self.grid)

    def params(self) -> dict:
        cfg = self.screen_cfg
        return {"grid": self.grid, "canny_low": cfg.canny_low,
                "canny_high": cfg.canny_high, "close_w": cfg.close_w,
                "close_h": cfg.close_h}

    @classmethod
    def from_params(cls, params: dict) -> "EdgeGridExtractor":
        cfg = ScreenConfig(canny_low=params["canny_low"],
                           canny_high=params["canny_high"],
                           close_w=params["close_w"],
                           close_h=params["close_h"])
        return cls(grid=params["grid"], screen_cfg=cfg)


def extract_features(frame: Frame,
                     extractor: EdgeGridExtractor | None = None) -> np.ndarray:
    """Feature vector of one frame under the given (or default) extractor."""
    return (extractor or EdgeGridExtractor())(frame)


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray
    extractor_id: str
    extractor_params: dict = field(default_factory=dict)
    seed: int = 0
    reg: float = 1e-4
    epochs: int = 100

    def __post_init__(self):
        if np.any(self.std <= 0):
            raise ValueError("standardization stds must be positive")
        if not (len(self.weights) == len(self.mean) == len(self.std)):
            raise ValueError("model dimensions disagree")

    @property
    def dim(self) -> int:
        return len(self.weights)

    def decision_value(self, features: np.ndarray) -> float:
        features = np.asarray(features, dtype=np.float64)
        if features.shape != (self.dim,):
            raise ValueError(
                f"feature dimension {features.shape} does not match model ({self.dim},)")
        z = (features - self.mean) / self.std
        return float(self.weights @ z + self.bias)

    def to_json(self) -> str:
        doc = {
            "version": MODEL_VERSION,
            "extractor": self.extractor_id,
            "extractor_params": self.extractor_params,
            "dim": self.dim,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "seed": self.seed,
            "reg": self.reg,
            "epochs": self.epochs,
        }
        return json.dumps(doc, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SvmModel":
        doc = json.loads(text)
        if doc.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')}")
        return cls(
            weights=np.asarray(doc["weights"], dtype=np.float64),
            bias=float(doc["bias"]),
            mean=np.asarray(doc["mean"], dtype=np.float64),
            std=np.asarray(doc["std"], dtype=np.float64),
            extractor_id=doc["extractor"],
            extractor_params=doc.get("extractor_params", {}),
            seed=int(doc["seed"]),
            reg=float(doc["reg"]),
            epochs=int(doc["epochs"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "SvmModel":
        return cls.from_json(Path(path).read_text())

    def make_extractor(self) -> EdgeGridExtractor:
        if self.extractor_id.startswith("edge-grid-"):
            return EdgeGridExtractor.from_params(self.extractor_params)
        raise ValueError(f"unknown extractor id {self.extractor_id!r}")


def hinge_objective(w: np.ndarray, b: float, z: np.ndarray, y: np.ndarray,
                    reg: float) -> float:
    """L2-regularized mean hinge loss in standardized feature space."""
    margins = y * (z @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins)
    return float(0.5 * reg * (w @ w) + hinge.mean())


def svm_train(samples, labels, reg: float = 1e-4, epochs: int = 100,
              seed: int = 0, collect_history: bool = False):
    """Train a linear SVM with seeded Pegasos-style subgradient descent.

    The bias rides along as an extra always-one coordinate appended after
    standardization.  After every epoch the prefix-averaged iterate is
    evaluated and the best checkpoint so far is tracked, starting from
    the zero vector, so the returned model never scores worse than zero
    weights.  With ``collect_history`` the tracked objective by epoch
    (a non-increasing sequence) is returned as a second value.
    """
    x = np.asarray(samples, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("samples must be (n, d) with one label per row")
    if not (np.all(np.isin(y, (-1.0, 1.0)))):
        raise ValueError("labels must be +1 or -1")
    if len(np.unique(y)) < 2:
        raise ValueError("training data must contain both classes")

    mean = x.mean(axis=0)
    std = np.maximum(x.std(axis=0), STD_FLOOR)
    z = np.hstack([(x - mean) / std, np.ones((len(x), 1))])
    n, d = z.shape

    rng = np.random.default_rng(seed)
    w = np.zeros(d)
    w_sum = np.zeros(d)       # running sum of all iterates
    radius = 1.0 / np.sqrt(reg)
    history: list[float] = []
    best = np.zeros(d)
    best_obj = hinge_objective(best[:-1], best[-1], z[:, :-1], y, reg)
    t = 0
    step_shift = n  # damps the first steps; plain 1/(reg*t) starts wild
    for _ in range(epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = 1.0 / (reg * (t + step_shift))
            margin = y[i] * (z[i] @ w)
            w *= (1.0 - eta * reg)
            if margin < 1.0:
                w += eta * y[i] * z[i]
            # projection keeps the early large steps bounded
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
            w_sum += w
        avg = w_sum / t
        obj = hinge_objective(avg[:-1], avg[-1], z[:, :-1], y, reg)
        if obj < best_obj:
            best_obj = obj
            best = avg.copy()
        history.append(best_obj)

    model = SvmModel(weights=best[:-1], bias=float(best[-1]), mean=mean,
                     std=std, extractor_id="custom", seed=seed, reg=reg,
                     epochs=epochs)
    if collect_history:
        return model, history
    return model


def svm_predict(model: SvmModel, features: np.ndarray) -> int:
    """ACCEPT (+1) or REJECT (-1); an exact-zero decision value accepts."""
    return ACCEPT if model.decision_value(features) >= 0.0 else REJECT
