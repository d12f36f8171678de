"""
Latency Model - SpecDec Lab

Decode-step cost a * layers + b(width), fitted by least squares on measured
depth series. Above the saturation width the per-layer cost grows with
per-layer FLOPs; below it the slope is width-independent.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Any, Sequence, Tuple, Union

import numpy as np

from src.errors import InsufficientSamplesError, ValidationError, EmptyInputError
from src.model_core import ModelConfig

logger = logging.getLogger(__name__)

MIN_DEPTHS = 3


@dataclass
class LatencySample:
    config: ModelConfig
    seconds: float


def layer_flops(model_dim: int, ffn_dim: int) -> int:
    """Multiply-accumulates per token per layer: attention projections plus FFN."""
    return 4 * model_dim * model_dim + 2 * model_dim * ffn_dim


@dataclass
class LatencyModel:
    slope: float
    intercept: float
    width_intercepts: Dict[int, float] = field(default_factory=dict)
    saturation_width: Optional[int] = None
    saturation_ffn_dim: Optional[int] = None
    r_squared: float = 1.0
    residuals: List[float] = field(default_factory=list)

    def intercept_for(self, model_dim: int) -> float:
        if model_dim in self.width_intercepts:
            return self.width_intercepts[model_dim]
        if not self.width_intercepts:
            return self.intercept
        widths = sorted(self.width_intercepts)
        return float(np.interp(model_dim, widths, [self.width_intercepts[w] for w in widths]))

    def slope_for(self, model_dim: int, ffn_dim: Optional[int] = None) -> float:
        if self.saturation_width is None:
            return self.slope
        ffn_dim = ffn_dim if ffn_dim is not None else 4 * model_dim
        sat_ffn = self.saturation_ffn_dim or 4 * self.saturation_width
        scale = layer_flops(model_dim, ffn_dim) / layer_flops(self.saturation_width, sat_ffn)
        return self.slope * max(1.0, scale)

    def step_latency(self, num_layers: int, model_dim: int, ffn_dim: Optional[int] = None) -> float:
        return self.slope_for(model_dim, ffn_dim) * num_layers + self.intercept_for(model_dim)

    def predict(self, config: ModelConfig) -> float:
        """Predicted decode-step seconds for a config."""
        return self.step_latency(config.num_layers, config.model_dim, config.ffn_dim)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "width_intercepts": {str(k): v for k, v in self.width_intercepts.items()},
            "saturation_width": self.saturation_width,
            "saturation_ffn_dim": self.saturation_ffn_dim,
            "r_squared": self.r_squared,
            "residuals": self.residuals
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LatencyModel":
        return cls(
            slope=float(data["slope"]),
            intercept=float(data["intercept"]),
            width_intercepts={int(k): float(v) for k, v in data.get("width_intercepts", {}).items()},
            saturation_width=data.get("saturation_width"),
            saturation_ffn_dim=data.get("saturation_ffn_dim"),
            r_squared=float(data.get("r_squared", 1.0)),
            residuals=list(data.get("residuals", []))
        )


SampleLike = Union[LatencySample, Tuple[ModelConfig, float]]


def fit_latency_model(samples: Sequence[SampleLike], saturation_width: Optional[int] = None) -> LatencyModel:
    """
    Least-squares fit of seconds = a * layers + b_width, with one shared slope
    and one intercept per distinct model_dim. At least one width must carry
    three distinct depths.
    """
    pairs = [(s.config, float(s.seconds)) if isinstance(s, LatencySample) else (s[0], float(s[1]))
             for s in samples]
    if not pairs:
        raise EmptyInputError("fit_latency_model needs samples")

    depths_by_width: Dict[int, set] = defaultdict(set)
    for config, _ in pairs:
        depths_by_width[config.model_dim].add(config.num_layers)
    best_width = max(depths_by_width, key=lambda w: (len(depths_by_width[w]), -w))
    distinct = len(depths_by_width[best_width])
    if distinct == 1 and len(pairs) >= MIN_DEPTHS:
        raise ValidationError("Degenerate latency samples: every sample has the same depth")
    if distinct < MIN_DEPTHS:
        raise InsufficientSamplesError(
            f"Need at least {MIN_DEPTHS} distinct depths at one width, got {distinct}"
        )

    widths = sorted(depths_by_width)
    column = {w: i + 1 for i, w in enumerate(widths)}
    design = np.zeros((len(pairs), len(widths) + 1))
    observed = np.zeros(len(pairs))
    for row, (config, seconds) in enumerate(pairs):
        design[row, 0] = config.num_layers
        design[row, column[config.model_dim]] = 1.0
        observed[row] = seconds

    coef, _, _, _ = np.linalg.lstsq(design, observed, rcond=None)
    fitted = design @ coef
    residuals = observed - fitted
    total = float(((observed - observed.mean()) ** 2).sum())
    r_squared = 1.0 - float((residuals ** 2).sum()) / total if total > 0 else 1.0

    width_intercepts = {w: float(coef[column[w]]) for w in widths}
    if saturation_width is None:
        saturation_width = widths[-1]
    sat_ffn = max((c.ffn_dim for c, _ in pairs if c.model_dim == saturation_width), default=None)

    model = LatencyModel(
        slope=float(coef[0]),
        intercept=width_intercepts[best_width],
        width_intercepts=width_intercepts,
        saturation_width=saturation_width,
        saturation_ffn_dim=sat_ffn,
        r_squared=r_squared,
        residuals=residuals.tolist()
    )
    if model.slope <= 0:
        logger.warning(f"Fitted non-positive depth slope {model.slope:.3e} s/layer")
    logger.info(f"Fitted latency model: {model.slope * 1e3:.4f} ms/layer, "
                f"intercept {model.intercept * 1e3:.4f} ms, R^2 {r_squared:.4f}")
    return model
