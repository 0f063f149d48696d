"""Seeded synthetic scene generation plus instruction-producing edit operators.

Positions are sampled directly on the quantizer grid so generated ground
truth and its serialization agree bit-for-bit. Object heights follow size
(large 0.70, small 0.35) in the CLEVR-like style.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum

from .errors import (
    AmbiguousReferenceError,
    PlacementInfeasibleError,
    TargetNotFoundError,
)
from .quantize import QuantizerConfig
from .scene import DatasetStyle, Scene, SceneObject

CLEVR_SIZES = ("small", "large")
CLEVR_COLORS = ("gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow")
CLEVR_MATERIALS = ("rubber", "metal")
CLEVR_SHAPES = ("cube", "sphere", "cylinder")
CLEVR_HEIGHTS = {"large": 0.70, "small": 0.35}
OBJAWORLD_ASSETS = ("person", "bench", "lamppost", "bird", "sofa", "table")

_ATTR_ORDER = ("size", "color", "material", "shape")


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    style: DatasetStyle = DatasetStyle.CLEVR
    n_objects_range: tuple[int, int] = (3, 10)
    position_range: tuple[float, float] = (-3.0, 3.0)
    min_separation: float = 0.4
    sizes: tuple[str, ...] = CLEVR_SIZES
    colors: tuple[str, ...] = CLEVR_COLORS
    materials: tuple[str, ...] = CLEVR_MATERIALS
    shapes: tuple[str, ...] = field(default=CLEVR_SHAPES)
    z_range: tuple[float, float] = (0.0, 1.2)       # ObjaWorld style only
    pose_range: tuple[float, float] = (-3.10, 3.10)  # azimuth, ObjaWorld only
    max_attempts: int = 200

    def __post_init__(self):
        lo, hi = self.n_objects_range
        if lo > hi or lo < 0:
            raise ValueError("n_objects_range must be ordered and non-negative")
        if self.min_separation < 0:
            raise ValueError("min_separation must be >= 0")
        for name in ("sizes", "colors", "materials", "shapes"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if self.style is DatasetStyle.OBJAWORLD:
            object.__setattr__(self, "shapes",
                               self.shapes if self.shapes != CLEVR_SHAPES else OBJAWORLD_ASSETS)


def _grid_value(rng: random.Random, lo: float, hi: float, cfg: QuantizerConfig) -> float:
    g = cfg.granularity
    k_lo = math.ceil(Decimal(repr(lo)) / g)
    k_hi = math.floor(Decimal(repr(hi)) / g)
    return float(rng.randint(k_lo, k_hi) * g)


def _place_xy(rng, cfg, qcfg, placed) -> tuple[float, float]:
    lo, hi = cfg.position_range
    for _ in range(cfg.max_attempts):
        x = _grid_value(rng, lo, hi, qcfg)
        y = _grid_value(rng, lo, hi, qcfg)
        if all(math.hypot(x - px, y - py) >= cfg.min_separation for px, py in placed):
            return x, y
    raise PlacementInfeasibleError(
        f"could not place object {len(placed) + 1} after {cfg.max_attempts} attempts"
    )


def _one_scene(rng: random.Random, cfg: GenConfig, qcfg: QuantizerConfig) -> Scene:
    count = rng.randint(*cfg.n_objects_range)
    placed: list[tuple[float, float]] = []
    objects = []
    for _ in range(count):
        x, y = _place_xy(rng, cfg, qcfg, placed)
        placed.append((x, y))
        if cfg.style is DatasetStyle.CLEVR:
            size = rng.choice(cfg.sizes)
            objects.append(SceneObject(
                size=size,
                color=rng.choice(cfg.colors),
                material=rng.choice(cfg.materials),
                shape=rng.choice(cfg.shapes),
                location=(x, y, CLEVR_HEIGHTS.get(size, 0.35)),
            ))
        else:
            objects.append(SceneObject(
                shape=rng.choice(cfg.shapes),
                location=(x, y, _grid_value(rng, *cfg.z_range, qcfg)),
                pose=(0.0, 0.0, _grid_value(rng, *cfg.pose_range, qcfg)),
            ))
    return Scene(tuple(objects), cfg.style)


def generate_scenes(cfg: GenConfig, n: int, qcfg: QuantizerConfig | None = None) -> list[Scene]:
    """Draw ``n`` scenes from one seeded stream; same config, same scenes."""
    if cfg.style not in (DatasetStyle.CLEVR, DatasetStyle.OBJAWORLD):
        raise ValueError(f"generator supports clevr/objaworld, not {cfg.style.value}")
    qcfg = qcfg or QuantizerConfig.clevr()
    rng = random.Random(cfg.seed)
    return [_one_scene(rng, cfg, qcfg) for _ in range(n)]


def generate_scene(cfg: GenConfig, qcfg: QuantizerConfig | None = None) -> Scene:
    return generate_scenes(cfg, 1, qcfg)[0]


# ---- edit operators ----------------------------------------------------------


class EditOp(Enum):
    CHANGE_ATTR = "change_attr"
    ADD = "add"
    REMOVE = "remove"
    MOVE = "move"


@dataclass(frozen=True)
class EditParams:
    """Inputs for one edit; which fields matter depends on the operator.

    ``reference`` selects the target object by attribute values and must
    match exactly one object for CHANGE_ATTR/REMOVE/MOVE.
    """

    reference: dict | None = None
    attr: str | None = None
    value: str | None = None
    new_object: SceneObject | None = None
    delta: tuple[float, float] | None = None
    min_separation: float = 0.0


def _find_unique(scene: Scene, reference: dict) -> int:
    if not reference:
        raise TargetNotFoundError("empty reference")
    matches = [
        i for i, obj in enumerate(scene.objects)
        if all(getattr(obj, k, None) == value for k, value in reference.items())
    ]
    if not matches:
        raise TargetNotFoundError(f"no object matches {reference}")
    if len(matches) > 1:
        raise AmbiguousReferenceError(f"{len(matches)} objects match {reference}")
    return matches[0]


def _ref_phrase(reference: dict) -> str:
    ordered = [reference[k] for k in _ATTR_ORDER if k in reference]
    ordered += [value for k, value in reference.items() if k not in _ATTR_ORDER]
    return " ".join(str(w) for w in ordered)


def _describe(obj: SceneObject) -> str:
    words = [getattr(obj, k) for k in _ATTR_ORDER if getattr(obj, k) is not None]
    return " ".join(words)


def _with_attr(obj: SceneObject, attr: str, value: str) -> SceneObject:
    fields = {k: getattr(obj, k) for k in
              ("size", "color", "material", "shape", "shape_codes",
               "category", "location", "pose", "center_cam", "dimensions")}
    fields[attr] = value
    if attr == "size" and obj.location is not None and value in CLEVR_HEIGHTS:
        x, y, _ = obj.location
        fields["location"] = (x, y, CLEVR_HEIGHTS[value])
    return SceneObject(**fields)


def edit_scene(scene: Scene, op: EditOp, params: EditParams) -> tuple[Scene, str]:
    """Apply one edit and return (edited scene, templated instruction text)."""
    op = EditOp(op)
    objects = list(scene.objects)

    if op is EditOp.CHANGE_ATTR:
        if params.attr is None or params.value is None:
            raise ValueError("CHANGE_ATTR needs attr and value")
        idx = _find_unique(scene, params.reference or {})
        objects[idx] = _with_attr(objects[idx], params.attr, params.value)
        text = (f"Change the {_ref_phrase(params.reference)} object "
                f"to have {params.value} {params.attr}")
        return Scene(tuple(objects), scene.dataset_style), text

    if op is EditOp.ADD:
        if params.new_object is None:
            raise ValueError("ADD needs new_object")
        new = params.new_object
        if new.location is not None and params.min_separation > 0:
            nx, ny = new.location[0], new.location[1]
            for obj in objects:
                if obj.location is None:
                    continue
                if math.hypot(nx - obj.location[0], ny - obj.location[1]) < params.min_separation:
                    raise PlacementInfeasibleError("new object too close to an existing one")
        objects.append(new)
        return Scene(tuple(objects), scene.dataset_style), f"Put a {_describe(new)}"

    if op is EditOp.REMOVE:
        idx = _find_unique(scene, params.reference or {})
        del objects[idx]
        text = f"Remove the {_ref_phrase(params.reference)} object"
        return Scene(tuple(objects), scene.dataset_style), text

    if op is EditOp.MOVE:
        if params.delta is None:
            raise ValueError("MOVE needs delta")
        idx = _find_unique(scene, params.reference or {})
        dx, dy = params.delta
        x, y, z = objects[idx].location
        objects[idx] = _with_attr(objects[idx], "location", (x + dx, y + dy, z))
        directions = []
        if dx:
            directions.append("left" if dx < 0 else "right")
        if dy:
            directions.append("behind" if dy > 0 else "front")
        where = " and ".join(directions) if directions else "nowhere"
        text = f"Move the {_ref_phrase(params.reference)} object to {where}"
        return Scene(tuple(objects), scene.dataset_style), text

    raise ValueError(f"unknown edit op {op!r}")
