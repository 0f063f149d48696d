"""Typed scene model: a scene is an ordered list of per-style objects.

Five serialization styles share one object type; which optional fields are
populated is what fixes an object's style. Objects and scenes are immutable
value types, safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .errors import SchemaError, ShapeCodeLengthError, StyleMixError

SHAPE_CODE_COUNT = 512
SHAPE_CODEBOOK_SIZE = 8192

Vec3 = tuple[float, float, float]


class DatasetStyle(str, Enum):
    CLEVR = "clevr"
    OBJAWORLD = "objaworld"
    OBJAWORLD_SHAPES = "objaworld_shapes"
    OBJECTRON = "objectron"
    ARKITSCENES = "arkitscenes"


# Objectron and ARKitScenes serialize identically; the "form" is what an
# object's fields can actually pin down.
_CATEGORY_STYLES = (DatasetStyle.OBJECTRON, DatasetStyle.ARKITSCENES)


def _as_vec3(value, name: str) -> Vec3:
    try:
        items = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise SchemaError(f"{name} must be a 3-vector of numbers, got {value!r}")
    if len(items) != 3:
        raise SchemaError(f"{name} must have exactly 3 components, got {len(items)}")
    return items


@dataclass(frozen=True)
class SceneObject:
    size: str | None = None
    color: str | None = None
    material: str | None = None
    shape: str | None = None
    shape_codes: tuple[int, ...] | None = None
    category: str | None = None
    location: Vec3 | None = None
    pose: Vec3 | None = None
    center_cam: Vec3 | None = None
    dimensions: Vec3 | None = None

    def __post_init__(self):
        for name in ("location", "pose", "center_cam", "dimensions"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _as_vec3(value, name))
        if self.shape_codes is not None:
            codes = tuple(int(c) for c in self.shape_codes)
            if len(codes) != SHAPE_CODE_COUNT:
                raise ShapeCodeLengthError(
                    f"shape_codes must have {SHAPE_CODE_COUNT} entries, got {len(codes)}"
                )
            for c in codes:
                if not 0 <= c < SHAPE_CODEBOOK_SIZE:
                    raise SchemaError(f"shape code {c} outside [0, {SHAPE_CODEBOOK_SIZE})")
            object.__setattr__(self, "shape_codes", codes)
        self._check_style_fields()

    def _check_style_fields(self):
        idents = [n for n in ("shape", "shape_codes", "category") if getattr(self, n) is not None]
        if len(idents) != 1:
            raise SchemaError(
                f"exactly one of shape/shape_codes/category required, got {idents or 'none'}"
            )
        present = {
            n
            for n in (
                "size", "color", "material", "shape", "shape_codes",
                "category", "location", "pose", "center_cam", "dimensions",
            )
            if getattr(self, n) is not None
        }
        if self.category is not None:
            allowed = {"category", "center_cam", "dimensions"}
        elif self.shape_codes is not None:
            allowed = {"shape_codes", "location", "pose"}
        elif self.pose is not None:
            allowed = {"shape", "location", "pose"}
        else:
            allowed = {"size", "color", "material", "shape", "location"}
        if present != allowed:
            raise SchemaError(
                f"fields {sorted(present)} do not form a valid style "
                f"(expected {sorted(allowed)})"
            )

    def form(self) -> DatasetStyle:
        """Most specific style derivable from the fields alone.

        Category-form objects report OBJECTRON; whether a scene is Objectron
        or ARKitScenes is a scene-level fact, not recoverable per object.
        """
        if self.category is not None:
            return DatasetStyle.OBJECTRON
        if self.shape_codes is not None:
            return DatasetStyle.OBJAWORLD_SHAPES
        if self.pose is not None:
            return DatasetStyle.OBJAWORLD
        return DatasetStyle.CLEVR


def _forms_of(style: DatasetStyle) -> tuple[DatasetStyle, ...]:
    if style in _CATEGORY_STYLES:
        return (DatasetStyle.OBJECTRON,)
    return (style,)


@dataclass(frozen=True)
class Scene:
    objects: tuple[SceneObject, ...]
    dataset_style: DatasetStyle

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "dataset_style", DatasetStyle(self.dataset_style))
        forms = {obj.form() for obj in self.objects}
        if len(forms) > 1:
            raise StyleMixError(f"objects of mixed styles in one scene: {sorted(forms)}")
        if forms and forms != set(_forms_of(self.dataset_style)):
            raise StyleMixError(
                f"objects have style {forms.pop().value}, scene says {self.dataset_style.value}"
            )

    def __len__(self) -> int:
        return len(self.objects)


class AnswerType(str, Enum):
    BOOL = "bool"
    NUMBER = "number"
    SHAPE = "shape"
    COLOR = "color"
    MATERIAL = "material"
    SIZE = "size"


@dataclass(frozen=True)
class QAItem:
    question: str
    answer: str
    answer_type: AnswerType

    def __post_init__(self):
        object.__setattr__(self, "answer_type", AnswerType(self.answer_type))
        if not 1 <= len(self.answer.split()) <= 2:
            raise SchemaError(f"answer must be 1-2 words, got {self.answer!r}")


_OBJECT_KEYS = (
    "size", "color", "material", "shape", "shape_codes",
    "category", "location", "pose", "center_cam", "dimensions",
)
_VECTOR_KEYS = ("location", "pose", "center_cam", "dimensions")


def _object_from_dict(entry: dict, index: int) -> SceneObject:
    if not isinstance(entry, dict):
        raise SchemaError(f"object {index} is not a JSON object")
    unknown = set(entry) - set(_OBJECT_KEYS)
    if unknown:
        raise SchemaError(f"object {index} has unknown keys {sorted(unknown)}")
    return SceneObject(**entry)


def scene_from_json(doc) -> Scene:
    """Parse a scene document (JSON text or an already-parsed dict).

    ``dataset_style`` is taken from the document when present, otherwise
    inferred from the fields of the objects (category-form documents default
    to Objectron). Objects keep their document order.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("scene document must be a JSON object")
    unknown = set(doc) - {"dataset_style", "objects"}
    if unknown:
        raise SchemaError(f"unknown top-level keys {sorted(unknown)}")
    raw_objects = doc.get("objects")
    if not isinstance(raw_objects, list):
        raise SchemaError("scene document needs an 'objects' array")
    objects = tuple(_object_from_dict(entry, i) for i, entry in enumerate(raw_objects))

    style_name = doc.get("dataset_style")
    if style_name is not None:
        try:
            style = DatasetStyle(style_name)
        except ValueError:
            raise SchemaError(f"unknown dataset_style {style_name!r}")
    elif objects:
        style = objects[0].form()
    else:
        style = DatasetStyle.CLEVR
    return Scene(objects, style)


def _object_to_dict(obj: SceneObject) -> dict:
    out = {}
    for key in _OBJECT_KEYS:
        value = getattr(obj, key)
        if value is None:
            continue
        out[key] = list(value) if key in _VECTOR_KEYS or key == "shape_codes" else value
    return out


def scene_to_json(scene: Scene) -> str:
    """Serialize a scene to its JSON document; inverse of scene_from_json."""
    doc = {
        "dataset_style": scene.dataset_style.value,
        "objects": [_object_to_dict(obj) for obj in scene.objects],
    }
    return json.dumps(doc, separators=(",", ":"))
