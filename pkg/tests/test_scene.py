import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from scenetok import DatasetStyle, QAItem, Scene, SceneObject, scene_from_json, scene_to_json
from scenetok.errors import SchemaError, ShapeCodeLengthError, StyleMixError

from conftest import (
    make_category_scene,
    make_clevr_scene,
    make_objaworld_scene,
    make_shapes_scene,
)

TWO_OBJECT_DOC = json.dumps({
    "dataset_style": "clevr",
    "objects": [
        {"size": "large", "color": "cyan", "material": "metal", "shape": "cube",
         "location": [-0.55, 0.05, 0.70]},
        {"size": "small", "color": "yellow", "material": "metal", "shape": "cylinder",
         "location": [1.25, 2.50, 0.35]},
    ],
})


def test_from_json_two_objects():
    scene = scene_from_json(TWO_OBJECT_DOC)
    assert scene.dataset_style is DatasetStyle.CLEVR
    assert len(scene) == 2
    assert scene.objects[0].shape == "cube"
    assert scene.objects[0].location == (-0.55, 0.05, 0.70)


def test_from_json_empty():
    scene = scene_from_json('{"dataset_style": "clevr", "objects": []}')
    assert len(scene) == 0


def test_from_json_mixed_styles_rejected():
    doc = {
        "objects": [
            {"shape": "person", "location": [0, 0, 0], "pose": [0, 0, 0]},
            {"category": "chair", "center_cam": [0, 0, 1], "dimensions": [1, 1, 1]},
        ]
    }
    with pytest.raises(StyleMixError):
        scene_from_json(json.dumps(doc))


def test_style_inferred_when_absent():
    doc = {"objects": [{"shape": "person", "location": [0, 0, 0], "pose": [0, 0, 0]}]}
    assert scene_from_json(doc).dataset_style is DatasetStyle.OBJAWORLD
    doc = {"objects": [{"category": "chair", "center_cam": [0, 0, 1], "dimensions": [1, 1, 1]}]}
    assert scene_from_json(doc).dataset_style is DatasetStyle.OBJECTRON


@pytest.mark.parametrize("doc", [
    '{"objects": [{"size": "large"}]}',                    # missing companions
    '{"objects": [{"shape": "cube", "category": "chair"}]}',  # two identities
    '{"objects": [{"shape": "cube", "location": [1, 2]}]}',   # short vector
    '{"objects": [{}]}',
    '{"objects": "nope"}',
    "not json at all",
])
def test_schema_violations(doc):
    with pytest.raises(SchemaError):
        scene_from_json(doc)


def test_shape_codes_length_enforced():
    with pytest.raises(ShapeCodeLengthError):
        SceneObject(shape_codes=(1, 2, 3), location=(0, 0, 0), pose=(0, 0, 0))
    with pytest.raises(SchemaError):
        SceneObject(shape_codes=tuple([9000] * 512), location=(0, 0, 0), pose=(0, 0, 0))


def test_declared_style_must_match_objects():
    obj = SceneObject(size="small", color="red", material="rubber", shape="cube",
                      location=(0, 0, 0.35))
    with pytest.raises(StyleMixError):
        Scene((obj,), DatasetStyle.OBJAWORLD)


def test_objectron_and_arkitscenes_share_object_form():
    for style in (DatasetStyle.OBJECTRON, DatasetStyle.ARKITSCENES):
        scene = make_category_scene(3, style)
        assert scene.dataset_style is style


@pytest.mark.parametrize("factory", [
    lambda: make_clevr_scene(4, seed=11),
    lambda: make_objaworld_scene(5, seed=12),
    lambda: make_shapes_scene(2, seed=13),
    lambda: make_category_scene(3, DatasetStyle.OBJECTRON, seed=14),
    lambda: make_category_scene(3, DatasetStyle.ARKITSCENES, seed=15),
    lambda: Scene((), DatasetStyle.CLEVR),
])
def test_json_roundtrip_identity(factory):
    scene = factory()
    assert scene_from_json(scene_to_json(scene)) == scene


@settings(max_examples=50, deadline=None)
@given(hst.integers(min_value=0, max_value=8), hst.integers(min_value=0, max_value=10_000))
def test_json_roundtrip_property(n, seed):
    scene = make_clevr_scene(n, seed=seed)
    assert scene_from_json(scene_to_json(scene)) == scene


def test_qa_item_answer_length():
    QAItem("How many things are there?", "3", "number")
    QAItem("q", "small cube", "shape")
    with pytest.raises(SchemaError):
        QAItem("q", "", "bool")
    with pytest.raises(SchemaError):
        QAItem("q", "a b c", "bool")
