import random

import pytest

from scenetok import (
    DatasetStyle,
    ModalityOrder,
    Role,
    Scene,
    SequenceBuilder,
    SequenceOptions,
    decompose,
    loss_weights,
    serialize_scene,
)
from scenetok import reorder
from scenetok.errors import EmptyInputError, ImageLengthError
from scenetok import vocab as v

from conftest import make_clevr_scene

QUESTION = "What size is the rubber sphere?"
ANSWER = "small"
INSTRUCTION = "Change the gray object to have purple color"


@pytest.fixture(scope="module")
def images():
    rng = random.Random(5)
    return [rng.randrange(1024) for _ in range(256)]


@pytest.fixture(scope="module")
def out_images():
    rng = random.Random(6)
    return [rng.randrange(1024) for _ in range(256)]


@pytest.fixture()
def builder(clevr_vocab, clevr_cfg):
    return SequenceBuilder(clevr_vocab, clevr_cfg)


def test_rendering_length_and_roles(builder, clevr_vocab, clevr_cfg, images):
    scene = make_clevr_scene(7, seed=1)
    seq = builder.rendering(scene, images)
    seq.validate(clevr_vocab)
    # scene block 13*7+2, plus BOS + SEP + (256+2 image block) + EOS
    assert len(seq) == 93 + 1 + 1 + 258 + 1 == 354
    sep = clevr_vocab.lookup(v.OUTPUT_SEP)
    cut = seq.ids.index(sep)
    assert all(r is Role.CONTEXT for r in seq.roles[:cut + 1])
    assert all(r is Role.TARGET for r in seq.roles[cut + 1:])
    # target spans exactly the image block
    assert seq.ids[cut + 1] == clevr_vocab.lookup(v.IMAGE_START)
    assert seq.ids[-2] == clevr_vocab.lookup(v.IMAGE_END)


def test_recognition_target_is_scene(builder, clevr_vocab, clevr_cfg, images):
    scene = make_clevr_scene(3, seed=2)
    seq = builder.recognition(images, scene)
    seq.validate(clevr_vocab)
    sep = clevr_vocab.lookup(v.OUTPUT_SEP)
    cut = seq.ids.index(sep)
    scene_ids = [clevr_vocab.lookup(t) for t in serialize_scene(scene, clevr_cfg)]
    assert list(seq.ids[cut + 1:-1]) == scene_ids
    assert seq.ids[1] == clevr_vocab.lookup(v.IMAGE_START)


def test_recognition_empty_scene_target(builder, clevr_vocab, images):
    seq = builder.recognition(images, Scene((), DatasetStyle.CLEVR))
    sep = clevr_vocab.lookup(v.OUTPUT_SEP)
    cut = seq.ids.index(sep)
    assert len(seq.ids[cut + 1:-1]) == 2


def test_image_length_enforced(builder, images):
    with pytest.raises(ImageLengthError):
        builder.rendering(make_clevr_scene(2), images[:100])


def test_center_reorder_composition(clevr_vocab, clevr_cfg, images):
    scene = make_clevr_scene(2, seed=3)
    plain = SequenceBuilder(clevr_vocab, clevr_cfg).rendering(scene, images)
    rebuilt = SequenceBuilder(
        clevr_vocab, clevr_cfg, SequenceOptions(center_reorder=True)
    ).rendering(scene, images)
    plan = reorder.center_plan(256)
    sep = clevr_vocab.lookup(v.OUTPUT_SEP)
    cut = plain.ids.index(sep)
    payload_plain = list(plain.ids[cut + 2:cut + 2 + 256])
    payload_reordered = list(rebuilt.ids[cut + 2:cut + 2 + 256])
    assert payload_reordered == reorder.apply(plan, payload_plain)


def test_instruction_orders(builder, clevr_vocab, images, out_images):
    scene = make_clevr_scene(3, seed=4)
    out_scene = make_clevr_scene(3, seed=5)
    a = builder.instruction(images, scene, INSTRUCTION, out_images, out_scene,
                            ModalityOrder.IMAGE_FIRST)
    b = builder.instruction(images, scene, INSTRUCTION, out_images, out_scene,
                            ModalityOrder.SCENE_FIRST)
    a.validate(clevr_vocab)
    b.validate(clevr_vocab)
    assert a.ids[1] == clevr_vocab.lookup(v.IMAGE_START)
    assert b.ids[1] == clevr_vocab.lookup(v.SCENE_START)
    assert sorted(a.ids) == sorted(b.ids)  # same multiset, different block order
    with pytest.raises(EmptyInputError):
        builder.instruction(images, scene, "   ", out_images, out_scene)


def test_qa_target_and_scene_flag(builder, clevr_vocab, images):
    scene = make_clevr_scene(4, seed=6)
    seq = builder.qa(images, scene, QUESTION, ANSWER)
    seq.validate(clevr_vocab)
    sep = clevr_vocab.lookup(v.OUTPUT_SEP)
    cut = seq.ids.index(sep)
    target = list(seq.ids[cut + 1:-1])
    assert target[0] == clevr_vocab.lookup(v.TEXT_START)
    assert target[-1] == clevr_vocab.lookup(v.TEXT_END)
    assert len(target) == len(ANSWER.split()) + 2
    no_scene = builder.qa(images, scene, QUESTION, ANSWER, include_scene=False)
    assert clevr_vocab.lookup(v.SCENE_START) not in no_scene.ids
    assert clevr_vocab.lookup(v.SCENE_START) in seq.ids
    # scene is optional entirely when excluded
    assert builder.qa(images, None, QUESTION, ANSWER, include_scene=False) == no_scene
    with pytest.raises(ValueError):
        builder.qa(images, scene, QUESTION, "one two three")
    with pytest.raises(ValueError):
        builder.qa(images, None, QUESTION, ANSWER, include_scene=True)


def test_loss_weights_image_head(builder, clevr_vocab, images):
    seq = loss_weights(builder.rendering(make_clevr_scene(2), images), clevr_vocab)
    sep = clevr_vocab.lookup(v.OUTPUT_SEP)
    cut = seq.ids.index(sep)
    # first five payload tokens (after [IMAGE-START]) carry the head weight
    payload = seq.weights[cut + 2:cut + 2 + 256]
    assert payload[:5] == (10.0,) * 5
    assert set(payload[5:]) == {1.0}
    assert seq.weights[cut + 1] == 1.0  # [IMAGE-START] itself is not payload
    assert sum(1 for w in seq.weights if w == 10.0) == 5
    assert all(w == 0.0 for w, r in zip(seq.weights, seq.roles) if r is Role.CONTEXT)


def test_loss_weights_zero_head(builder, clevr_vocab, images):
    seq = loss_weights(builder.rendering(make_clevr_scene(2), images), clevr_vocab, head_len=0)
    assert set(w for w, r in zip(seq.weights, seq.roles) if r is Role.TARGET) == {1.0}


def test_loss_weights_no_image_target(builder, clevr_vocab, images):
    seq = loss_weights(builder.recognition(images, make_clevr_scene(2)), clevr_vocab)
    assert 10.0 not in seq.weights


def test_context_weight_option(clevr_vocab, clevr_cfg, images):
    b = SequenceBuilder(clevr_vocab, clevr_cfg, SequenceOptions(context_weight=0.5))
    seq = b.rendering(make_clevr_scene(1), images)
    assert set(w for w, r in zip(seq.weights, seq.roles) if r is Role.CONTEXT) == {0.5}


def test_single_output_sep_everywhere(builder, clevr_vocab, images, out_images):
    scene = make_clevr_scene(2, seed=7)
    sep = clevr_vocab.lookup(v.OUTPUT_SEP)
    for seq in (
        builder.rendering(scene, images),
        builder.recognition(images, scene),
        builder.instruction(images, scene, INSTRUCTION, out_images, scene),
        builder.qa(images, scene, QUESTION, ANSWER),
    ):
        assert seq.ids.count(sep) == 1
        seq.validate(clevr_vocab)


def test_decompose_recovers_payloads(builder, clevr_vocab, clevr_cfg, images, out_images):
    scene = make_clevr_scene(3, seed=8)
    out_scene = make_clevr_scene(2, seed=9)
    seq = builder.instruction(images, scene, INSTRUCTION, out_images, out_scene)
    parts = decompose(seq, clevr_vocab, clevr_cfg)
    assert parts.context_scene == scene
    assert parts.target_scene == out_scene
    assert parts.context_image == tuple(images)
    assert parts.target_image == tuple(out_images)
    assert parts.context_text == INSTRUCTION.replace("?", " ?")


def test_decompose_inverts_reordering(clevr_vocab, clevr_cfg, images):
    b = SequenceBuilder(clevr_vocab, clevr_cfg, SequenceOptions(center_reorder=True))
    seq = b.rendering(make_clevr_scene(2), images)
    parts = decompose(seq, clevr_vocab, clevr_cfg, center_reorder=True)
    assert parts.target_image == tuple(images)


def test_generated_edit_pairs_roundtrip(builder, clevr_vocab, clevr_cfg, images, out_images):
    from scenetok import EditOp, EditParams, GenConfig, edit_scene, generate_scene

    scene = generate_scene(GenConfig(seed=31, n_objects_range=(3, 3)), clevr_cfg)
    target = scene.objects[0]
    reference = {"size": target.size, "color": target.color,
                 "material": target.material, "shape": target.shape}
    edited, text = edit_scene(scene, EditOp.MOVE, EditParams(reference=reference,
                                                             delta=(0.5, -0.5)))
    seq = builder.instruction(images, scene, text, out_images, edited)
    parts = decompose(seq, clevr_vocab, clevr_cfg)
    assert parts.context_scene == scene
    assert parts.target_scene == edited
    assert parts.context_text == text
