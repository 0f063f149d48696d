"""Full task-sequence assembly: context/target framing, blocks, loss weights.

Every built sequence is [BOS] context [OUTPUT-SEP] target [EOS] with exactly
one separator; positions after the separator (including [EOS]) are supervised
targets, everything up to and including the separator is context.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from . import reorder
from . import vocab as v
from .errors import EmptyInputError, ImageLengthError
from .quantize import QuantizerConfig
from .scene import Scene
from .serialize import ParseMode, parse_scene, serialize_scene
from .vocab import ImageCode, ShapeCode, Vocabulary


class Role(Enum):
    CONTEXT = "context"
    TARGET = "target"


class ModalityOrder(Enum):
    IMAGE_FIRST = "image-first"
    SCENE_FIRST = "scene-first"


@dataclass(frozen=True)
class TaskSequence:
    ids: tuple[int, ...]
    roles: tuple[Role, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not len(self.ids) == len(self.roles) == len(self.weights):
            raise ValueError("ids/roles/weights must be parallel")

    def __len__(self) -> int:
        return len(self.ids)

    def validate(self, vocab: Vocabulary) -> None:
        """Assert the structural invariants; raises ValueError on violation."""
        bos, eos, sep = vocab.lookup(v.BOS), vocab.lookup(v.EOS), vocab.lookup(v.OUTPUT_SEP)
        if not self.ids or self.ids[0] != bos or self.ids[-1] != eos:
            raise ValueError("sequence must be framed by [BOS]...[EOS]")
        sep_positions = [i for i, t in enumerate(self.ids) if t == sep]
        if len(sep_positions) != 1:
            raise ValueError(f"expected exactly one [OUTPUT-SEP], found {len(sep_positions)}")
        cut = sep_positions[0]
        for i, role in enumerate(self.roles):
            if (role is Role.TARGET) != (i > cut):
                raise ValueError(f"role at {i} inconsistent with [OUTPUT-SEP] at {cut}")
        for role, w in zip(self.roles, self.weights):
            if role is Role.TARGET and w <= 0:
                raise ValueError("target weights must be positive")


@dataclass(frozen=True)
class SequenceOptions:
    center_reorder: bool = False
    context_weight: float = 0.0
    image_length: int = 256


class SequenceBuilder:
    """Builds the four task sequences against one vocabulary and grid config."""

    def __init__(self, vocab: Vocabulary, cfg: QuantizerConfig,
                 opts: SequenceOptions = SequenceOptions()):
        self.vocab = vocab
        self.cfg = cfg
        self.opts = opts

    # ---- blocks ----------------------------------------------------------

    def _image_block(self, image_tokens) -> list[int]:
        codes = [int(c) for c in image_tokens]
        if len(codes) != self.opts.image_length:
            raise ImageLengthError(
                f"expected {self.opts.image_length} image tokens, got {len(codes)}"
            )
        if self.opts.center_reorder:
            codes = reorder.apply(reorder.center_plan(len(codes)), codes)
        ids = [self.vocab.lookup(v.IMAGE_START)]
        ids += [self.vocab.lookup(ImageCode(c)) for c in codes]
        ids.append(self.vocab.lookup(v.IMAGE_END))
        return ids

    def _scene_block(self, scene: Scene) -> list[int]:
        return [self.vocab.lookup(t) for t in serialize_scene(scene, self.cfg)]

    def _text_block(self, text: str) -> list[int]:
        return ([self.vocab.lookup(v.TEXT_START)]
                + self.vocab.encode_text(text)
                + [self.vocab.lookup(v.TEXT_END)])

    def _assemble(self, context: list[int], target: list[int]) -> TaskSequence:
        ids = ([self.vocab.lookup(v.BOS)] + context
               + [self.vocab.lookup(v.OUTPUT_SEP)] + target
               + [self.vocab.lookup(v.EOS)])
        n_context = len(context) + 2  # [BOS] ... [OUTPUT-SEP]
        n_target = len(target) + 1   # ... [EOS]
        roles = (Role.CONTEXT,) * n_context + (Role.TARGET,) * n_target
        weights = (self.opts.context_weight,) * n_context + (1.0,) * n_target
        return TaskSequence(tuple(ids), roles, weights)

    # ---- tasks -----------------------------------------------------------

    def rendering(self, scene: Scene, image_tokens) -> TaskSequence:
        """Scene context, image target."""
        return self._assemble(self._scene_block(scene), self._image_block(image_tokens))

    def recognition(self, image_tokens, scene: Scene) -> TaskSequence:
        """Image context, scene target."""
        return self._assemble(self._image_block(image_tokens), self._scene_block(scene))

    def instruction(self, image_tokens, scene: Scene, instruction: str,
                    out_image_tokens, out_scene: Scene,
                    order: ModalityOrder = ModalityOrder.IMAGE_FIRST) -> TaskSequence:
        """Image+scene+instruction context, edited image+scene target."""
        if not instruction.strip():
            raise EmptyInputError("instruction text must be non-empty")
        ctx_image = self._image_block(image_tokens)
        ctx_scene = self._scene_block(scene)
        out_image = self._image_block(out_image_tokens)
        out_scene_ids = self._scene_block(out_scene)
        if ModalityOrder(order) is ModalityOrder.IMAGE_FIRST:
            context = ctx_image + ctx_scene
            target = out_image + out_scene_ids
        else:
            context = ctx_scene + ctx_image
            target = out_scene_ids + out_image
        context += self._text_block(instruction)
        return self._assemble(context, target)

    def qa(self, image_tokens, scene: Scene | None, question: str, answer: str,
           include_scene: bool = True) -> TaskSequence:
        """Image [+ scene] + question context, answer target."""
        if not 1 <= len(answer.split()) <= 2:
            raise ValueError(f"answer must be 1-2 words, got {answer!r}")
        context = self._image_block(image_tokens)
        if include_scene:
            if scene is None:
                raise ValueError("include_scene=True requires a scene")
            context += self._scene_block(scene)
        context += self._text_block(question)
        return self._assemble(context, self._text_block(answer))


def loss_weights(seq: TaskSequence, vocab: Vocabulary,
                 image_head_weight: float = 10.0, head_len: int = 5) -> TaskSequence:
    """Reweight target positions: the first ``head_len`` image-payload tokens
    of the target get ``image_head_weight``, every other target stays 1.0,
    context weights are untouched."""
    if image_head_weight <= 0:
        raise ValueError("image_head_weight must be positive")
    if head_len < 0:
        raise ValueError("head_len must be >= 0")
    img_start = vocab.lookup(v.IMAGE_START)
    img_end = vocab.lookup(v.IMAGE_END)
    weights = list(seq.weights)
    inside_image = False
    payload_index = 0
    for i, (token_id, role) in enumerate(zip(seq.ids, seq.roles)):
        if role is not Role.TARGET:
            continue
        if token_id == img_start:
            inside_image = True
            payload_index = 0
            weights[i] = 1.0
            continue
        if token_id == img_end:
            inside_image = False
            weights[i] = 1.0
            continue
        if inside_image:
            weights[i] = image_head_weight if payload_index < head_len else 1.0
            payload_index += 1
        else:
            weights[i] = 1.0
    return replace(seq, weights=tuple(weights))


@dataclass(frozen=True)
class SequenceParts:
    """Payloads recovered from a built sequence, context and target sides."""

    context_image: tuple[int, ...] | None
    context_scene: Scene | None
    context_text: str | None
    target_image: tuple[int, ...] | None
    target_scene: Scene | None
    target_text: str | None


def _split_blocks(tokens: list, cfg: QuantizerConfig, center_reorder: bool):
    image = scene = text = None
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == v.IMAGE_START:
            j = tokens.index(v.IMAGE_END, i)
            codes = [int(c) for c in tokens[i + 1:j]]
            if center_reorder:
                codes = reorder.invert(reorder.center_plan(len(codes)), codes)
            image = tuple(codes)
            i = j + 1
        elif tok == v.SCENE_START:
            j = i
            while tokens[j] not in (v.SCENE_END, v.SCENE_CLOSE):
                j += 1
            block = [v.shape_code_token(t) if isinstance(t, ShapeCode) else t
                     for t in tokens[i:j + 1]]
            scene, _ = parse_scene(block, cfg, ParseMode.STRICT)
            i = j + 1
        elif tok == v.TEXT_START:
            j = tokens.index(v.TEXT_END, i)
            text = " ".join(str(t) for t in tokens[i + 1:j])
            i = j + 1
        else:
            raise ValueError(f"unexpected token {tok!r} between blocks")
    return image, scene, text


def decompose(seq: TaskSequence, vocab: Vocabulary, cfg: QuantizerConfig,
              center_reorder: bool = False) -> SequenceParts:
    """Strip framing and markers, recovering the payloads of a built sequence."""
    sep = vocab.lookup(v.OUTPUT_SEP)
    cut = seq.ids.index(sep)
    context_ids = seq.ids[1:cut]
    target_ids = seq.ids[cut + 1:-1]
    context_tokens = [vocab.id_to_token(i) for i in context_ids]
    target_tokens = [vocab.id_to_token(i) for i in target_ids]
    ctx = _split_blocks(context_tokens, cfg, center_reorder)
    tgt = _split_blocks(target_tokens, cfg, center_reorder)
    return SequenceParts(ctx[0], ctx[1], ctx[2], tgt[0], tgt[1], tgt[2])
