"""Scene <-> flat token sequence conversion with strict and lenient parsing.

Per-object layouts (interior tokens between the object boundary tokens):

    CLEVR       [SIZE] w [COLOR] w [MATERIAL] w [SHAPE] w [LOCATION] n n n
    ObjaWorld   [SHAPE] w [LOCATION] n n n [POSE] n n n
    shape-coded [SHAPE] c*512 [LOCATION] n n n [POSE] n n n
    category    [CATEGORY] w [CENTER_CAM] n n n [DIMENSIONS] n n n

Object boundaries are fused separator tokens ([OBJECT-END][OBJECT-START]
between objects, [OBJECT-END][SCENE-END] at the close), so a CLEVR scene with
n objects is exactly 13n+2 tokens while its character stream is unchanged.
The parser accepts both the fused and the split boundary forms.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from enum import Enum

from . import vocab as v
from .errors import (
    EmptyInputError,
    GrammarError,
    ShapeCodeLengthError,
    UnknownTokenError,
)
from .quantize import QuantizerConfig, dequantize, quantize
from .scene import SHAPE_CODE_COUNT, SHAPE_CODEBOOK_SIZE, DatasetStyle, Scene, SceneObject

_FIELD_MARKERS = (v.SIZE, v.COLOR, v.MATERIAL, v.SHAPE, v.LOCATION, v.POSE,
                  v.CATEGORY, v.CENTER_CAM, v.DIMENSIONS)
_ALL_MARKERS = frozenset(v.SPECIAL_TOKENS)
_CODE_RE = re.compile(r"^<(\d+)>$")
_MARKER_RE = re.compile(r"^\[[A-Z][A-Z_-]*\]$")


@dataclass(frozen=True)
class TokenString:
    """Ordered token strings, every element resolvable by the vocabulary."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def text(self) -> str:
        """Human-readable rendering: markers concatenate, values space-separate."""
        parts = []
        prev = None
        for tok in self.tokens:
            if prev is not None and not prev.endswith("]") and not tok.startswith("["):
                parts.append(" ")
            parts.append(tok)
            prev = tok
        return "".join(parts)


@dataclass(frozen=True)
class ParseDiagnostic:
    position: int
    message: str


class ParseMode(Enum):
    STRICT = "strict"
    LENIENT = "lenient"


def _object_interior(obj: SceneObject, cfg: QuantizerConfig) -> list[str]:
    def nums(vec):
        return [quantize(c, cfg) for c in vec]

    if obj.category is not None:
        return [v.CATEGORY, obj.category,
                v.CENTER_CAM, *nums(obj.center_cam),
                v.DIMENSIONS, *nums(obj.dimensions)]
    if obj.shape_codes is not None:
        if len(obj.shape_codes) != SHAPE_CODE_COUNT:
            raise ShapeCodeLengthError(
                f"expected {SHAPE_CODE_COUNT} shape codes, got {len(obj.shape_codes)}"
            )
        return [v.SHAPE, *(v.shape_code_token(c) for c in obj.shape_codes),
                v.LOCATION, *nums(obj.location),
                v.POSE, *nums(obj.pose)]
    if obj.pose is not None:
        return [v.SHAPE, obj.shape,
                v.LOCATION, *nums(obj.location),
                v.POSE, *nums(obj.pose)]
    return [v.SIZE, obj.size, v.COLOR, obj.color, v.MATERIAL, obj.material,
            v.SHAPE, obj.shape, v.LOCATION, *nums(obj.location)]


def serialize_scene(scene: Scene, cfg: QuantizerConfig) -> TokenString:
    """Flatten a scene, quantizing every coordinate on the configured grid."""
    tokens = [v.SCENE_START]
    for i, obj in enumerate(scene.objects):
        tokens.append(v.OBJECT_START if i == 0 else v.OBJECT_SEP)
        tokens.extend(_object_interior(obj, cfg))
    tokens.append(v.SCENE_CLOSE if scene.objects else v.SCENE_END)
    return TokenString(tuple(tokens))


# ---- parsing ---------------------------------------------------------------


def _expand(tokens) -> list[tuple[str, int]]:
    """Split fused boundary tokens, remembering original positions."""
    items = []
    for i, tok in enumerate(tokens):
        if tok == v.OBJECT_SEP:
            items.append((v.OBJECT_END, i))
            items.append((v.OBJECT_START, i))
        elif tok == v.SCENE_CLOSE:
            items.append((v.OBJECT_END, i))
            items.append((v.SCENE_END, i))
        else:
            items.append((tok, i))
    return items


class _Cursor:
    __slots__ = ("items", "i", "end_pos")

    def __init__(self, items: list[tuple[str, int]], start: int, end_pos: int):
        self.items = items
        self.i = start
        self.end_pos = end_pos

    def exhausted(self) -> bool:
        return self.i >= len(self.items)

    def peek(self) -> str | None:
        return None if self.exhausted() else self.items[self.i][0]

    def pos(self) -> int:
        return self.end_pos if self.exhausted() else self.items[self.i][1]

    def take(self) -> str:
        if self.exhausted():
            raise GrammarError(self.end_pos, "unexpected end of sequence")
        tok = self.items[self.i][0]
        self.i += 1
        return tok


def _expect(cur: _Cursor, marker: str):
    pos = cur.pos()
    tok = cur.take()
    if tok != marker:
        raise GrammarError(pos, f"expected {marker}, found {tok!r}")


def _take_word(cur: _Cursor) -> str:
    pos = cur.pos()
    tok = cur.take()
    if tok in _ALL_MARKERS or _MARKER_RE.match(tok) or _CODE_RE.match(tok):
        raise GrammarError(pos, f"expected a word token, found {tok!r}")
    return tok


def _take_vec3(cur: _Cursor, cfg: QuantizerConfig) -> tuple[float, float, float]:
    out = []
    for _ in range(3):
        pos = cur.pos()
        tok = cur.take()
        try:
            out.append(dequantize(tok, cfg))
        except UnknownTokenError as exc:
            raise GrammarError(pos, str(exc)) from exc
    return tuple(out)


def _take_shape_codes(cur: _Cursor) -> tuple[int, ...]:
    codes = []
    while True:
        nxt = cur.peek()
        m = _CODE_RE.match(nxt) if isinstance(nxt, str) else None
        if not m:
            break
        code = int(m.group(1))
        if code >= SHAPE_CODEBOOK_SIZE:
            raise GrammarError(cur.pos(), f"shape code {code} out of range")
        codes.append(code)
        cur.take()
    if len(codes) != SHAPE_CODE_COUNT:
        raise GrammarError(cur.pos(), f"expected {SHAPE_CODE_COUNT} shape codes, got {len(codes)}")
    return tuple(codes)


def _parse_object_body(cur: _Cursor, cfg: QuantizerConfig) -> SceneObject:
    """Parse interior fields plus the closing [OBJECT-END]."""
    first = cur.peek()
    if first == v.SIZE:
        _expect(cur, v.SIZE)
        size = _take_word(cur)
        _expect(cur, v.COLOR)
        color = _take_word(cur)
        _expect(cur, v.MATERIAL)
        material = _take_word(cur)
        _expect(cur, v.SHAPE)
        shape = _take_word(cur)
        _expect(cur, v.LOCATION)
        location = _take_vec3(cur, cfg)
        _expect(cur, v.OBJECT_END)
        return SceneObject(size=size, color=color, material=material,
                           shape=shape, location=location)
    if first == v.SHAPE:
        _expect(cur, v.SHAPE)
        nxt = cur.peek()
        if isinstance(nxt, str) and _CODE_RE.match(nxt):
            codes = _take_shape_codes(cur)
            _expect(cur, v.LOCATION)
            location = _take_vec3(cur, cfg)
            _expect(cur, v.POSE)
            pose = _take_vec3(cur, cfg)
            _expect(cur, v.OBJECT_END)
            return SceneObject(shape_codes=codes, location=location, pose=pose)
        shape = _take_word(cur)
        _expect(cur, v.LOCATION)
        location = _take_vec3(cur, cfg)
        _expect(cur, v.POSE)
        pose = _take_vec3(cur, cfg)
        _expect(cur, v.OBJECT_END)
        return SceneObject(shape=shape, location=location, pose=pose)
    if first == v.CATEGORY:
        _expect(cur, v.CATEGORY)
        category = _take_word(cur)
        _expect(cur, v.CENTER_CAM)
        center_cam = _take_vec3(cur, cfg)
        _expect(cur, v.DIMENSIONS)
        dimensions = _take_vec3(cur, cfg)
        _expect(cur, v.OBJECT_END)
        return SceneObject(category=category, center_cam=center_cam,
                           dimensions=dimensions)
    raise GrammarError(cur.pos(), f"expected a field marker, found {first!r}")


def _resolve_style(forms: set[DatasetStyle], style: DatasetStyle | None) -> DatasetStyle:
    if style is not None:
        return style
    if forms:
        return forms.pop()
    return DatasetStyle.CLEVR


def _parse_strict(items, cfg, style, end_pos) -> Scene:
    cur = _Cursor(items, 0, end_pos)
    _expect(cur, v.SCENE_START)
    objects = []
    first_form = None
    while True:
        nxt = cur.peek()
        if nxt == v.SCENE_END:
            cur.take()
            break
        obj_pos = cur.pos()
        _expect(cur, v.OBJECT_START)
        obj = _parse_object_body(cur, cfg)
        form = obj.form()
        if first_form is None:
            first_form = form
        elif form != first_form:
            raise GrammarError(obj_pos, f"object style {form.value} mixes with {first_form.value}")
        objects.append(obj)
    if not cur.exhausted():
        raise GrammarError(cur.pos(), "trailing tokens after [SCENE-END]")
    if style is not None and first_form is not None and first_form not in _style_forms(style):
        raise GrammarError(0, f"objects are {first_form.value}, expected {style.value}")
    return Scene(tuple(objects), _resolve_style({first_form} if first_form else set(), style))


def _style_forms(style: DatasetStyle) -> tuple[DatasetStyle, ...]:
    if style in (DatasetStyle.OBJECTRON, DatasetStyle.ARKITSCENES):
        return (DatasetStyle.OBJECTRON,)
    return (style,)


def _parse_lenient(items, cfg, style, end_pos) -> tuple[Scene, list[ParseDiagnostic]]:
    diags: list[ParseDiagnostic] = []
    objects: list[SceneObject] = []
    n = len(items)
    i = 0
    starts = [j for j, (tok, _) in enumerate(items) if tok == v.SCENE_START]
    if starts:
        if starts[0] > 0:
            diags.append(ParseDiagnostic(items[0][1], f"skipped {starts[0]} tokens before [SCENE-START]"))
        i = starts[0] + 1
    else:
        diags.append(ParseDiagnostic(0, "missing [SCENE-START]"))
    scene_closed = False
    truncated_in_object = False
    form = None
    allowed = _style_forms(style) if style is not None else None
    while i < n:
        tok, pos = items[i]
        if tok == v.SCENE_END:
            scene_closed = True
            if i < n - 1:
                diags.append(ParseDiagnostic(items[i + 1][1], "trailing tokens after [SCENE-END]"))
            break
        if tok != v.OBJECT_START:
            j = i
            while j < n and items[j][0] not in (v.OBJECT_START, v.SCENE_END):
                j += 1
            diags.append(ParseDiagnostic(pos, f"skipped {j - i} stray tokens"))
            i = j
            continue
        cur = _Cursor(items, i + 1, end_pos)
        try:
            obj = _parse_object_body(cur, cfg)
        except GrammarError as exc:
            if cur.exhausted():
                diags.append(ParseDiagnostic(exc.position, "sequence truncated mid-object"))
                truncated_in_object = True
                i = n
                break
            j = i + 1
            while j < n and items[j][0] not in (v.OBJECT_START, v.SCENE_END):
                j += 1
            diags.append(ParseDiagnostic(exc.position, f"dropped malformed object ({exc})"))
            i = j
            continue
        obj_form = obj.form()
        if allowed is not None and obj_form not in allowed:
            diags.append(ParseDiagnostic(pos, f"dropped {obj_form.value} object in {style.value} scene"))
            i = cur.i
            continue
        if form is None:
            form = obj_form
        elif obj_form != form:
            diags.append(ParseDiagnostic(pos, f"dropped {obj_form.value} object mixing with {form.value}"))
            i = cur.i
            continue
        objects.append(obj)
        i = cur.i
    if not scene_closed and not truncated_in_object:
        diags.append(ParseDiagnostic(end_pos, "sequence ended before [SCENE-END]"))
    scene = Scene(tuple(objects), _resolve_style({form} if form else set(), style))
    return scene, diags


def parse_scene(
    tokens,
    cfg: QuantizerConfig,
    mode: ParseMode = ParseMode.STRICT,
    style: DatasetStyle | None = None,
) -> tuple[Scene, list[ParseDiagnostic]]:
    """Parse a token sequence back into a scene.

    STRICT demands the exact serialization grammar and raises
    :class:`GrammarError` with the offending token position. LENIENT never
    raises: it salvages every well-formed object block, resynchronizing on
    the next object boundary, and reports what it dropped as diagnostics.

    ``style`` disambiguates category-form scenes (Objectron vs ARKitScenes
    serialize identically); left unset, category-form parses as Objectron.
    """
    if isinstance(tokens, TokenString):
        tokens = tokens.tokens
    tokens = list(tokens)
    items = _expand(tokens)
    end_pos = len(tokens)
    if mode is ParseMode.STRICT:
        return _parse_strict(items, cfg, style, end_pos), []
    return _parse_lenient(items, cfg, style, end_pos)


# ---- corpus-level accounting ------------------------------------------------


def mean_sequence_length(scenes, cfg: QuantizerConfig) -> float:
    """Arithmetic mean token count of the serialized scenes."""
    scenes = list(scenes)
    if not scenes:
        raise EmptyInputError("mean_sequence_length needs at least one scene")
    return sum(len(serialize_scene(s, cfg)) for s in scenes) / len(scenes)


_NUM_FRAG_RE = re.compile(r"^(-?)(\d+)(?:\.(\d+))?$")


def _fragment_count(tok: str) -> int:
    if tok == v.OBJECT_SEP:
        return _fragment_count(v.OBJECT_END) + _fragment_count(v.OBJECT_START)
    if tok == v.SCENE_CLOSE:
        return _fragment_count(v.OBJECT_END) + _fragment_count(v.SCENE_END)
    if _MARKER_RE.match(tok):
        pieces = re.findall(r"[A-Za-z]+|[-_]", tok[1:-1])
        return 2 + len(pieces)
    m = _NUM_FRAG_RE.match(tok)
    if m:
        sign, _, frac = m.groups()
        count = 1 + (1 if sign else 0)
        if frac is not None:
            count += 2  # decimal point + fraction digits
        return count
    if _CODE_RE.match(tok):
        return 3
    return 1


def fragmenting_baseline_length(scenes, cfg: QuantizerConfig) -> float:
    """Mean token count under a fragmenting text tokenizer emulation.

    Each number splits into sign/integer/point/fraction pieces and each
    marker into bracketed word pieces; an oracle for the sequence-length
    compression claim, not a real subword tokenizer.
    """
    scenes = list(scenes)
    if not scenes:
        raise EmptyInputError("fragmenting_baseline_length needs at least one scene")
    total = 0
    for scene in scenes:
        total += sum(_fragment_count(t) for t in serialize_scene(scene, cfg))
    return total / len(scenes)


# ---- token-stream files ------------------------------------------------------

STREAM_MAGIC = b"STK1"


def write_token_lines(sequences, stream) -> None:
    """One sequence per line, tokens space-separated."""
    for seq in sequences:
        stream.write(" ".join(str(t) for t in seq))
        stream.write("\n")


def read_token_lines(stream) -> list[list[str]]:
    return [line.split() for line in stream.read().splitlines() if line.strip()]


def _write_uvarint(out: io.BufferedIOBase, value: int) -> None:
    if value < 0:
        raise ValueError("varint values must be non-negative")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.write(bytes((byte | 0x80,)))
        else:
            out.write(bytes((byte,)))
            return


def _read_uvarint(data: bytes, offset: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if offset >= len(data):
            raise ValueError("truncated varint")
        byte = data[offset]
        offset += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, offset
        shift += 7


def write_id_records(sequences, stream) -> None:
    """Binary token-stream format: magic STK1, varint-framed ID records."""
    stream.write(STREAM_MAGIC)
    for seq in sequences:
        seq = list(seq)
        _write_uvarint(stream, len(seq))
        for token_id in seq:
            _write_uvarint(stream, int(token_id))


def read_id_records(stream) -> list[list[int]]:
    data = stream.read()
    if data[:4] != STREAM_MAGIC:
        raise ValueError("not an STK1 token stream")
    offset = 4
    records = []
    while offset < len(data):
        count, offset = _read_uvarint(data, offset)
        ids = []
        for _ in range(count):
            token_id, offset = _read_uvarint(data, offset)
            ids.append(token_id)
        records.append(ids)
    return records
