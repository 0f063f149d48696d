"""Unified token-ID space spanning text, markers, numeric bins, and codebooks.

ID layout is contiguous and deterministic:

    [0, base_size)                      reserved text block (word registry at the front)
    [base_size, +len(specials))         special marker tokens
    [.., +len(numeric))                 numeric grid tokens
    [.., +image_codes)                  image codebook IDs
    [.., +shape_codes)                  shape codebook IDs

The reserved text block stands in for an external subword tokenizer: only the
word tokens actually used by scenes, instructions, and answers are registered;
the rest of the block stays opaque so the ID arithmetic of a full text
vocabulary is preserved.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field

from .errors import DuplicateTokenError, UnknownTokenError
from .quantize import QuantizerConfig, numeric_vocab

# Structural markers.
BOS = "[BOS]"
EOS = "[EOS]"
OUTPUT_SEP = "[OUTPUT-SEP]"
SCENE_START = "[SCENE-START]"
SCENE_END = "[SCENE-END]"
OBJECT_START = "[OBJECT-START]"
OBJECT_END = "[OBJECT-END]"
TEXT_START = "[TEXT-START]"
TEXT_END = "[TEXT-END]"
IMAGE_START = "[IMAGE-START]"
IMAGE_END = "[IMAGE-END]"

# Field markers.
SIZE = "[SIZE]"
COLOR = "[COLOR]"
MATERIAL = "[MATERIAL]"
SHAPE = "[SHAPE]"
LOCATION = "[LOCATION]"
POSE = "[POSE]"
CATEGORY = "[CATEGORY]"
CENTER_CAM = "[CENTER_CAM]"
DIMENSIONS = "[DIMENSIONS]"

# Fused boundary tokens. Consecutive object-end/object-start (and the final
# object-end/scene-end) pairs are emitted as single separator tokens, which
# keeps the serialized character stream unchanged while making per-object
# token counts match the sequence-length accounting contract (13n+2 CLEVR).
OBJECT_SEP = OBJECT_END + OBJECT_START
SCENE_CLOSE = OBJECT_END + SCENE_END

SPECIAL_TOKENS: tuple[str, ...] = (
    BOS, EOS, OUTPUT_SEP,
    SCENE_START, SCENE_END, OBJECT_START, OBJECT_END,
    SIZE, COLOR, MATERIAL, SHAPE, LOCATION, POSE,
    CATEGORY, CENTER_CAM, DIMENSIONS,
    TEXT_START, TEXT_END, IMAGE_START, IMAGE_END,
    OBJECT_SEP, SCENE_CLOSE,
)

DEFAULT_BASE_SIZE = 128_000
DEFAULT_IMAGE_CODES = 1_024
SHAPE_CODEBOOK = 8_192


def _dedup(words) -> tuple[str, ...]:
    seen = {}
    for w in words:
        seen.setdefault(w, None)
    return tuple(seen)


DEFAULT_WORDS: tuple[str, ...] = _dedup(
    # attribute values
    ["small", "large",
     "gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow",
     "rubber", "metal",
     "cube", "sphere", "cylinder"]
    # asset names
    + ["person", "bench", "lamppost", "bird", "sofa", "table"]
    # real-world category names
    + ["bicycle", "book", "bottle", "camera", "car", "cereal_box", "chair",
       "cup", "laptop", "shoes", "bathtub", "bed", "cabinet", "dishwasher",
       "fireplace", "oven", "refrigerator", "shelves", "sink", "stove",
       "toilet", "tv", "washer"]
    # answer words
    + ["True", "False", "yes", "no"]
    + [str(n) for n in range(11)]
    # instruction / question words
    + ["Change", "Transform", "Set", "Put", "Insert", "Add", "Remove", "Take",
       "Move", "What", "Is", "Are", "How", "Does", "many", "there", "the",
       "a", "an", "to", "have", "of", "and", "or", "out", "object", "objects",
       "thing", "things", "position", "towards", "left", "right", "front",
       "behind", "size", "color", "material", "shape", "same", "as", "is",
       "it", "in", "on", "that", "made"]
    # punctuation
    + ["?", ".", ",", "!"]
)

_WORD_RE = re.compile(r"[\w'-]+|[^\w\s]")
_SHAPE_TOKEN_RE = re.compile(r"^<(\d+)>$")


class ImageCode(int):
    """Image-codebook index, wrapped so lookups are typed."""

    __slots__ = ()


class ShapeCode(int):
    """Shape-codebook index, wrapped so lookups are typed."""

    __slots__ = ()


def shape_code_token(code: int) -> str:
    """String form of a shape code for token-string serializations."""
    return f"<{int(code)}>"


def tokenize_words(text: str) -> list[str]:
    """Split free text into word tokens, punctuation separated."""
    return _WORD_RE.findall(text)


@dataclass
class Vocabulary:
    """Immutable after construction; build via :func:`build_vocab`."""

    base_size: int
    specials: tuple[str, ...]
    numeric: tuple[str, ...]
    words: tuple[str, ...]
    image_codes: int
    shape_codes: int
    _by_string: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.words) > self.base_size:
            raise ValueError("word registry larger than the reserved base block")
        by_string: dict[str, int] = {}
        for i, w in enumerate(self.words):
            self._claim(by_string, w, i)
        for i, s in enumerate(self.specials):
            self._claim(by_string, s, self.specials_offset + i)
        for i, n in enumerate(self.numeric):
            self._claim(by_string, n, self.numeric_offset + i)
        self._by_string = by_string

    @staticmethod
    def _claim(table: dict[str, int], token: str, token_id: int):
        if token in table:
            raise DuplicateTokenError(f"token {token!r} assigned twice")
        table[token] = token_id

    @property
    def specials_offset(self) -> int:
        return self.base_size

    @property
    def numeric_offset(self) -> int:
        return self.base_size + len(self.specials)

    @property
    def image_offset(self) -> int:
        return self.numeric_offset + len(self.numeric)

    @property
    def shape_offset(self) -> int:
        return self.image_offset + self.image_codes

    @property
    def total_size(self) -> int:
        return self.shape_offset + self.shape_codes

    def lookup(self, token) -> int:
        """Unique ID of a token string or typed codebook index."""
        if isinstance(token, ImageCode):
            if not 0 <= token < self.image_codes:
                raise UnknownTokenError(f"image code {int(token)} out of range")
            return self.image_offset + token
        if isinstance(token, ShapeCode):
            if not 0 <= token < self.shape_codes:
                raise UnknownTokenError(f"shape code {int(token)} out of range")
            return self.shape_offset + token
        if isinstance(token, str):
            found = self._by_string.get(token)
            if found is not None:
                return found
            m = _SHAPE_TOKEN_RE.match(token)
            if m:
                return self.lookup(ShapeCode(int(m.group(1))))
        raise UnknownTokenError(f"unknown token {token!r}")

    def id_to_token(self, token_id: int):
        """Inverse of lookup. Reserved base IDs without a registered word raise."""
        if not 0 <= token_id < self.total_size:
            raise UnknownTokenError(f"ID {token_id} outside the vocabulary")
        if token_id < len(self.words):
            return self.words[token_id]
        if token_id < self.base_size:
            raise UnknownTokenError(f"ID {token_id} is reserved base-text space")
        if token_id < self.numeric_offset:
            return self.specials[token_id - self.specials_offset]
        if token_id < self.image_offset:
            return self.numeric[token_id - self.numeric_offset]
        if token_id < self.shape_offset:
            return ImageCode(token_id - self.image_offset)
        return ShapeCode(token_id - self.shape_offset)

    def encode_text(self, text: str) -> list[int]:
        return [self.lookup(w) for w in tokenize_words(text)]

    def decode_text(self, ids) -> str:
        return " ".join(str(self.id_to_token(i)) for i in ids)

    # ---- manifest -------------------------------------------------------

    def save_manifest(self, stream) -> None:
        """Line-oriented manifest: counts for opaque blocks, ID<TAB>token rows."""
        own = stream if hasattr(stream, "write") else open(stream, "w", encoding="utf-8")
        try:
            own.write("#scenetok-vocab 1\n")
            own.write(f"#base_size {self.base_size}\n")
            own.write(f"#image_codes {self.image_codes}\n")
            own.write(f"#shape_codes {self.shape_codes}\n")
            own.write(f"#words {len(self.words)}\n")
            own.write(f"#specials {len(self.specials)}\n")
            own.write(f"#numeric {len(self.numeric)}\n")
            own.write(f"#total_size {self.total_size}\n")
            for group in (self.words, self.specials, self.numeric):
                for tok in group:
                    own.write(f"{self.lookup(tok)}\t{tok}\n")
        finally:
            if own is not stream:
                own.close()

    def manifest_text(self) -> str:
        buf = io.StringIO()
        self.save_manifest(buf)
        return buf.getvalue()


def load_manifest(stream) -> Vocabulary:
    own = stream if hasattr(stream, "read") else open(stream, "r", encoding="utf-8")
    try:
        lines = own.read().splitlines()
    finally:
        if own is not stream:
            own.close()
    if not lines or not lines[0].startswith("#scenetok-vocab"):
        raise ValueError("not a vocabulary manifest")
    headers = {}
    rows = []
    for line in lines[1:]:
        if line.startswith("#"):
            key, value = line[1:].split(" ", 1)
            headers[key] = int(value)
        elif line:
            id_text, tok = line.split("\t", 1)
            rows.append((int(id_text), tok))
    n_words, n_specials, n_numeric = headers["words"], headers["specials"], headers["numeric"]
    words = tuple(tok for _, tok in rows[:n_words])
    specials = tuple(tok for _, tok in rows[n_words:n_words + n_specials])
    numeric = tuple(tok for _, tok in rows[n_words + n_specials:])
    if len(numeric) != n_numeric:
        raise ValueError("manifest row counts disagree with headers")
    vocab = Vocabulary(
        base_size=headers["base_size"],
        specials=specials,
        numeric=numeric,
        words=words,
        image_codes=headers["image_codes"],
        shape_codes=headers["shape_codes"],
    )
    for token_id, tok in rows:
        if vocab.lookup(tok) != token_id:
            raise ValueError(f"manifest ID mismatch for {tok!r}")
    return vocab


def build_vocab(
    cfg: QuantizerConfig,
    specials=SPECIAL_TOKENS,
    image_codes: int = DEFAULT_IMAGE_CODES,
    with_shapes: bool = False,
    words=DEFAULT_WORDS,
    base_size: int = DEFAULT_BASE_SIZE,
) -> Vocabulary:
    """Assemble the unified vocabulary; ID assignment is stable across runs.

    ``specials`` must cover the named marker set; the fused boundary tokens
    are derived compounds and are appended automatically when absent.
    """
    specials = tuple(specials)
    if not specials:
        raise ValueError("specials must be non-empty")
    required = [s for s in SPECIAL_TOKENS if s not in (OBJECT_SEP, SCENE_CLOSE)]
    missing = [s for s in required if s not in specials]
    if missing:
        raise ValueError(f"specials missing required markers: {missing}")
    for fused in (OBJECT_SEP, SCENE_CLOSE):
        if fused not in specials:
            specials += (fused,)
    return Vocabulary(
        base_size=base_size,
        specials=specials,
        numeric=tuple(numeric_vocab(cfg)),
        words=tuple(words),
        image_codes=int(image_codes),
        shape_codes=SHAPE_CODEBOOK if with_shapes else 0,
    )
