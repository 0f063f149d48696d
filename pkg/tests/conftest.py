import itertools
import random
import re

import pytest

from scenetok import (
    DatasetStyle,
    QuantizerConfig,
    Scene,
    SceneObject,
    build_vocab,
)

CLEVR_SIZES = ("small", "large")
CLEVR_COLORS = ("gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow")
CLEVR_MATERIALS = ("rubber", "metal")
CLEVR_SHAPES = ("cube", "sphere", "cylinder")

_LISTING_RE = re.compile(r"\[[A-Z_-]+\]|[^\[\]\s]+")


def tokenize_listing(text: str) -> list[str]:
    """Split a raw serialized string into marker/word/number tokens."""
    return _LISTING_RE.findall(text)


def grid(x: float) -> float:
    """Snap to the default 0.05 grid (keeps generated fixtures bit-exact)."""
    return round(round(x / 0.05) * 0.05, 2)


def make_clevr_scene(n: int, seed: int = 0) -> Scene:
    rng = random.Random(seed)
    combos = list(itertools.product(CLEVR_SIZES, CLEVR_COLORS, CLEVR_MATERIALS, CLEVR_SHAPES))
    rng.shuffle(combos)
    objects = []
    for i in range(n):
        size, color, material, shape = combos[i % len(combos)]
        z = 0.70 if size == "large" else 0.35
        objects.append(SceneObject(
            size=size, color=color, material=material, shape=shape,
            location=(grid(rng.uniform(-3, 3)), grid(rng.uniform(-3, 3)), z),
        ))
    return Scene(tuple(objects), DatasetStyle.CLEVR)


def make_objaworld_scene(n: int, seed: int = 0) -> Scene:
    rng = random.Random(seed)
    assets = ("person", "bench", "lamppost", "bird", "sofa", "table")
    objects = [
        SceneObject(
            shape=rng.choice(assets),
            location=(grid(rng.uniform(-3, 3)), grid(rng.uniform(-3, 3)), grid(rng.uniform(0, 1.2))),
            pose=(0.0, 0.0, grid(rng.uniform(-3.1, 3.1))),
        )
        for _ in range(n)
    ]
    return Scene(tuple(objects), DatasetStyle.OBJAWORLD)


def make_shapes_scene(n: int, seed: int = 0) -> Scene:
    rng = random.Random(seed)
    objects = [
        SceneObject(
            shape_codes=tuple(rng.randrange(8192) for _ in range(512)),
            location=(grid(rng.uniform(-3, 3)), grid(rng.uniform(-3, 3)), 0.0),
            pose=(0.0, 0.0, grid(rng.uniform(-3.1, 3.1))),
        )
        for _ in range(n)
    ]
    return Scene(tuple(objects), DatasetStyle.OBJAWORLD_SHAPES)


def make_category_scene(n: int, style=DatasetStyle.OBJECTRON, seed: int = 0) -> Scene:
    rng = random.Random(seed)
    categories = ("bicycle", "camera", "chair", "book", "bottle")
    objects = [
        SceneObject(
            category=rng.choice(categories),
            center_cam=(grid(rng.uniform(-5, 5)), grid(rng.uniform(-5, 5)), grid(rng.uniform(0, 5))),
            dimensions=(grid(rng.uniform(0.1, 2)), grid(rng.uniform(0.1, 2)), grid(rng.uniform(0.1, 2))),
        )
        for _ in range(n)
    ]
    return Scene(tuple(objects), style)


@pytest.fixture(scope="session")
def clevr_cfg() -> QuantizerConfig:
    return QuantizerConfig.clevr()


@pytest.fixture(scope="session")
def objectron_cfg() -> QuantizerConfig:
    return QuantizerConfig.objectron()


@pytest.fixture(scope="session")
def clevr_vocab(clevr_cfg):
    return build_vocab(clevr_cfg)


@pytest.fixture(scope="session")
def shapes_vocab(clevr_cfg):
    return build_vocab(clevr_cfg, with_shapes=True)
