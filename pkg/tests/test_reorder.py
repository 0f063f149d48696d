import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from scenetok import center_plan
from scenetok.errors import LengthMismatchError
from scenetok.reorder import apply, invert


def test_length_six_enumeration():
    assert center_plan(6).perm == (3, 2, 4, 1, 5, 0)


def test_length_one():
    assert center_plan(1).perm == (0,)


def test_length_256_bijection():
    plan = center_plan(256)
    assert plan.perm[0] == 128
    assert sorted(plan.perm) == list(range(256))


def test_right_first_variant():
    assert center_plan(6, first_hop="right").perm == (3, 4, 2, 5, 1, 0)
    with pytest.raises(ValueError):
        center_plan(6, first_hop="up")


def test_apply_example():
    plan = center_plan(6)
    assert apply(plan, list("abcdef")) == list("dcebfa")


def test_constant_sequence_fixed_point():
    plan = center_plan(16)
    assert apply(plan, [7] * 16) == [7] * 16


def test_roundtrip_random():
    rng = random.Random(0)
    plan = center_plan(256)
    for _ in range(50):
        xs = [rng.randrange(1024) for _ in range(256)]
        assert invert(plan, apply(plan, xs)) == xs
        assert apply(plan, invert(plan, xs)) == xs


def test_length_mismatch():
    plan = center_plan(8)
    with pytest.raises(LengthMismatchError):
        apply(plan, [1, 2, 3])
    with pytest.raises(LengthMismatchError):
        invert(plan, [1] * 9)


def test_invalid_length():
    with pytest.raises(ValueError):
        center_plan(0)


@settings(max_examples=100, deadline=None)
@given(hst.integers(min_value=1, max_value=512))
def test_bijection_property(length):
    plan = center_plan(length)
    assert plan.perm[0] == length // 2
    assert sorted(plan.perm) == list(range(length))
