"""Center-first permutation of flattened image-token sequences and its inverse.

The permutation starts at the center index of the raster sequence and hops
alternately outward (left first by default) until both sides are exhausted,
so the first emitted token comes from a representative image region instead
of a background corner.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LengthMismatchError


@dataclass(frozen=True)
class ReorderPlan:
    length: int
    perm: tuple[int, ...]


def center_plan(length: int, first_hop: str = "left") -> ReorderPlan:
    """Plan for a sequence of ``length`` tokens; center = floor(length/2)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if first_hop not in ("left", "right"):
        raise ValueError("first_hop must be 'left' or 'right'")
    center = length // 2
    perm = [center]
    step = 1
    while len(perm) < length:
        hops = (center - step, center + step)
        if first_hop == "right":
            hops = hops[::-1]
        for idx in hops:
            if 0 <= idx < length:
                perm.append(idx)
        step += 1
    return ReorderPlan(length, tuple(perm))


def apply(plan: ReorderPlan, tokens) -> list:
    """Reorder raster-order tokens into center-first order."""
    tokens = list(tokens)
    if len(tokens) != plan.length:
        raise LengthMismatchError(f"expected {plan.length} tokens, got {len(tokens)}")
    return [tokens[i] for i in plan.perm]


def invert(plan: ReorderPlan, tokens) -> list:
    """Undo :func:`apply`; invert(apply(x)) == x elementwise."""
    tokens = list(tokens)
    if len(tokens) != plan.length:
        raise LengthMismatchError(f"expected {plan.length} tokens, got {len(tokens)}")
    out = [None] * plan.length
    for i, idx in enumerate(plan.perm):
        out[idx] = tokens[i]
    return out
