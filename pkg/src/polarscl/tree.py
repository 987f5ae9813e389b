"""Fast-SSC decoder tree: split a frozen pattern into constituent-code leaves."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import PolarCode, is_power_of_two
from .errors import InvalidParametersError


class NodeKind(str, Enum):
    RATE0 = "Rate0"
    RATE1 = "Rate1"
    REPETITION = "Repetition"
    SPC = "SPC"
    BRANCH = "Branch"


@dataclass(frozen=True)
class NodeCaps:
    """Maximum leaf length per constituent kind; ``None`` means uncapped."""

    rate0: int | None = 8
    rate1: int | None = None
    repetition: int | None = 8
    spc: int | None = 4

    def __post_init__(self):
        for name in ("rate0", "rate1", "repetition", "spc"):
            cap = getattr(self, name)
            if cap is not None and not is_power_of_two(cap):
                raise InvalidParametersError(f"cap {name}={cap} is not a power of two")

    def allows(self, kind: NodeKind, length: int) -> bool:
        cap = {
            NodeKind.RATE0: self.rate0,
            NodeKind.RATE1: self.rate1,
            NodeKind.REPETITION: self.repetition,
            NodeKind.SPC: self.spc,
        }[kind]
        return cap is None or length <= cap


# node length 1 everywhere: plain bit-by-bit decoding
BIT_LEVEL_CAPS = NodeCaps(rate0=1, rate1=1, repetition=1, spc=1)


@dataclass(frozen=True)
class Node:
    kind: NodeKind
    offset: int
    length: int
    children: tuple["Node", ...] = field(default=())

    @property
    def is_leaf(self) -> bool:
        return self.kind is not NodeKind.BRANCH

    def leaves(self):
        if self.is_leaf:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()

    def describe(self) -> str:
        if self.is_leaf:
            return f"{self.kind.value}({self.length})"
        return "Branch[" + ", ".join(c.describe() for c in self.children) + "]"


@dataclass(frozen=True)
class DecoderTree:
    root: Node
    N: int
    frozen_mask: np.ndarray = field(repr=False, compare=False)

    def leaves(self) -> list[Node]:
        return list(self.root.leaves())

    def census(self) -> Counter:
        """Leaf count per (kind, length)."""
        return Counter((leaf.kind.value, leaf.length) for leaf in self.leaves())

    def largest(self, kind: NodeKind) -> int:
        return max((leaf.length for leaf in self.leaves() if leaf.kind is kind), default=0)

    def matches(self, code: PolarCode) -> bool:
        return self.N == code.N and np.array_equal(self.frozen_mask, code.frozen_mask)


def classify(pattern: np.ndarray) -> NodeKind | None:
    """Kind whose frozen pattern equals ``pattern`` (True = frozen), if any."""
    n = pattern.size
    frozen = int(pattern.sum())
    if frozen == n:
        return NodeKind.RATE0
    if frozen == 0:
        return NodeKind.RATE1
    if n >= 2 and frozen == n - 1 and not pattern[-1]:
        return NodeKind.REPETITION
    if n >= 2 and frozen == 1 and pattern[0]:
        return NodeKind.SPC
    return None


def build_decoder_tree(code_or_mask, caps: NodeCaps | None = None) -> DecoderTree:
    """Recursively split the code into the largest matching constituent leaves."""
    caps = caps or NodeCaps()
    mask = code_or_mask.frozen_mask if isinstance(code_or_mask, PolarCode) else code_or_mask
    mask = np.asarray(mask, dtype=bool)
    if not is_power_of_two(mask.size):
        raise InvalidParametersError("frozen mask length must be a power of two")

    def build(offset: int, length: int) -> Node:
        pattern = mask[offset:offset + length]
        kind = classify(pattern)
        if kind is not None and (length == 1 or caps.allows(kind, length)):
            return Node(kind, offset, length)
        half = length // 2
        return Node(NodeKind.BRANCH, offset, length,
                    (build(offset, half), build(offset + half, half)))

    return DecoderTree(build(0, mask.size), mask.size, mask.copy())
