"""Fast-SSC-List decoding over a constituent-code tree."""

from __future__ import annotations

from ..core import PolarCode
from ..errors import InvalidParametersError
from ..tree import DecoderTree, Node, build_decoder_tree
from .primitives import decode_node
from .scl import DecoderConfig, ListEngine, ListResult


class FastSSCList(ListEngine):
    def __init__(self, tree: DecoderTree, config: DecoderConfig):
        super().__init__(config.list_size, config.quant)
        self.tree = tree

    def decode(self, llrs) -> ListResult:
        alpha = self.start(llrs)
        if alpha.shape[-1] != self.tree.N:
            raise InvalidParametersError(f"expected {self.tree.N} LLRs, got {alpha.shape[-1]}")
        beta, _ = self.node(self.tree.root, alpha)
        return ListResult.ranked(beta, self.pm, self.valid)

    def _child(self, node: Node, side: int, alpha):
        return self.node(node.children[side], alpha)

    def node(self, node: Node, alpha):
        if not node.is_leaf:
            return self.branch(node, alpha, self._child)
        cands = decode_node(node.kind, alpha, self.pm, self.L, self.quant)
        return self.select(cands.bits, cands.pm)


def fast_ssc_list_decode(tree: DecoderTree, llrs, config: DecoderConfig | None = None,
                         code: PolarCode | None = None) -> ListResult:
    """Decode with one candidate-generation + L-best sort per tree leaf.

    Passing ``code`` checks that the tree was built for it.
    """
    if code is not None and not tree.matches(code):
        raise InvalidParametersError("decoder tree was built for a different code")
    return FastSSCList(tree, config or DecoderConfig()).decode(llrs)


def fast_decoder_for(code: PolarCode, config: DecoderConfig | None = None):
    config = config or DecoderConfig()
    tree = build_decoder_tree(code, config.caps)
    return lambda llrs: fast_ssc_list_decode(tree, llrs, config)
