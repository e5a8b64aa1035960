"""Bracketed constituency tree parsing."""

from .errors import TreeParseError


class TreeNode:
    __slots__ = ("label", "children", "leaf_index")

    def __init__(self, label, children=None, leaf_index=None):
        self.label = label
        self.children = children or []
        self.leaf_index = leaf_index  # set for terminals only

    @property
    def is_leaf(self):
        return self.leaf_index is not None

    def leaves(self):
        if self.is_leaf:
            return [self.leaf_index]
        out = []
        for child in self.children:
            out.extend(child.leaves())
        return out


def parse_tree(bracketing: str) -> TreeNode:
    """Parse '(S (NP (DT the) (NN cat)) ...)' into a TreeNode, numbering leaves."""
    tokens = bracketing.replace("(", " ( ").replace(")", " ) ").split()
    if not tokens:
        raise TreeParseError("empty bracketing")
    pos = 0
    counter = [0]

    def parse_node():
        nonlocal pos
        if tokens[pos] != "(":
            # bare terminal
            node = TreeNode(tokens[pos], leaf_index=counter[0])
            counter[0] += 1
            pos += 1
            return node
        pos += 1  # consume "("
        if pos >= len(tokens) or tokens[pos] in "()":
            raise TreeParseError("expected node label after '('")
        label = tokens[pos]
        pos += 1
        children = []
        while pos < len(tokens) and tokens[pos] != ")":
            children.append(parse_node())
        if pos >= len(tokens):
            raise TreeParseError("unbalanced bracketing")
        pos += 1  # consume ")"
        if not children:
            raise TreeParseError(f"node '{label}' has no children")
        return TreeNode(label, children=children)

    root = parse_node()
    if pos != len(tokens):
        raise TreeParseError("trailing content after root")
    return root


def leaf_count(bracketing: str) -> int:
    return len(parse_tree(bracketing).leaves())
