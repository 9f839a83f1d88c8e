"""The skip-augmented binary-tree DAG underlying the sequential-work protocol.

Vertices are bit strings of length 0..n, the root being the empty string.
Tree edges point from children to parents; skip edges point from the left
sibling of every right-child ancestor of a vertex into that vertex.  The fixed
vertex ordering is (length, lexicographic).
"""

from __future__ import annotations

ROOT = ""


def check_vertex(v: str, n: int) -> str:
    if len(v) > n or any(c not in "01" for c in v):
        raise ValueError(f"invalid vertex {v!r} for depth {n}")
    return v


def vertex_key(v: str) -> tuple:
    return (len(v), v)


def parent(v: str) -> str:
    if v == ROOT:
        raise ValueError("the root has no parent")
    return v[:-1]


def sibling(v: str) -> str:
    if v == ROOT:
        raise ValueError("the root has no sibling")
    return v[:-1] + ("1" if v[-1] == "0" else "0")


def left(v: str) -> str:
    return v + "0"


def right(v: str) -> str:
    return v + "1"


def is_leaf(v: str, n: int) -> bool:
    return len(v) == n


def ancestors(v: str) -> list:
    """v itself, then its proper ancestors up to and including the root."""
    out = [v]
    while v != ROOT:
        v = parent(v)
        out.append(v)
    return out


def all_vertices(n: int) -> list:
    out = [ROOT]
    for depth in range(1, n + 1):
        out.extend(format(i, f"0{depth}b") for i in range(1 << depth))
    return out


def leaves(n: int) -> list:
    return [format(i, f"0{n}b") for i in range(1 << n)]


def in_neighbors(v: str, n: int) -> list:
    """Tree children (for internal vertices) followed by the skip-edge sources:
    the left siblings of every right-child ancestor, each group in vertex order."""
    check_vertex(v, n)
    children = [] if is_leaf(v, n) else [left(v), right(v)]
    skips = sorted(
        (sibling(u) for u in ancestors(v) if u != ROOT and u[-1] == "1"),
        key=vertex_key,
    )
    return children + skips


def authentication_path(v: str, n: int) -> list:
    """Non-root ancestors of a leaf together with their siblings, in vertex order."""
    check_vertex(v, n)
    if not is_leaf(v, n):
        raise ValueError("authentication paths are defined for leaves only")
    anc = [u for u in ancestors(v) if u != ROOT]
    path = set(anc) | {sibling(u) for u in anc}
    return sorted(path, key=vertex_key)


def prover_order(n: int) -> list:
    """Post-order evaluation sequence: every vertex appears after all of its
    in-neighbors, starting with the leftmost leaf."""
    order: list = []

    def walk(v: str) -> None:
        if not is_leaf(v, n):
            walk(left(v))
            walk(right(v))
        order.append(v)

    walk(ROOT)
    return order
