"""Security-analysis extraction: recover the maximal consistently labeled
subtree a database supports for a claimed root label, plus the chain machinery
and the lemma checkers built on it.

Databases here are query logs: finite maps from framed oracle inputs to w-bit
values, as exposed by the table backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import dag
from .backend import challenge_payload, label_payload, parse_label_payload


@dataclass
class ExtractResult:
    tree: set            # vertices surviving the leaf consistency check
    labels: dict         # every extracted label, including removed leaves
    collision: bool      # ambiguity was met while decomposing


def _label_entries_by_vertex(db: dict, n: int, w: int, chi: int) -> dict:
    """Index parseable label entries for the statement chi: vertex -> sorted
    list of (payload, labels, value) with the arity the DAG prescribes."""
    index: dict = {}
    for payload in sorted(db):
        parsed = parse_label_payload(payload, w)
        if parsed is None:
            continue
        pchi, v, labels = parsed
        if pchi != chi or len(v) > n:
            continue
        if len(labels) != len(dag.in_neighbors(v, n)):
            continue
        index.setdefault(v, []).append((payload, labels, db[payload]))
    return index


def extract(db: dict, n: int, phi: int, chi: int, w: int) -> ExtractResult:
    """Top-down labeling extraction followed by the leaf consistency check.

    A vertex decomposes when the database holds a label entry for it whose
    value equals its extracted label and whose non-child slots agree with the
    already-extracted skip labels; the children then inherit the child slots.
    With collisions in the database the decomposition may be ambiguous; the
    first candidate in canonical payload order is taken and a flag raised.
    """
    entries = _label_entries_by_vertex(db, n, w, chi)
    labels: dict = {dag.ROOT: phi}
    collision = False
    queue = [dag.ROOT]
    while queue:
        v = queue.pop(0)
        if dag.is_leaf(v, n):
            continue
        neighbors = dag.in_neighbors(v, n)
        skip_neighbors = neighbors[2:]
        candidates = []
        for payload, slot_labels, value in entries.get(v, ()):
            if value != labels[v]:
                continue
            if any(slot_labels[2 + i] != labels.get(u) for i, u in enumerate(skip_neighbors)):
                continue
            candidates.append(slot_labels)
        if not candidates:
            continue
        if len(candidates) > 1:
            collision = True
        chosen = candidates[0]
        labels[dag.left(v)] = chosen[0]
        labels[dag.right(v)] = chosen[1]
        queue.append(dag.left(v))
        queue.append(dag.right(v))
    tree = set(labels)
    for v in sorted((u for u in tree if dag.is_leaf(u, n)), key=dag.vertex_key):
        in_labels = [labels[u] for u in dag.in_neighbors(v, n)]
        payload = label_payload(chi, v, in_labels, w)
        if db.get(payload) != labels[v]:
            tree.discard(v)
    return ExtractResult(tree=tree, labels=labels, collision=collision)


def db_has_collision(db: dict, w: int) -> bool:
    """A collision is two distinct defined inputs sharing a value."""
    seen: set = set()
    for payload in db:
        value = db[payload]
        if value in seen:
            return True
        seen.add(value)
    return False


def longest_posw_chain(db: dict, n: int, w: int) -> float:
    """Longest chain x_0,...,x_s in the database under the link relation
    "the value of x_{i-1} appears as a label slot of x_i".

    Every element but the last must be a defined database entry; the last hop
    is free since any value fits a label slot of some input.  Support cycles
    give chains of every length, reported as inf.
    """
    payloads = sorted(db)
    slots = {}
    for payload in payloads:
        parsed = parse_label_payload(payload, w)
        slots[payload] = set(parsed[2]) if parsed else set()
    successors = {
        p: [p2 for p2 in payloads if db[p] in slots[p2]] for p in payloads
    }
    best: dict = {}
    on_stack: set = set()

    def longest_from(p) -> float:
        if p in best:
            return best[p]
        if p in on_stack:
            return math.inf
        on_stack.add(p)
        value = 1.0  # the free final hop
        for p2 in successors[p]:
            tail = longest_from(p2)
            if math.isinf(tail):
                value = math.inf
                break
            value = max(value, 1.0 + tail)
        on_stack.discard(p)
        best[p] = value
        return value

    return max((longest_from(p) for p in payloads), default=0.0)


def challenge_leaves_in_db(db: dict, n: int, w: int, chi: int, phi: int, t: int) -> list | None:
    """The t challenge leaves for phi if every needed challenge block is in the
    database; None when the challenge was never queried."""
    bits = ""
    counter = 0
    while len(bits) < t * n:
        payload = challenge_payload(chi, phi, counter, w)
        if payload not in db:
            return None
        bits += format(db[payload], f"0{w}b")
        counter += 1
    return [bits[i * n : (i + 1) * n] for i in range(t)]


def check_leaves_lemma(db: dict, n: int, w: int, chi: int, extra_phis=()) -> bool:
    """Leaf-count bound: with q the longest chain in the database, every
    extracted subtree has at most (q+2)/2 leaves.

    Root-label candidates are all values occurring in the database plus any
    supplied extras.  Databases with unboundedly long chains satisfy the bound
    vacuously.
    """
    q = longest_posw_chain(db, n, w)
    if math.isinf(q):
        return True
    phis = sorted(set(db.values()) | set(extra_phis))
    limit = (q + 2) / 2.0
    for phi in phis:
        result = extract(db, n, phi, chi, w)
        if len([v for v in result.tree if dag.is_leaf(v, n)]) > limit:
            return False
    return True


def check_extract_lemma(db: dict, n: int, w: int, chi: int, phi: int,
                        completeness: bool = False) -> bool:
    """Soundness and maximality of extraction on a collision-free database.

    Checks that the extracted labeling is consistent on the subtree (every
    vertex whose in-neighborhood lies in the tree satisfies its label
    equation), that leaves in the tree have all ancestor equations satisfied,
    and, when completeness is set, that leaves outside the tree admit no
    consistent ancestor labeling with the claimed root label (exhaustive over
    label assignments; only feasible at tiny n and w).
    """
    result = extract(db, n, phi, chi, w)
    tree, labels = result.tree, result.labels

    def equation_holds(lab: dict, v: str) -> bool:
        ins = dag.in_neighbors(v, n)
        if any(u not in lab for u in ins) or v not in lab:
            return False
        return db.get(label_payload(chi, v, [lab[u] for u in ins], w)) == lab[v]

    for v in tree:
        if all(u in tree for u in dag.in_neighbors(v, n)) and dag.in_neighbors(v, n):
            if not equation_holds(labels, v):
                return False
    for v in (u for u in tree if dag.is_leaf(u, n)):
        if not all(equation_holds(labels, z) for z in dag.ancestors(v)):
            return False
    if completeness:
        for v in (u for u in dag.leaves(n) if u not in tree):
            if _consistent_ancestor_labeling_exists(db, n, w, chi, phi, v):
                return False
    return True


def _consistent_ancestor_labeling_exists(db: dict, n: int, w: int, chi: int,
                                         phi: int, v: str) -> bool:
    """Exhaustively search for a labeling of the ancestor closure of leaf v
    satisfying every ancestor equation with root label phi."""
    closure: list = []
    for z in dag.ancestors(v):
        for u in [z] + dag.in_neighbors(z, n):
            if u not in closure:
                closure.append(u)
    free = [u for u in closure if u != dag.ROOT]
    for assignment in _assignments(free, w):
        lab = dict(assignment)
        lab[dag.ROOT] = phi
        ok = True
        for z in dag.ancestors(v):
            ins = dag.in_neighbors(z, n)
            payload = label_payload(chi, z, [lab[u] for u in ins], w)
            if db.get(payload) != lab[z]:
                ok = False
                break
        if ok:
            return True
    return False


def _assignments(vertices: list, w: int):
    import itertools

    for values in itertools.product(range(1 << w), repeat=len(vertices)):
        yield dict(zip(vertices, values))


def check_newpath_lemma(db: dict, xs, us, phi: int, chi: int, n: int, w: int) -> bool:
    """Update locality of extraction: every leaf gained by redefining the
    database on xs admits an ancestor whose new label is one of the fresh
    values.  Assumes the base database is collision-free.
    """
    updated = dict(db)
    for payload, value in zip(xs, us):
        updated[payload] = value
    base = extract(db, n, phi, chi, w)
    new = extract(updated, n, phi, chi, w)
    base_leaves = {v for v in base.tree if dag.is_leaf(v, n)}
    new_leaves = {v for v in new.tree if dag.is_leaf(v, n)}
    for v in sorted(new_leaves - base_leaves, key=dag.vertex_key):
        found = False
        for payload in xs:
            if db.get(payload) == updated[payload]:
                continue
            if any(updated[payload] == new.labels.get(z) for z in dag.ancestors(v)):
                found = True
                break
        if not found:
            return False
    return True


def path_to_chain(labels: dict, path, n: int, chi: int, w: int, db: dict | None = None) -> list:
    """Map a DAG path through a labeled subtree to the chain of oracle inputs
    x_i = (v_i, labels of in(v_i)), validating every link.

    When a database is supplied, the labeling must be consistent with it along
    the path (except at the final vertex, whose value never enters a link)."""
    path = list(path)
    chain = []
    for i, v in enumerate(path):
        neighbors = dag.in_neighbors(v, n)
        if any(u not in labels for u in neighbors) or v not in labels:
            raise ValueError(f"labeling does not cover vertex {v or 'root'}")
        in_labels = [labels[u] for u in neighbors]
        if i > 0:
            prev = path[i - 1]
            if prev not in neighbors:
                raise ValueError(f"({prev or 'root'}, {v or 'root'}) is not a DAG edge")
            if labels[prev] not in in_labels:
                raise ValueError("labeling breaks the link relation")
        if db is not None and i < len(path) - 1:
            payload = label_payload(chi, v, in_labels, w)
            if db.get(payload) != labels[v]:
                raise ValueError(f"labeling inconsistent with the database at {v or 'root'}")
        chain.append((v, tuple(in_labels)))
    return chain
