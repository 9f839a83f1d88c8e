"""Finite abelian range groups, their dual characters, and the compressed-oracle
single-register transition matrix.

The range of the oracle is a finite abelian group Y of order M, extended by a
distinguished "undefined" symbol BOT.  Two group kinds are supported: the bit
group Z_2^m (real characters, the common case) and the cyclic group Z_M
(complex characters).  All matrices and vectors over Y-bar use the canonical
basis order (0, 1, ..., M-1, BOT), i.e. BOT is always the last index, M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

BITS = "bits"
CYCLIC = "cyclic"


@dataclass(frozen=True)
class GroupSpec:
    """A finite abelian group Y with |Y| = order, addressed by indices 0..order-1."""

    kind: str
    order: int

    def __post_init__(self):
        if self.kind not in (BITS, CYCLIC):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.order < 2:
            raise ValueError("group order must be at least 2")
        if self.kind == BITS and self.order & (self.order - 1):
            raise ValueError("bit group order must be a power of two")

    @classmethod
    def bits(cls, m: int) -> "GroupSpec":
        return cls(BITS, 1 << m)

    @classmethod
    def cyclic(cls, order: int) -> "GroupSpec":
        return cls(CYCLIC, order)

    @property
    def bot(self) -> int:
        """Index encoding the undefined symbol; always last in basis order."""
        return self.order

    @property
    def nbits(self) -> int:
        return (self.order - 1).bit_length()

    def elements(self) -> range:
        return range(self.order)

    def extended(self) -> range:
        """Y-bar: group elements followed by BOT."""
        return range(self.order + 1)

    def add(self, a: int, b: int) -> int:
        self.check_element(a)
        self.check_element(b)
        if self.kind == BITS:
            return a ^ b
        return (a + b) % self.order

    def neg(self, a: int) -> int:
        self.check_element(a)
        if self.kind == BITS:
            return a
        return (-a) % self.order

    def check_element(self, a: int) -> int:
        if not 0 <= a < self.order:
            raise ValueError(f"element index {a} out of range for order {self.order}")
        return a

    def check_extended(self, a: int) -> int:
        if not 0 <= a <= self.order:
            raise ValueError(f"extended index {a} out of range for order {self.order}")
        return a


def character(spec: GroupSpec, yhat: int, y: int) -> complex:
    """Evaluate the dual character yhat at the group element y.

    The dual group is indexed by 0..M-1 with the standard pairing per kind:
    (-1)^(popcount(yhat & y)) for the bit group, exp(2*pi*i*yhat*y/M) for the
    cyclic group.  Index 0 is the neutral character.
    """
    spec.check_element(yhat)
    spec.check_element(y)
    if spec.kind == BITS:
        return -1.0 + 0j if (yhat & y).bit_count() & 1 else 1.0 + 0j
    return complex(np.exp(2j * math.pi * (yhat * y % spec.order) / spec.order))


def character_row(spec: GroupSpec, yhat: int) -> np.ndarray:
    """Vector of yhat(y) over all y in Y."""
    return np.array([character(spec, yhat, y) for y in spec.elements()])


@lru_cache(maxsize=None)
def _transition_matrix_cached(kind: str, order: int, yhat: int) -> np.ndarray:
    spec = GroupSpec(kind, order)
    m = order
    if yhat == 0:
        out = np.eye(m + 1, dtype=complex)
        out.setflags(write=False)
        return out
    ch = character_row(spec, yhat)
    g = np.empty((m + 1, m + 1), dtype=complex)
    s = math.sqrt(m)
    for u in range(m):
        g[u, m] = ch[u] / s
        # row BOT carries yhat(r)/sqrt(M) unconjugated; unitarity fails for
        # complex characters under the conjugated variant
        g[m, u] = ch[u] / s
        for r in range(m):
            if r == u:
                g[u, r] = (1.0 - 2.0 / m) * ch[u] + 1.0 / m
            else:
                g[u, r] = (1.0 - ch[r] - ch[u]) / m
    g[m, m] = 0.0
    g.setflags(write=False)
    return g


def transition_matrix(spec: GroupSpec, yhat: int) -> np.ndarray:
    """The (M+1)x(M+1) unitary describing one compressed-oracle query at a
    single database register, for response Fourier component yhat.

    Entry [u, r] is the amplitude for the register to move from value r to
    value u; the identity when yhat is the neutral character.  Cached per
    (spec, yhat); the returned array is read-only.
    """
    spec.check_element(yhat)
    return _transition_matrix_cached(spec.kind, spec.order, yhat)


def comp_matrix(spec: GroupSpec) -> np.ndarray:
    """Single-register compression unitary in the computational basis.

    Swaps the neutral Fourier vector with BOT and fixes every other Fourier
    vector; real, symmetric, and an involution for every finite abelian group.
    """
    m = spec.order
    c = np.full((m + 1, m + 1), -1.0 / m)
    np.fill_diagonal(c, 1.0 - 1.0 / m)
    c[m, :] = 1.0 / math.sqrt(m)
    c[:, m] = 1.0 / math.sqrt(m)
    c[m, m] = 0.0
    return c


def dual_transform(spec: GroupSpec) -> np.ndarray:
    """M x M unitary taking computational-basis amplitudes to dual-basis ones.

    W[yhat, y] = yhat(y)/sqrt(M), so psi_hat = W @ psi.
    """
    m = spec.order
    w = np.empty((m, m), dtype=complex)
    for yhat in range(m):
        w[yhat, :] = character_row(spec, yhat) / math.sqrt(m)
    return w


def tilde_prob(spec: GroupSpec, r: int, yhat: int, subset) -> float:
    """P-tilde[U in S | r, yhat]: squared transition amplitudes into S from r."""
    spec.check_extended(r)
    g = transition_matrix(spec, yhat)
    total = 0.0
    for u in subset:
        spec.check_extended(u)
        total += abs(g[u, r]) ** 2
    return total


def connection_bound_check(spec: GroupSpec, subset, yhat: int) -> dict:
    """Check sum_r P-tilde[r != U in L | r, yhat] <= 10 |L| / M for L inside Y.

    Returns a record with both sides of the inequality; BOT may not be in L.
    """
    members = sorted(subset)
    for u in members:
        if u == spec.bot:
            raise ValueError("connection bound is defined for subsets of Y only")
        spec.check_element(u)
    g = transition_matrix(spec, yhat)
    lhs = 0.0
    for r in spec.extended():
        lhs += sum(abs(g[u, r]) ** 2 for u in members if u != r)
    rhs = 10.0 * len(members) / spec.order
    return {"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs + 1e-12}


def format_matrix(matrix: np.ndarray, digits: int = 4) -> str:
    """Aligned decimal table of a small complex matrix, for docs and tests."""
    def fmt(z: complex) -> str:
        if abs(z.imag) < 1e-12:
            return f"{z.real:+.{digits}f}"
        return f"{z.real:+.{digits}f}{z.imag:+.{digits}f}i"

    rows = [" ".join(fmt(z) for z in row) for row in np.asarray(matrix)]
    return "\n".join(rows)
