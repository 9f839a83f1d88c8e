"""Non-interactive sequential-work prover, challenge derivation, verifier, and
the binary proof wire format.

The prover labels the DAG bottom-up with N = 2^(n+1) - 1 sequential oracle
queries, commits to the root label, derives t challenge leaves from the
commitment by one logical challenge query, and opens the authentication path
of every challenge leaf.  The verifier recomputes the challenge and checks
every ancestor label equation of every challenge leaf.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from . import dag
from .backend import RoBackend, label_bytes, label_from_bytes

MAGIC = b"QPSW"
VERSION = 1


@dataclass(frozen=True)
class PoswParams:
    n: int  # tree depth; N = 2^(n+1) - 1 vertices
    w: int  # label width in bits

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("tree depth must be at least 1")
        if not 8 <= self.w <= 512:
            raise ValueError("label width must be between 8 and 512 bits")

    @property
    def vertex_count(self) -> int:
        return (1 << (self.n + 1)) - 1


@dataclass(frozen=True)
class PoswProof:
    n: int
    t: int
    w: int
    phi: int
    tau: tuple  # per challenge leaf, 2n labels in authentication-path order

    @property
    def size_bits(self) -> int:
        return self.w * (1 + self.t * 2 * self.n)


@dataclass(frozen=True)
class VerifyResult:
    accepted: bool
    reason: str | None = None


def compute_labeling(chi: int, params: PoswParams, backend: RoBackend) -> dict:
    """Honest labeling in the sequential leftmost-leaf-first order; exactly one
    oracle query per vertex."""
    if backend.w != params.w:
        raise ValueError("backend width does not match parameters")
    labels: dict = {}
    for v in dag.prover_order(params.n):
        in_labels = [labels[u] for u in dag.in_neighbors(v, params.n)]
        labels[v] = backend.label_query(chi, v, in_labels)
    return labels


def derive_challenge(chi: int, phi: int, t: int, n: int, backend: RoBackend) -> list:
    """The t challenge leaves parsed from the first t*n bits of the
    counter-extended challenge output (big-endian n-bit chunks, duplicates kept)."""
    if t < 1:
        raise ValueError("challenge count must be positive")
    bits = backend.challenge_query(chi, phi, t * n)
    return [bits[i * n : (i + 1) * n] for i in range(t)]


def prove(chi: int, params: PoswParams, t: int, backend: RoBackend) -> PoswProof:
    labels = compute_labeling(chi, params, backend)
    phi = labels[dag.ROOT]
    challenge = derive_challenge(chi, phi, t, params.n, backend)
    tau = tuple(
        tuple(labels[u] for u in dag.authentication_path(v, params.n)) for v in challenge
    )
    return PoswProof(n=params.n, t=t, w=params.w, phi=phi, tau=tau)


def verify(chi: int, params: PoswParams, t: int, proof: PoswProof, backend: RoBackend) -> VerifyResult:
    """Recompute the challenge from the commitment and check every ancestor
    label equation of every challenge leaf against the oracle."""
    if (proof.n, proof.t, proof.w) != (params.n, t, params.w):
        return VerifyResult(False, "malformed: parameter mismatch")
    if not 0 <= proof.phi < (1 << params.w):
        return VerifyResult(False, "malformed: commitment out of range")
    if len(proof.tau) != t:
        return VerifyResult(False, "malformed: wrong number of openings")
    challenge = derive_challenge(chi, proof.phi, t, params.n, backend)
    for i, v in enumerate(challenge):
        path = dag.authentication_path(v, params.n)
        opening = proof.tau[i]
        if len(opening) != 2 * params.n:
            return VerifyResult(False, f"malformed: opening {i} has wrong length")
        if any(not 0 <= l < (1 << params.w) for l in opening):
            return VerifyResult(False, f"malformed: opening {i} label out of range")
        labels = dict(zip(path, opening))
        labels[dag.ROOT] = proof.phi
        for u in dag.ancestors(v):
            needed = dag.in_neighbors(u, params.n)
            if any(x not in labels for x in needed):
                return VerifyResult(False, f"malformed: opening {i} misses labels at {u or 'root'}")
            expected = backend.label_query(chi, u, [labels[x] for x in needed])
            if labels[u] != expected:
                return VerifyResult(False, f"inconsistent at {u or 'root'}")
    return VerifyResult(True)


def serialize_proof(proof: PoswProof) -> bytes:
    nb = (proof.w + 7) // 8
    out = bytearray()
    out += MAGIC
    out += struct.pack(">BBHH", VERSION, proof.n, proof.t, proof.w)
    out += label_bytes(proof.phi, proof.w)
    for opening in proof.tau:
        if len(opening) != 2 * proof.n:
            raise ValueError("malformed proof: opening length")
        for label in opening:
            out += label_bytes(label, proof.w)
    return bytes(out)


def deserialize_proof(data: bytes) -> PoswProof:
    if len(data) < 10 or data[:4] != MAGIC:
        raise ValueError("not a proof file")
    version, n, t, w = struct.unpack(">BBHH", data[4:10])
    if version != VERSION:
        raise ValueError(f"unsupported proof version {version}")
    if n < 1 or t < 1 or not 8 <= w <= 512:
        raise ValueError("proof header out of range")
    nb = (w + 7) // 8
    expect = 10 + nb * (1 + t * 2 * n)
    if len(data) != expect:
        raise ValueError("proof length does not match header")
    pos = 10
    phi = label_from_bytes(data[pos : pos + nb], w)
    pos += nb
    tau = []
    for _ in range(t):
        opening = []
        for _ in range(2 * n):
            opening.append(label_from_bytes(data[pos : pos + nb], w))
            pos += nb
        tau.append(tuple(opening))
    return PoswProof(n=n, t=t, w=w, phi=phi, tau=tuple(tau))
