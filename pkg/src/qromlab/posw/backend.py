"""Random-oracle backends for the sequential-work protocol.

Labels, statements, and commitments are w-bit values handled as ints.  Oracle
inputs are framed byte strings: a label query is tagged 0x00 and carries the
statement, a length-prefixed vertex, and the in-neighbor labels in order; a
challenge query is tagged 0x01 and carries the statement, the commitment, and
a 32-bit block counter.  The table backend samples lazily and exposes its
database for the security-analysis lemmas; the crypto backend derives labels
from SHA-256 in counter mode and exposes nothing.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

LABEL_TAG = b"\x00"
CHALLENGE_TAG = b"\x01"


def label_bytes(value: int, w: int) -> bytes:
    if not 0 <= value < (1 << w):
        raise ValueError(f"label {value} does not fit in {w} bits")
    return value.to_bytes((w + 7) // 8, "big")


def label_from_bytes(data: bytes, w: int) -> int:
    if len(data) != (w + 7) // 8:
        raise ValueError("label has the wrong byte length")
    value = int.from_bytes(data, "big")
    if value >> w:
        raise ValueError(f"label bytes exceed {w} bits")
    return value


def encode_vertex(v: str) -> bytes:
    if len(v) > 255:
        raise ValueError("vertex too deep to encode")
    packed = int(v, 2).to_bytes((len(v) + 7) // 8, "big") if v else b""
    return bytes([len(v)]) + packed


def decode_vertex(data: bytes) -> tuple:
    """Parse a length-prefixed vertex; returns (vertex, bytes consumed)."""
    if not data:
        raise ValueError("empty vertex encoding")
    depth = data[0]
    nbytes = (depth + 7) // 8
    if len(data) < 1 + nbytes:
        raise ValueError("truncated vertex encoding")
    if depth == 0:
        return "", 1
    value = int.from_bytes(data[1 : 1 + nbytes], "big")
    if value >> depth:
        raise ValueError("vertex padding bits must be zero")
    return format(value, f"0{depth}b"), 1 + nbytes


def label_payload(chi: int, v: str, in_labels, w: int) -> bytes:
    body = b"".join(label_bytes(l, w) for l in in_labels)
    return LABEL_TAG + label_bytes(chi, w) + encode_vertex(v) + body


def challenge_payload(chi: int, phi: int, counter: int, w: int) -> bytes:
    return CHALLENGE_TAG + label_bytes(chi, w) + label_bytes(phi, w) + counter.to_bytes(4, "big")


def parse_label_payload(payload: bytes, w: int):
    """Inverse of label_payload: (chi, vertex, labels) or None if not label-framed."""
    nb = (w + 7) // 8
    if len(payload) < 1 + nb + 1 or payload[:1] != LABEL_TAG:
        return None
    try:
        chi = label_from_bytes(payload[1 : 1 + nb], w)
        v, used = decode_vertex(payload[1 + nb :])
        rest = payload[1 + nb + used :]
        if len(rest) % nb:
            return None
        labels = tuple(
            label_from_bytes(rest[i : i + nb], w) for i in range(0, len(rest), nb)
        )
    except ValueError:
        return None
    return chi, v, labels


def parse_challenge_payload(payload: bytes, w: int):
    nb = (w + 7) // 8
    if len(payload) != 1 + 2 * nb + 4 or payload[:1] != CHALLENGE_TAG:
        return None
    try:
        chi = label_from_bytes(payload[1 : 1 + nb], w)
        phi = label_from_bytes(payload[1 + nb : 1 + 2 * nb], w)
    except ValueError:
        return None
    counter = int.from_bytes(payload[1 + 2 * nb :], "big")
    return chi, phi, counter


@dataclass
class TraceEntry:
    kind: str  # "label" | "challenge"
    vertex: str | None
    payload: bytes
    fresh: bool
    invocations: int = 1


class RoBackend:
    """Shared query plumbing: framing, the query trace, and w-bit outputs."""

    def __init__(self, w: int):
        if not 8 <= w <= 512:
            raise ValueError("label width must be between 8 and 512 bits")
        self.w = w
        self.trace: list = []

    def _evaluate(self, payload: bytes) -> tuple:
        raise NotImplementedError

    def label_query(self, chi: int, v: str, in_labels) -> int:
        payload = label_payload(chi, v, in_labels, self.w)
        value, fresh = self._evaluate(payload)
        self.trace.append(TraceEntry("label", v, payload, fresh))
        return value

    def challenge_query(self, chi: int, phi: int, bits_needed: int) -> str:
        """Counter-extended challenge output, one logical query in the trace."""
        blocks = []
        counter = 0
        first_payload = None
        any_fresh = False
        while len(blocks) * self.w < bits_needed:
            payload = challenge_payload(chi, phi, counter, self.w)
            if first_payload is None:
                first_payload = payload
            value, fresh = self._evaluate(payload)
            any_fresh = any_fresh or fresh
            blocks.append(format(value, f"0{self.w}b"))
            counter += 1
        self.trace.append(TraceEntry("challenge", None, first_payload, any_fresh, invocations=counter))
        return "".join(blocks)[:bits_needed]

    def reset_trace(self) -> None:
        self.trace = []


class TableBackend(RoBackend):
    """Lazily sampled random oracle keeping the full query database."""

    def __init__(self, w: int, seed: int = 0):
        super().__init__(w)
        self._rng = random.Random(seed)
        self._db: dict = {}

    def _evaluate(self, payload: bytes) -> tuple:
        if payload in self._db:
            return self._db[payload], False
        value = self._rng.getrandbits(self.w)
        self._db[payload] = value
        return value, True

    def database(self) -> dict:
        """Snapshot of the lazily sampled database, payload -> w-bit value."""
        return dict(self._db)

    def preload(self, entries: dict) -> None:
        """Install database entries directly (for analysis harnesses)."""
        self._db.update(entries)


class CryptoBackend(RoBackend):
    """Deterministic SHA-256-based oracle, expanded in counter mode to w bits."""

    def __init__(self, w: int, key: bytes = b""):
        super().__init__(w)
        self.key = key
        self._seen: set = set()

    def _evaluate(self, payload: bytes) -> tuple:
        stream = b""
        block = 0
        while 8 * len(stream) < self.w:
            stream += hashlib.sha256(self.key + payload + block.to_bytes(4, "big")).digest()
            block += 1
        value = int.from_bytes(stream, "big") >> (8 * len(stream) - self.w)
        fresh = payload not in self._seen
        self._seen.add(payload)
        return value, fresh
