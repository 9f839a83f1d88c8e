"""Exact classical and quantum transition capacities on micro instances, the
multi-step bound, the recognizability bound evaluators, and numerical
verification of the capacity calculus.

The quantum capacity of a transition P -> P' at parallelism k is the maximum,
over query windows xs, dual response vectors yhats, and window exteriors D, of
the operator norm of (P'|_{D|xs}) Gamma(yhat_1) x ... x Gamma(yhat_k)
(P|_{D|xs}) on the (M+1)^k window space.  Everything here is enumerated
exhaustively; no sampling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .groups import transition_matrix
from .oracle import Database, OracleDomain
from .properties import DatabaseProperty

E = math.e
WINDOW_DIM_BUDGET = 4096
ENUMERATION_BUDGET = 1 << 22


@dataclass(frozen=True)
class CapacityQuery:
    """A one-round transition-capacity question: move from p to pprime with one
    k-parallel query, the query vector optionally restricted to x_restrict."""

    p: DatabaseProperty
    pprime: DatabaseProperty
    k: int
    domain: OracleDomain
    x_restrict: tuple | None = None

    def __post_init__(self):
        pool = self.domain.inputs if self.x_restrict is None else self.x_restrict
        if not 1 <= self.k <= len(pool):
            raise ValueError("parallelism must satisfy 1 <= k <= |X_restrict|")
        for x in pool:
            self.domain.index(x)

    def quantum(self) -> "CapacityReport":
        return quantum_capacity_exact(self.p, self.pprime, self.k, self.domain,
                                      self.x_restrict)

    def classical(self) -> "CapacityReport":
        return classical_capacity_exact(self.p, self.pprime, self.k, self.domain,
                                        self.x_restrict)


@dataclass
class CapacityReport:
    """Exact capacity value with its first maximizing witness and an optional
    closed-form comparison bound."""

    value: float
    witness: dict | None = None
    bound: float | None = None
    bound_source: str | None = None
    kind: str = "quantum"

    @property
    def holds(self) -> bool | None:
        if self.bound is None:
            return None
        return self.value <= self.bound + 1e-9

    def as_record(self) -> dict:
        rec = {"kind": self.kind, "value": self.value}
        if self.witness is not None:
            rec["witness"] = self.witness
        if self.bound is not None:
            rec["bound"] = self.bound
            rec["bound_clamped"] = min(self.bound, 1.0)
            rec["bound_source"] = self.bound_source
            rec["holds"] = self.holds
        return rec


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value via the Gram matrix, with a power-iteration fallback."""
    if a.size == 0:
        return 0.0
    gram = a.conj().T @ a
    try:
        eigs = np.linalg.eigvalsh(gram)
        return math.sqrt(max(float(eigs[-1]), 0.0))
    except np.linalg.LinAlgError:
        return math.sqrt(_power_iteration(gram))


def _power_iteration(gram: np.ndarray, tol: float = 1e-12, max_iter: int = 10000) -> float:
    v = np.ones(gram.shape[0], dtype=complex) / math.sqrt(gram.shape[0])
    last = 0.0
    for _ in range(max_iter):
        w = gram @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - last) <= tol * max(norm, 1.0):
            return float(norm)
        last = norm
    return float(last)


def _window_mask(p: DatabaseProperty, db: Database, xs: tuple) -> np.ndarray:
    """Boolean diagonal of p|_{D|xs} in the canonical mixed-radix window basis."""
    spec = db.domain.spec
    ext = spec.order + 1
    k = len(xs)
    mask = np.zeros(ext ** k, dtype=bool)
    for i, r in enumerate(itertools.product(range(ext), repeat=k)):
        mask[i] = p.holds(db.update(xs, r))
    return mask


def _check_window_budget(domain: OracleDomain, k: int, n_restrict: int) -> None:
    ext = domain.spec.order + 1
    if ext ** k > WINDOW_DIM_BUDGET:
        raise ValueError("window dimension exceeds the exact-computation budget")
    total = (
        math.perm(n_restrict, k)
        * (domain.spec.order ** k)
        * (ext ** (domain.size - k))
    )
    if total > ENUMERATION_BUDGET:
        raise ValueError("capacity enumeration exceeds the budget")


def window_exteriors(domain: OracleDomain, xs: tuple):
    """All databases canonicalized to undefined on the window, enumerated in
    canonical value order on the remaining inputs."""
    others = [x for x in domain.inputs if x not in xs]
    ext = range(domain.spec.order + 1)
    for values in itertools.product(ext, repeat=len(others)):
        yield Database.from_entries(domain, dict(zip(others, values)))


def quantum_capacity_exact(p: DatabaseProperty, pprime: DatabaseProperty, k: int,
                           domain: OracleDomain, x_restrict=None) -> CapacityReport:
    """Exact one-round quantum transition capacity by full enumeration.

    Returns the maximum operator norm together with the lexicographically first
    witness (xs, yhats, exterior database) attaining it.
    """
    spec = domain.spec
    pool = tuple(domain.inputs if x_restrict is None else x_restrict)
    for x in pool:
        domain.index(x)
    if k < 1 or k > len(pool):
        raise ValueError("parallelism must satisfy 1 <= k <= |X_restrict|")
    _check_window_budget(domain, k, len(pool))

    gammas: dict = {}

    def gamma_kron(yhats: tuple) -> np.ndarray:
        if yhats not in gammas:
            mats = [np.asarray(transition_matrix(spec, yh)) for yh in yhats]
            gammas[yhats] = reduce(np.kron, mats)
        return gammas[yhats]

    best = 0.0
    best_key = None
    best_witness = None
    for xi, xs in enumerate(itertools.permutations(pool, k)):
        for db in window_exteriors(domain, xs):
            in_mask = _window_mask(p, db, xs)
            out_mask = _window_mask(pprime, db, xs)
            if not in_mask.any() or not out_mask.any():
                continue
            for yhats in itertools.product(range(spec.order), repeat=k):
                block = gamma_kron(yhats)[np.ix_(out_mask, in_mask)]
                value = operator_norm(block)
                key = (xi, yhats, db.values)
                if value > best + 1e-12 or (value > best - 1e-12 and (best_key is None or key < best_key)):
                    if value > best:
                        best = value
                    best_key = key
                    best_witness = {
                        "xs": list(xs),
                        "yhats": list(yhats),
                        "database": sorted(db.entries().items(), key=lambda kv: domain.index(kv[0])),
                    }
    return CapacityReport(value=best, witness=best_witness, kind="quantum")


def classical_capacity_exact(p: DatabaseProperty, pprime: DatabaseProperty, k: int,
                             domain: OracleDomain, x_restrict=None) -> CapacityReport:
    """Exact one-round classical transition capacity.

    Maximizes, over databases satisfying p and distinct query vectors, the
    probability that uniformly resampling the window's fresh coordinates lands
    in pprime (already-defined coordinates keep their values).
    """
    spec = domain.spec
    pool = tuple(domain.inputs if x_restrict is None else x_restrict)
    for x in pool:
        domain.index(x)
    if k < 1 or k > len(pool):
        raise ValueError("parallelism must satisfy 1 <= k <= |X_restrict|")
    total = ((spec.order + 1) ** domain.size) * math.perm(len(pool), k) * (spec.order ** k)
    if total > ENUMERATION_BUDGET:
        raise ValueError("capacity enumeration exceeds the budget")
    ext = range(spec.order + 1)
    best = 0.0
    best_witness = None
    for values in itertools.product(ext, repeat=domain.size):
        db = Database(domain, values)
        if not p.holds(db):
            continue
        for xs in itertools.permutations(pool, k):
            fresh = [x for x in xs if not db.defined(x)]
            hits = 0
            for draw in itertools.product(spec.elements(), repeat=len(fresh)):
                if pprime.holds(db.update(fresh, draw)):
                    hits += 1
            prob = hits / (spec.order ** len(fresh))
            if prob > best + 1e-15:
                best = prob
                best_witness = {
                    "xs": list(xs),
                    "database": sorted(db.entries().items(), key=lambda kv: domain.index(kv[0])),
                }
    return CapacityReport(value=best, witness=best_witness, kind="classical")


def multi_step_bound(step_capacities) -> float:
    """The multi-round capacity bound: the sum of per-round capacities."""
    total = 0.0
    for c in step_capacities:
        if c < 0:
            raise ValueError("capacities are nonnegative")
        total += c
    return total


def _one_local_weight(lp) -> float:
    """P[U in L] under the strong-recognizability convention: trivial members
    (constant true or false) weigh zero."""
    if lp.locality > 1 and not lp.is_trivial:
        raise ValueError(f"{lp.name} is not 1-local")
    if lp.is_trivial:
        return 0.0
    return lp.uniform_probability()


def bound_thm_simple(families) -> float:
    """Strong-recognizability bound for 1-local families:
    max over families of sqrt(10 * sum_i P[U in L_i]), trivial members counting 0."""
    best = 0.0
    for fam in families:
        total = sum(_one_local_weight(lp) for lp in fam)
        best = max(best, math.sqrt(10.0 * total))
    return best


def bound_thm_tricky(families) -> float:
    """Weak-recognizability bound for 1-local families:
    max over families of e * sum_i sqrt(10 * P[U in L_i])."""
    best = 0.0
    for fam in families:
        total = 0.0
        for lp in fam:
            if lp.locality > 1:
                raise ValueError(f"{lp.name} is not 1-local")
            weight = 1.0 if (lp.is_constant_true and lp.locality == 0) else (
                lp.uniform_probability() if lp.locality == 1 else 0.0
            )
            total += math.sqrt(10.0 * weight)
        best = max(best, E * total)
    return best


def bound_thm_general(families) -> float:
    """Strong-recognizability bound for general l-local families:
    max over families of e*l*sqrt(10 * sum_t max_{x in Supp} max_{D'} P[U in L_t|_{D'|^x}]),
    restrictions that are trivial counting 0."""
    best = 0.0
    for fam in families:
        ell = fam.max_locality
        if ell == 0:
            continue
        total = 0.0
        for lp in fam:
            if lp.is_trivial:
                continue
            spec = lp.spec
            ext = range(spec.order + 1)
            worst = 0.0
            for x in lp.support:
                others = [s for s in lp.support if s != x]
                for values in itertools.product(ext, repeat=len(others)):
                    restricted = lp.restrict_at(x, dict(zip(others, values)))
                    if len(restricted) in (0, spec.order + 1):
                        continue  # trivial restriction convention
                    weight = sum(1 for v in restricted if v != spec.bot) / spec.order
                    worst = max(worst, weight)
            total += worst
        best = max(best, E * ell * math.sqrt(10.0 * total))
    return best


# Capacity calculus verification


@dataclass
class CalculusCheck:
    rule: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9

    def as_record(self) -> dict:
        return {"rule": self.rule, "lhs": self.lhs, "rhs": self.rhs,
                "slack": self.slack, "holds": self.holds}


class _CapacityCache:
    def __init__(self, domain: OracleDomain):
        self.domain = domain
        self._cache: dict = {}

    def __call__(self, p: DatabaseProperty, pprime: DatabaseProperty, k: int, x_restrict=None) -> float:
        key = (p.name, pprime.name, k, tuple(x_restrict) if x_restrict is not None else None)
        if key not in self._cache:
            self._cache[key] = quantum_capacity_exact(p, pprime, k, self.domain, x_restrict).value
        return self._cache[key]


def verify_calculus(p: DatabaseProperty, pprime: DatabaseProperty, q: DatabaseProperty,
                    k: int, k_split: tuple, x_split: tuple, domain: OracleDomain,
                    psecond: DatabaseProperty | None = None) -> list:
    """Compute every capacity on both sides of the calculus inequalities exactly
    and report lhs/rhs/slack per rule.

    k_split is (k', k'') with k' + k'' = k; x_split is (X', X'') with X' u X''
    covering the inputs used.  psecond defaults to pprime.
    """
    if psecond is None:
        psecond = pprime
    k1, k2 = k_split
    if k1 + k2 != k or k1 < 1 or k2 < 1:
        raise ValueError("k_split must be two positive parts summing to k")
    xs1, xs2 = tuple(x_split[0]), tuple(x_split[1])
    xall = tuple(dict.fromkeys(xs1 + xs2))
    cap = _CapacityCache(domain)
    checks = []

    # Intersection and union rules.
    both = cap(p & q, pprime, k, xall)
    cp = cap(p, pprime, k, xall)
    cq = cap(q, pprime, k, xall)
    cunion = cap(p | q, pprime, k, xall)
    checks.append(CalculusCheck("shrink-intersection", both, min(cp, cq)))
    checks.append(CalculusCheck("shrink-union-lower", max(cp, cq), cunion))
    checks.append(CalculusCheck("shrink-union-upper", cunion, cp + cq))

    # Monotonicity under containment, on the guaranteed containment p <= p|q.
    checks.append(CalculusCheck("subset-monotone", cp, cap(p | q, pprime, k, xall)))
    checks.append(CalculusCheck("subset-monotone-mirrored", cap(pprime, p, k, xall),
                                cap(pprime, p | q, k, xall)))

    # Symmetry (exact equality, both directions of the inequality).
    fwd = cap(p, pprime, k, xall)
    bwd = cap(pprime, p, k, xall)
    checks.append(CalculusCheck("symmetry-forward", fwd, bwd))
    checks.append(CalculusCheck("symmetry-backward", bwd, fwd))

    # Parallel conditioning, single-split forms.
    lhs1 = cap(p, psecond, k, xall)
    checks.append(CalculusCheck(
        "split-target", lhs1,
        cap(p, psecond - q, k, xall) + cap(p, q & psecond, k, xall)))
    lhs2 = cap(p, q & psecond, k, xall)
    checks.append(CalculusCheck(
        "split-arity", lhs2,
        cap(p, ~q, k1, xall) + cap(p, q & pprime, k1, xall) + cap(q - pprime, q & psecond, k2, xall)))
    checks.append(CalculusCheck(
        "split-inputs", lhs2,
        cap(p, ~q, k, xs1) + cap(p, q & pprime, k, xs1) + cap(q - pprime, q & psecond, k, xs2)))

    # Recursive parallel conditioning with h = 2 stages; not-p0 = p & q
    # guarantees the containment the recursion needs.
    not_p0 = p & q
    p1, p2 = pprime, pprime | psecond
    lhs3 = cap(not_p0, p2, k, xall)
    checks.append(CalculusCheck(
        "parallel-conditioning-arity", lhs3,
        cap(not_p0, ~q, k1, xall) + cap(not_p0, ~q, k, xall)
        + cap(q - (~not_p0), q & p1, k1, xall) + cap(q - p1, q & p2, k2, xall)))
    checks.append(CalculusCheck(
        "parallel-conditioning-inputs", lhs3,
        cap(not_p0, ~q, k, xs1) + cap(not_p0, ~q, k, xall)
        + cap(q - (~not_p0), q & p1, k, xs1) + cap(q - p1, q & p2, k, xs2)))
    return checks
