"""Exact state-vector simulation of the purified and the compressed random oracle.

The joint state of oracle and adversary is a complex tensor with one axis per
oracle input (dimension M for the purified oracle, M+1 for the compressed one,
index M encoding "not yet defined") followed by one axis per adversary
register.  Everything is exact linear algebra at desk scale; queries are the
unitaries built from the single-register transition matrix.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass

import numpy as np

from .groups import GroupSpec, comp_matrix, dual_transform, transition_matrix

DEFAULT_BUDGET = 1 << 24
PRUNE_TOL = 1e-14


def amplitude_budget() -> int:
    """Maximum joint-state size, overridable via QROMLAB_BUDGET."""
    return int(os.environ.get("QROMLAB_BUDGET", DEFAULT_BUDGET))


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleDomain:
    """Finite ordered input set X together with the range group."""

    inputs: tuple
    spec: GroupSpec

    def __post_init__(self):
        if len(self.inputs) == 0:
            raise ValueError("oracle domain must contain at least one input")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError("oracle domain inputs must be distinct")

    @classmethod
    def of_bit_inputs(cls, n: int, spec: GroupSpec) -> "OracleDomain":
        """Domain whose inputs are the 2^n bit strings of length n."""
        return cls(tuple(format(i, f"0{n}b") for i in range(1 << n)), spec)

    @property
    def size(self) -> int:
        return len(self.inputs)

    def index(self, x) -> int:
        try:
            return self.inputs.index(x)
        except ValueError:
            raise KeyError(f"input {x!r} not in oracle domain") from None


@dataclass(frozen=True)
class Database:
    """Partial function X -> Y, with index M = spec.bot marking undefined."""

    domain: OracleDomain
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.domain.size:
            raise ValueError("database values must cover the whole domain")
        for v in self.values:
            self.domain.spec.check_extended(v)

    @classmethod
    def empty(cls, domain: OracleDomain) -> "Database":
        return cls(domain, (domain.spec.bot,) * domain.size)

    @classmethod
    def from_entries(cls, domain: OracleDomain, entries: dict) -> "Database":
        values = [domain.spec.bot] * domain.size
        for x, y in entries.items():
            values[domain.index(x)] = y
        return cls(domain, tuple(values))

    def value(self, x):
        return self.values[self.domain.index(x)]

    def defined(self, x) -> bool:
        return self.value(x) != self.domain.spec.bot

    def support(self) -> tuple:
        bot = self.domain.spec.bot
        return tuple(x for x, v in zip(self.domain.inputs, self.values) if v != bot)

    def support_size(self) -> int:
        bot = self.domain.spec.bot
        return sum(1 for v in self.values if v != bot)

    def entries(self) -> dict:
        bot = self.domain.spec.bot
        return {x: v for x, v in zip(self.domain.inputs, self.values) if v != bot}

    def update(self, xs, rs) -> "Database":
        """D[xs -> rs]; redefining an already-set point is allowed."""
        values = list(self.values)
        for x, r in zip(xs, rs):
            self.domain.spec.check_extended(r)
            values[self.domain.index(x)] = r
        return Database(self.domain, tuple(values))


def sparse_encode(db: Database) -> list:
    """Defined entries as (x, y) pairs in domain order."""
    return sorted(db.entries().items(), key=lambda kv: db.domain.index(kv[0]))


def sparse_decode(domain: OracleDomain, pairs) -> Database:
    return Database.from_entries(domain, dict(pairs))


def _check_budget(dims) -> None:
    budget = amplitude_budget()
    total = 1
    for d in dims:
        total *= d
    if total > budget:
        raise BudgetExceeded(f"state of {total} amplitudes exceeds budget {budget}")


def _apply_axis(vec: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(mat, vec, axes=([1], [axis])), 0, axis)


def _fixed_index(ndim: int, fixed: dict):
    return tuple(fixed.get(a, slice(None)) for a in range(ndim))


def _local_axis(axis: int, fixed: dict) -> int:
    return axis - sum(1 for a in fixed if a < axis)


class _JointState:
    """Shared tensor plumbing for the two oracle pictures."""

    oracle_dim: int

    def __init__(self, domain: OracleDomain, reg_dims, vec: np.ndarray):
        self.domain = domain
        self.reg_dims = tuple(reg_dims)
        self.vec = vec

    @property
    def n_oracle(self) -> int:
        return self.domain.size

    def reg_axis(self, reg: int) -> int:
        return self.n_oracle + reg

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec.ravel()))

    def copy(self):
        return type(self)(self.domain, self.reg_dims, self.vec.copy())

    def prune(self) -> None:
        self.vec[np.abs(self.vec) < PRUNE_TOL] = 0.0

    def apply_register_unitary(self, mat: np.ndarray, regs) -> None:
        """Apply a unitary to the joint space of the given adversary registers."""
        regs = tuple(regs)
        dim = 1
        for r in regs:
            dim *= self.reg_dims[r]
        if mat.shape != (dim, dim):
            raise ValueError(f"gate of shape {mat.shape} does not fit registers {regs}")
        axes = [self.reg_axis(r) for r in regs]
        moved = np.moveaxis(self.vec, axes, range(self.vec.ndim - len(axes), self.vec.ndim))
        shape = moved.shape
        flat = moved.reshape(shape[: self.vec.ndim - len(axes)] + (dim,))
        flat = np.tensordot(flat, mat.T, axes=([flat.ndim - 1], [0]))
        moved = flat.reshape(shape)
        self.vec = np.moveaxis(moved, range(self.vec.ndim - len(axes), self.vec.ndim), axes)

    def apply_phase_flip(self, regs, predicate) -> None:
        """Multiply by -1 every basis branch whose register values satisfy predicate."""
        regs = tuple(regs)
        dims = [self.reg_dims[r] for r in regs]
        for values in itertools.product(*(range(d) for d in dims)):
            if predicate(*values):
                idx = _fixed_index(self.vec.ndim, {self.reg_axis(r): v for r, v in zip(regs, values)})
                self.vec[idx] *= -1.0

    def adversary_marginal(self) -> np.ndarray:
        """Probability over joint adversary basis states (oracle traced out)."""
        probs = np.abs(self.vec) ** 2
        return probs.sum(axis=tuple(range(self.n_oracle))).ravel()

    def register_distribution(self, regs) -> dict:
        """Probability over the basis values of selected adversary registers."""
        probs = np.abs(self.vec) ** 2
        keep = [self.reg_axis(r) for r in regs]
        drop = tuple(a for a in range(self.vec.ndim) if a not in keep)
        marg = probs.sum(axis=drop)
        remaining = sorted(keep)
        order = [remaining.index(a) for a in keep]
        marg = np.transpose(marg, order) if marg.ndim > 1 else marg
        out = {}
        for values in np.ndindex(marg.shape):
            p = float(marg[values])
            if p > 0.0:
                out[values] = p
        return out


class PurifiedState(_JointState):
    """Joint state over full function tables H: X -> Y plus adversary registers."""


class CompressedState(_JointState):
    """Joint state over databases X -> Y u {bot} plus adversary registers."""

    def database_distribution(self) -> dict:
        probs = np.abs(self.vec) ** 2
        marg = probs.reshape(probs.shape[: self.n_oracle] + (-1,)).sum(axis=-1)
        out = {}
        for values in np.ndindex(marg.shape):
            p = float(marg[values])
            if p > 0.0:
                out[Database(self.domain, values)] = p
        return out

    def nonzero_databases(self):
        marg = (np.abs(self.vec) ** 2).reshape(self.vec.shape[: self.n_oracle] + (-1,)).sum(axis=-1)
        for values in np.ndindex(marg.shape):
            if marg[values] > 0.0:
                yield Database(self.domain, values)

    def max_support_size(self) -> int:
        return max((db.support_size() for db in self.nonzero_databases()), default=0)


def initial_compressed_state(domain: OracleDomain, reg_dims=(1,)) -> CompressedState:
    """All-bot database joint with adversary basis state 0."""
    reg_dims = (reg_dims,) if isinstance(reg_dims, int) else tuple(reg_dims)
    m = domain.spec.order
    dims = (m + 1,) * domain.size + reg_dims
    _check_budget(dims)
    vec = np.zeros(dims, dtype=complex)
    vec[(m,) * domain.size + (0,) * len(reg_dims)] = 1.0
    return CompressedState(domain, reg_dims, vec)


def initial_purified_state(domain: OracleDomain, reg_dims=(1,)) -> PurifiedState:
    """Uniform superposition over all functions H, adversary at basis state 0."""
    reg_dims = (reg_dims,) if isinstance(reg_dims, int) else tuple(reg_dims)
    m = domain.spec.order
    dims = (m,) * domain.size + reg_dims
    _check_budget(dims)
    vec = np.zeros(dims, dtype=complex)
    oracle = np.full((m,) * domain.size, m ** (-domain.size / 2.0), dtype=complex)
    vec[(Ellipsis,) + (0,) * len(reg_dims)] = oracle
    return PurifiedState(domain, reg_dims, vec)


def comp(state: PurifiedState) -> CompressedState:
    """Compression isometry: embed into the database space and swap the
    neutral Fourier component with bot on every register."""
    m = state.domain.spec.order
    dims = (m + 1,) * state.n_oracle + state.reg_dims
    _check_budget(dims)
    vec = np.zeros(dims, dtype=complex)
    vec[(slice(0, m),) * state.n_oracle] = state.vec
    cm = comp_matrix(state.domain.spec)
    for axis in range(state.n_oracle):
        vec = _apply_axis(vec, cm, axis)
    return CompressedState(state.domain, state.reg_dims, vec)


def comp_dagger(state: CompressedState) -> PurifiedState:
    """Adjoint of the compression isometry (projects off any residual bot)."""
    cm = comp_matrix(state.domain.spec)
    vec = state.vec
    for axis in range(state.n_oracle):
        vec = _apply_axis(vec, cm, axis)
    m = state.domain.spec.order
    vec = vec[(slice(0, m),) * state.n_oracle]
    return PurifiedState(state.domain, state.reg_dims, np.ascontiguousarray(vec))


def _compressed_query_coord(state: CompressedState, out_reg: int, x_label=None, in_reg=None) -> None:
    """One coordinate of a parallel query against the compressed oracle."""
    spec = state.domain.spec
    m = spec.order
    if state.reg_dims[out_reg] != m:
        raise ValueError("response register must be group-valued")
    w = dual_transform(spec)
    out_axis = state.reg_axis(out_reg)
    state.vec = _apply_axis(state.vec, w, out_axis)
    if in_reg is None:
        targets = [(None, state.domain.index(x_label))]
    else:
        if state.reg_dims[in_reg] != state.domain.size:
            raise ValueError("query input register must have one level per domain input")
        targets = [(xv, xv) for xv in range(state.domain.size)]
    in_axis = None if in_reg is None else state.reg_axis(in_reg)
    for xv, oracle_axis in targets:
        for yhat in range(1, m):
            fixed = {out_axis: yhat}
            if in_axis is not None:
                fixed[in_axis] = xv
            idx = _fixed_index(state.vec.ndim, fixed)
            sub = state.vec[idx]
            local = _local_axis(oracle_axis, fixed)
            state.vec[idx] = _apply_axis(sub, np.asarray(transition_matrix(spec, yhat)), local)
    state.vec = _apply_axis(state.vec, np.conj(w.T), out_axis)


def _standard_query_coord(state: PurifiedState, out_reg: int, x_label=None, in_reg=None) -> None:
    """One coordinate of a parallel query against the purified standard oracle."""
    spec = state.domain.spec
    m = spec.order
    if state.reg_dims[out_reg] != m:
        raise ValueError("response register must be group-valued")
    out_axis = state.reg_axis(out_reg)
    if in_reg is None:
        targets = [(None, state.domain.index(x_label))]
    else:
        if state.reg_dims[in_reg] != state.domain.size:
            raise ValueError("query input register must have one level per domain input")
        targets = [(xv, xv) for xv in range(state.domain.size)]
    in_axis = None if in_reg is None else state.reg_axis(in_reg)
    for xv, oracle_axis in targets:
        for h in range(m):
            fixed = {oracle_axis: h}
            if in_axis is not None:
                fixed[in_axis] = xv
            idx = _fixed_index(state.vec.ndim, fixed)
            sub = state.vec[idx]
            local = _local_axis(out_axis, fixed)
            src = [spec.add(y, spec.neg(h)) for y in range(m)]
            state.vec[idx] = np.take(sub, src, axis=local)


def _check_distinct(xs) -> None:
    if len(set(xs)) != len(xs):
        raise ValueError("parallel query inputs must be pairwise distinct")


def apply_parallel_query(state: CompressedState, xs, out_regs) -> CompressedState:
    """Apply cO on the k pairwise-distinct inputs xs, with responses wired to
    the given group-valued adversary registers.  Returns a new state."""
    xs = tuple(xs)
    _check_distinct(xs)
    if len(xs) != len(tuple(out_regs)):
        raise ValueError("one response register per queried input is required")
    new = state.copy()
    for x, reg in zip(xs, out_regs):
        _compressed_query_coord(new, reg, x_label=x)
    new.prune()
    return new


def apply_standard_query(state: PurifiedState, xs, out_regs) -> PurifiedState:
    """Apply the standard oracle O on inputs xs (computational-basis group
    addition into the response registers).  Returns a new state."""
    xs = tuple(xs)
    _check_distinct(xs)
    new = state.copy()
    for x, reg in zip(xs, out_regs):
        _standard_query_coord(new, reg, x_label=x)
    return new


# Adversary circuits


@dataclass(frozen=True)
class GateStep:
    matrix: np.ndarray
    regs: tuple


@dataclass(frozen=True)
class NamedGateStep:
    name: str  # fourier | prepare_uniform | prepare_dual | reflect_mean
    regs: tuple
    param: int = 0


@dataclass(frozen=True)
class PhaseFlipStep:
    regs: tuple
    predicate: object


@dataclass(frozen=True)
class QueryStep:
    out_regs: tuple
    xs: tuple | None = None      # classical query vector, or
    in_regs: tuple | None = None  # registers holding the query inputs


@dataclass(frozen=True)
class AdversaryCircuit:
    """A fixed-arity parallel-query oracle circuit.

    reg_dims lists the adversary registers; query steps must all have the same
    arity k.  output_regs name the registers measured as the final x-output.
    """

    domain: OracleDomain
    reg_dims: tuple
    steps: tuple
    output_regs: tuple = ()
    y_output_regs: tuple | None = None

    def __post_init__(self):
        arities = {len(s.out_regs) for s in self.steps if isinstance(s, QueryStep)}
        if len(arities) > 1:
            raise ValueError("query arity k must be constant across rounds")
        for s in self.steps:
            if isinstance(s, QueryStep) and s.xs is not None:
                _check_distinct(s.xs)

    @property
    def k(self) -> int:
        for s in self.steps:
            if isinstance(s, QueryStep):
                return len(s.out_regs)
        return 0

    @property
    def rounds(self) -> int:
        return sum(1 for s in self.steps if isinstance(s, QueryStep))


def unitary_with_first_column(col: np.ndarray) -> np.ndarray:
    """Deterministic unitary completion of a unit column vector."""
    dim = len(col)
    basis = [np.asarray(col, dtype=complex)]
    for i in range(dim):
        v = np.zeros(dim, dtype=complex)
        v[i] = 1.0
        for b in basis:
            v = v - np.vdot(b, v) * b
        n = np.linalg.norm(v)
        if n > 1e-9:
            basis.append(v / n)
        if len(basis) == dim:
            break
    return np.stack(basis, axis=1)


def named_gate_matrix(name: str, dims, spec: GroupSpec, param: int = 0) -> np.ndarray:
    dim = 1
    for d in dims:
        dim *= d
    if name == "fourier":
        if dims != (spec.order,):
            raise ValueError("fourier gate acts on a single group register")
        return dual_transform(spec)
    if name == "prepare_uniform":
        return unitary_with_first_column(np.full(dim, 1.0 / math.sqrt(dim), dtype=complex))
    if name == "prepare_dual":
        if dims != (spec.order,):
            raise ValueError("prepare_dual acts on a single group register")
        from .groups import character_row

        col = np.conj(character_row(spec, param)) / math.sqrt(spec.order)
        return unitary_with_first_column(col)
    if name == "reflect_mean":
        u = np.full((dim, dim), 2.0 / dim, dtype=complex)
        return u - np.eye(dim)
    raise ValueError(f"unknown named gate {name!r}")


def _run_steps(state: _JointState, circuit: AdversaryCircuit, compressed: bool) -> _JointState:
    for step in circuit.steps:
        if isinstance(step, GateStep):
            state.apply_register_unitary(np.asarray(step.matrix, dtype=complex), step.regs)
        elif isinstance(step, NamedGateStep):
            dims = tuple(circuit.reg_dims[r] for r in step.regs)
            state.apply_register_unitary(named_gate_matrix(step.name, dims, circuit.domain.spec, step.param), step.regs)
        elif isinstance(step, PhaseFlipStep):
            state.apply_phase_flip(step.regs, step.predicate)
        elif isinstance(step, QueryStep):
            coords = step.xs if step.xs is not None else [None] * len(step.out_regs)
            in_regs = step.in_regs if step.in_regs is not None else [None] * len(step.out_regs)
            for x, in_reg, out_reg in zip(coords, in_regs, step.out_regs):
                if compressed:
                    _compressed_query_coord(state, out_reg, x_label=x, in_reg=in_reg)
                else:
                    _standard_query_coord(state, out_reg, x_label=x, in_reg=in_reg)
            state.prune()
        else:
            raise TypeError(f"unknown circuit step {step!r}")
    return state


def run_adversary(circuit: AdversaryCircuit, oracle: str = "compressed"):
    """Run the circuit against the chosen oracle and return the final state."""
    if oracle == "compressed":
        state: _JointState = initial_compressed_state(circuit.domain, circuit.reg_dims)
    elif oracle == "standard":
        state = initial_purified_state(circuit.domain, circuit.reg_dims)
    else:
        raise ValueError("oracle must be 'compressed' or 'standard'")
    return _run_steps(state, circuit, compressed=(oracle == "compressed"))


def measure_database(state: CompressedState) -> dict:
    """Born distribution over databases of the compressed-oracle register."""
    return state.database_distribution()


def adversary_output_distribution(state: _JointState, regs) -> dict:
    return state.register_distribution(regs)


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def zhandry_gap_check(p: float, p_prime: float, ell: int, m: int) -> bool:
    """sqrt(p) <= sqrt(p') + sqrt(ell/M), with a 1e-12 slack."""
    if not (0.0 <= p <= 1.0 and 0.0 <= p_prime <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    return math.sqrt(p) <= math.sqrt(p_prime) + math.sqrt(ell / m) + 1e-12


def relation_probabilities(circuit: AdversaryCircuit, relation, claimed=None):
    """Exact (p, p') for the gap statement of the compressed-oracle link.

    The adversary outputs the inputs x read from circuit.output_regs, plus
    either explicit response outputs (y_output_regs) or a claimed response
    vector computed from x.  p is the probability, against the purified
    standard oracle, that the true hashes match the output responses and the
    relation holds; p' is the same against the compressed oracle with the
    responses compared to the measured database.
    """
    if not circuit.output_regs:
        raise ValueError("circuit must designate x output registers")
    if claimed is None and circuit.y_output_regs is None:
        raise ValueError("either claimed responses or y output registers are required")

    def outputs(values, state):
        xs = tuple(values[state.reg_axis(r) - state.n_oracle] for r in circuit.output_regs)
        labels = tuple(circuit.domain.inputs[x] for x in xs)
        if circuit.y_output_regs is not None:
            ys = tuple(values[state.reg_axis(r) - state.n_oracle] for r in circuit.y_output_regs)
        else:
            ys = tuple(claimed(labels))
        return xs, labels, ys

    std = run_adversary(circuit, "standard")
    p = 0.0
    for index in np.ndindex(std.vec.shape):
        amp = std.vec[index]
        if amp == 0.0:
            continue
        xs, labels, ys = outputs(index[std.n_oracle:], std)
        if all(index[x] == y for x, y in zip(xs, ys)) and relation(labels, ys):
            p += abs(amp) ** 2

    cmp_state = run_adversary(circuit, "compressed")
    p_prime = 0.0
    for index in np.ndindex(cmp_state.vec.shape):
        amp = cmp_state.vec[index]
        if amp == 0.0:
            continue
        xs, labels, ys = outputs(index[cmp_state.n_oracle:], cmp_state)
        if all(index[x] == y for x, y in zip(xs, ys)) and relation(labels, ys):
            p_prime += abs(amp) ** 2
    return p, p_prime


def run_adversary_fixed_function(circuit: AdversaryCircuit, table) -> PurifiedState:
    """Run the circuit against a fixed (classical) oracle function.

    table maps each domain input to a range value; the oracle register starts
    in the corresponding basis state instead of the uniform superposition."""
    m = circuit.domain.spec.order
    reg_dims = circuit.reg_dims
    dims = (m,) * circuit.domain.size + reg_dims
    _check_budget(dims)
    vec = np.zeros(dims, dtype=complex)
    oracle_index = tuple(circuit.domain.spec.check_element(table[x]) for x in circuit.domain.inputs)
    vec[oracle_index + (0,) * len(reg_dims)] = 1.0
    state = PurifiedState(circuit.domain, reg_dims, vec)
    return _run_steps(state, circuit, compressed=False)


def sampled_relation_probability(circuit: AdversaryCircuit, relation, claimed,
                                 shots: int, seed: int = 0) -> dict:
    """Monte-Carlo counterpart of the exact standard-oracle success: draw a
    fresh uniform function per shot, run the adversary against it, sample one
    output, and score the relation against the true hashes."""
    if not circuit.output_regs:
        raise ValueError("circuit must designate x output registers")
    rng = np.random.default_rng(seed)
    spec = circuit.domain.spec
    successes = 0
    for _ in range(shots):
        table = {x: int(rng.integers(spec.order)) for x in circuit.domain.inputs}
        state = run_adversary_fixed_function(circuit, table)
        marginal = state.adversary_marginal()
        drawn = int(rng.choice(len(marginal), p=marginal / marginal.sum()))
        values = np.unravel_index(drawn, state.reg_dims)
        xs = tuple(values[r] for r in circuit.output_regs)
        labels = tuple(circuit.domain.inputs[x] for x in xs)
        if circuit.y_output_regs is not None:
            ys = tuple(values[r] for r in circuit.y_output_regs)
        else:
            ys = tuple(claimed(labels))
        if all(table[x] == y for x, y in zip(labels, ys)) and relation(labels, ys):
            successes += 1
    return {"shots": shots, "successes": successes, "estimate": successes / shots}


def grover_preimage_circuit(domain: OracleDomain, rounds: int) -> AdversaryCircuit:
    """Amplitude-amplification adversary for the preimage-finding relation.

    Registers: one input register over X and one group-valued response
    register prepared in a non-neutral dual state for phase kickback.  For the
    bit group the kickback marks range values with character -1; marking a set
    and marking its complement differ only by a global phase, so the same
    circuit serves any single-target preimage relation.
    """
    spec = domain.spec
    kick = 1  # any non-neutral dual index works; 1 is the canonical choice
    steps = [
        NamedGateStep("prepare_uniform", (0,)),
        NamedGateStep("prepare_dual", (1,), param=kick),
    ]
    for _ in range(rounds):
        steps.append(QueryStep(out_regs=(1,), in_regs=(0,)))
        steps.append(NamedGateStep("reflect_mean", (0,)))
    return AdversaryCircuit(
        domain=domain,
        reg_dims=(domain.size, spec.order),
        steps=tuple(steps),
        output_regs=(0,),
    )
