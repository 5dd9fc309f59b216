"""Layered circuit IR with exact dyadic phase angles.

Circuits are immutable containers of gate layers over three wire spaces:
data qubits ``0..n_qubits-1``, ancilla qubits ``n_qubits..n_qubits+n_ancilla-1``
(one shared quantum index space), and classical bits ``0..n_classical-1``.
Layers are greedy ASAP: each gate lands on the earliest layer where every
wire it touches is free.  Phase angles are fractions of a full turn with a
power-of-two denominator, kept exact as ``numerator / 2**log_denominator``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

from .errors import NonInvertibleError, StructuralError

MAX_LOG_DENOMINATOR = 64


@dataclass(frozen=True, slots=True)
class DyadicAngle:
    """An angle ``numerator / 2**log_denominator`` in turns, reduced mod 1.

    After construction the numerator is odd (or zero with log_denominator 0)
    and lies in ``[0, 2**log_denominator)``.
    """

    numerator: int
    log_denominator: int

    def __post_init__(self):
        ld = self.log_denominator
        if not 0 <= ld <= MAX_LOG_DENOMINATOR:
            raise StructuralError(f"log_denominator {ld} out of range 0..{MAX_LOG_DENOMINATOR}")
        num = self.numerator % (1 << ld)
        while num and num % 2 == 0:
            num //= 2
            ld -= 1
        if num == 0:
            ld = 0
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "log_denominator", ld)

    def __neg__(self) -> DyadicAngle:
        return DyadicAngle(-self.numerator, self.log_denominator)

    def __float__(self) -> float:
        return self.numerator / (1 << self.log_denominator)

    @property
    def turns(self) -> float:
        return float(self)

    def phase(self) -> complex:
        """The unit complex number exp(2*pi*i * turns)."""
        return complex(math.cos(math.tau * float(self)), math.sin(math.tau * float(self)))

    def __str__(self) -> str:
        if self.numerator == 0:
            return "0"
        return f"{self.numerator}/2^{self.log_denominator}"


def dyadic(numerator: int, log_denominator: int) -> DyadicAngle:
    return DyadicAngle(numerator, log_denominator)


# --- gates ----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Gate:
    name = "gate"

    def qubits(self) -> tuple[int, ...]:
        raise NotImplementedError

    def clbits(self) -> tuple[int, ...]:
        return ()

    def inverse(self) -> Gate:
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class H(Gate):
    target: int
    name = "h"

    def qubits(self):
        return (self.target,)

    def inverse(self):
        return self


@dataclass(frozen=True, slots=True)
class P(Gate):
    """Phase gate diag(1, exp(2*pi*i*theta)) on one wire."""

    target: int
    theta: DyadicAngle
    name = "p"

    def qubits(self):
        return (self.target,)

    def inverse(self):
        return P(self.target, -self.theta)


@dataclass(frozen=True, slots=True)
class CP(Gate):
    """Symmetric controlled phase: multiplies |11> by exp(2*pi*i*theta)."""

    a: int
    b: int
    theta: DyadicAngle
    name = "cp"

    def __post_init__(self):
        if self.a == self.b:
            raise StructuralError("cp needs two distinct wires")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    def qubits(self):
        return (self.a, self.b)

    def inverse(self):
        return CP(self.a, self.b, -self.theta)


@dataclass(frozen=True, slots=True)
class X(Gate):
    target: int
    name = "x"

    def qubits(self):
        return (self.target,)

    def inverse(self):
        return self


@dataclass(frozen=True, slots=True)
class CNOT(Gate):
    control: int
    target: int
    name = "cnot"

    def __post_init__(self):
        if self.control == self.target:
            raise StructuralError("cnot needs two distinct wires")

    def qubits(self):
        return (self.control, self.target)

    def inverse(self):
        return self


@dataclass(frozen=True, slots=True)
class Toffoli(Gate):
    c1: int
    c2: int
    target: int
    name = "ccx"

    def __post_init__(self):
        if len({self.c1, self.c2, self.target}) != 3:
            raise StructuralError("ccx needs three distinct wires")
        if self.c1 > self.c2:
            c1, c2 = self.c2, self.c1
            object.__setattr__(self, "c1", c1)
            object.__setattr__(self, "c2", c2)

    def qubits(self):
        return (self.c1, self.c2, self.target)

    def inverse(self):
        return self


MEASURE_BASES = ("x", "y", "z")


@dataclass(frozen=True, slots=True)
class MeasureBasis(Gate):
    """Destructive single-qubit measurement in the x, y, or z basis.

    The outcome bit lands on classical wire ``out``; the qubit collapses to
    the observed basis state (expressed back in the computational basis).
    """

    target: int
    basis: str
    out: int
    name = "meas"

    def __post_init__(self):
        if self.basis not in MEASURE_BASES:
            raise StructuralError(f"unknown measurement basis {self.basis!r}")

    def qubits(self):
        return (self.target,)

    def clbits(self):
        return (self.out,)

    def inverse(self):
        raise NonInvertibleError("measurement has no inverse")


# --- circuit --------------------------------------------------------------


def _asap_layers(gates: Iterable[Gate]) -> tuple[tuple[Gate, ...], ...]:
    frontier: dict[tuple[str, int], int] = {}
    layers: list[list[Gate]] = []
    for g in gates:
        keys = [("q", w) for w in g.qubits()] + [("c", w) for w in g.clbits()]
        layer = max((frontier.get(k, 0) for k in keys), default=0)
        while len(layers) <= layer:
            layers.append([])
        layers[layer].append(g)
        for k in keys:
            frontier[k] = layer + 1
    return tuple(tuple(layer) for layer in layers)


@dataclass(frozen=True)
class Circuit:
    """An immutable layered circuit.

    Equality is structural (dimensions and layers); metadata is excluded so
    two builds of the same circuit compare equal regardless of annotations.
    """

    n_qubits: int
    n_ancilla: int
    n_classical: int
    layers: tuple[tuple[Gate, ...], ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        nq = self.n_qubits + self.n_ancilla
        for li, layer in enumerate(self.layers):
            seen_q: set[int] = set()
            seen_c: set[int] = set()
            for g in layer:
                for w in g.qubits():
                    if not 0 <= w < nq:
                        raise StructuralError(f"layer {li}: quantum wire {w} out of range 0..{nq - 1}")
                    if w in seen_q:
                        raise StructuralError(f"layer {li}: quantum wire {w} used twice")
                    seen_q.add(w)
                for w in g.clbits():
                    if not 0 <= w < self.n_classical:
                        raise StructuralError(f"layer {li}: classical wire {w} out of range")
                    if w in seen_c:
                        raise StructuralError(f"layer {li}: classical wire {w} used twice")
                    seen_c.add(w)

    @classmethod
    def from_gates(
        cls,
        gates: Iterable[Gate],
        n_qubits: int,
        n_ancilla: int = 0,
        n_classical: int = 0,
        metadata: dict | None = None,
    ) -> Circuit:
        """ASAP-schedule a gate sequence into layers."""
        return cls(n_qubits, n_ancilla, n_classical, _asap_layers(gates), metadata or {})

    @classmethod
    def from_layers(
        cls,
        layers: Sequence[Sequence[Gate]],
        n_qubits: int,
        n_ancilla: int = 0,
        n_classical: int = 0,
        metadata: dict | None = None,
    ) -> Circuit:
        """Wrap explicit layers without rescheduling."""
        return cls(n_qubits, n_ancilla, n_classical, tuple(tuple(l) for l in layers), metadata or {})

    # metrics

    @property
    def width(self) -> int:
        return self.n_qubits + self.n_ancilla

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def size(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def gate_histogram(self) -> dict[str, int]:
        hist: dict[str, int] = {}
        for g in self.all_gates():
            hist[g.name] = hist.get(g.name, 0) + 1
        return dict(sorted(hist.items()))

    def all_gates(self) -> Iterator[Gate]:
        for layer in self.layers:
            yield from layer

    def has_measurement(self) -> bool:
        return any(isinstance(g, MeasureBasis) for g in self.all_gates())

    # structure

    def inverse(self) -> Circuit:
        """Reverse the layer order and invert every gate; layers are kept."""
        inv = tuple(tuple(g.inverse() for g in layer) for layer in reversed(self.layers))
        return Circuit(self.n_qubits, self.n_ancilla, self.n_classical, inv, dict(self.metadata))

    def compose(self, other: Circuit) -> Circuit:
        """Concatenate self then other on shared wires and reschedule ASAP."""
        if other.n_qubits != self.n_qubits:
            raise StructuralError("compose requires matching data width")
        gates = list(self.all_gates()) + list(other.all_gates())
        return Circuit.from_gates(
            gates,
            self.n_qubits,
            max(self.n_ancilla, other.n_ancilla),
            max(self.n_classical, other.n_classical),
        )

    def light_cone(self, wires: Iterable[int]) -> set[int]:
        """Quantum wires that can influence ``wires``, walking layers backward."""
        cone = set(wires)
        nq = self.width
        for w in cone:
            if not 0 <= w < nq:
                raise StructuralError(f"quantum wire {w} out of range")
        for layer in reversed(self.layers):
            for g in layer:
                support = set(g.qubits())
                if support & cone:
                    cone |= support
        return cone


# --- lowering -------------------------------------------------------------

_HALF = DyadicAngle(1, 1)
_QUARTER = DyadicAngle(1, 2)


def _lower_gate(g: Gate) -> list[Gate]:
    if isinstance(g, X):
        t = g.target
        return [H(t), P(t, _HALF), H(t)]
    if isinstance(g, CNOT):
        c, t = g.control, g.target
        return [H(t), CP(c, t, _HALF), H(t)]
    if isinstance(g, Toffoli):
        a, b, t = g.c1, g.c2, g.target
        cv = lambda c: [H(t), CP(c, t, _QUARTER), H(t)]
        cvdg = lambda c: [H(t), CP(c, t, -_QUARTER), H(t)]
        seq: list[Gate] = []
        seq += cv(b)
        seq += _lower_gate(CNOT(a, b))
        seq += cvdg(b)
        seq += _lower_gate(CNOT(a, b))
        seq += cv(a)
        return seq
    return [g]


def lower(circuit: Circuit) -> Circuit:
    """Rewrite onto the {H, P, CP} gate set (measurements pass through)."""
    gates: list[Gate] = []
    for g in circuit.all_gates():
        gates.extend(_lower_gate(g))
    return Circuit.from_gates(
        gates, circuit.n_qubits, circuit.n_ancilla, circuit.n_classical, dict(circuit.metadata)
    )


# --- builder --------------------------------------------------------------


class CircuitBuilder:
    """Mutable gate-list builder with ancilla allocation and uncompute helpers."""

    def __init__(self, n_qubits: int, n_classical: int = 0):
        self.n_qubits = n_qubits
        self._n_ancilla = 0
        self._n_classical = n_classical
        self._gates: list[Gate] = []

    # wires

    def new_ancilla(self) -> int:
        w = self.n_qubits + self._n_ancilla
        self._n_ancilla += 1
        return w

    def new_ancillas(self, count: int) -> list[int]:
        return [self.new_ancilla() for _ in range(count)]

    def new_classical(self) -> int:
        w = self._n_classical
        self._n_classical += 1
        return w

    @property
    def num_quantum(self) -> int:
        return self.n_qubits + self._n_ancilla

    # gates

    def add(self, gate: Gate) -> None:
        for w in gate.qubits():
            if not 0 <= w < self.num_quantum:
                raise StructuralError(f"quantum wire {w} not allocated")
        for w in gate.clbits():
            if not 0 <= w < self._n_classical:
                raise StructuralError(f"classical wire {w} not allocated")
        self._gates.append(gate)

    def h(self, t: int) -> None:
        self.add(H(t))

    def p(self, t: int, theta: DyadicAngle) -> None:
        self.add(P(t, theta))

    def cp(self, a: int, b: int, theta: DyadicAngle) -> None:
        self.add(CP(a, b, theta))

    def x(self, t: int) -> None:
        self.add(X(t))

    def cnot(self, c: int, t: int) -> None:
        self.add(CNOT(c, t))

    def toffoli(self, c1: int, c2: int, t: int) -> None:
        self.add(Toffoli(c1, c2, t))

    def measure(self, t: int, basis: str, out: int | None = None) -> int:
        if out is None:
            out = self.new_classical()
        self.add(MeasureBasis(t, basis, out))
        return out

    # segments

    def mark(self) -> int:
        return len(self._gates)

    def gates_since(self, mark: int) -> list[Gate]:
        return list(self._gates[mark:])

    def emit_inverse(self, gates: Sequence[Gate]) -> None:
        for g in reversed(list(gates)):
            self.add(g.inverse())

    def uncompute_since(self, mark: int) -> None:
        self.emit_inverse(self._gates[mark:])

    def inline(
        self,
        sub: Circuit,
        qmap: Mapping[int, int] | Sequence[int],
        cmap: Mapping[int, int] | None = None,
        full_map: Mapping[int, int] | None = None,
    ) -> dict[int, int]:
        """Append ``sub``'s gates with wires remapped into this builder.

        ``qmap`` maps sub data wires to parent wires.  Sub ancillas get fresh
        parent ancillas unless ``full_map`` already covers them (used to
        re-inline an inverse over the same scratch wires).  Returns the
        complete quantum wire map that was used.
        """
        wmap: dict[int, int] = dict(full_map) if full_map else {}
        if isinstance(qmap, Mapping):
            wmap.update(qmap)
        else:
            wmap.update(enumerate(qmap))
        for i in range(sub.n_qubits):
            if i not in wmap:
                raise StructuralError(f"inline map missing data wire {i}")
        for a in range(sub.n_qubits, sub.n_qubits + sub.n_ancilla):
            if a not in wmap:
                wmap[a] = self.new_ancilla()
        cm: dict[int, int] = dict(cmap) if cmap else {}
        for g in sub.all_gates():
            self.add(_remap_gate(g, wmap, cm, self))
        return wmap

    def build(self, metadata: dict | None = None) -> Circuit:
        return Circuit.from_gates(
            self._gates, self.n_qubits, self._n_ancilla, self._n_classical, metadata
        )


def _remap_gate(g: Gate, qm: Mapping[int, int], cm: dict[int, int], builder: CircuitBuilder) -> Gate:
    if isinstance(g, H):
        return H(qm[g.target])
    if isinstance(g, P):
        return P(qm[g.target], g.theta)
    if isinstance(g, CP):
        return CP(qm[g.a], qm[g.b], g.theta)
    if isinstance(g, X):
        return X(qm[g.target])
    if isinstance(g, CNOT):
        return CNOT(qm[g.control], qm[g.target])
    if isinstance(g, Toffoli):
        return Toffoli(qm[g.c1], qm[g.c2], qm[g.target])
    if isinstance(g, MeasureBasis):
        if g.out not in cm:
            cm[g.out] = builder.new_classical()
        return MeasureBasis(qm[g.target], g.basis, cm[g.out])
    raise StructuralError(f"cannot remap gate {g!r}")
