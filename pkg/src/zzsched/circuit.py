"""Circuit IR, text format, native-gate lowering, benchmark generators.

Gates are named records over 1 or 2 qubit ids. The native set is
{rz(theta), rx90, rzx90, id}; rz is virtual (zero duration). Anything else
is lowered by to_native through fixed decompositions verified against dense
matrices. The text format is one gate per line, `name [params] qubit
[qubit]`, with `#` comments and an optional leading `qubits N` line.

Unitary conventions: qubit 0 is the most significant bit of a state index.
Rz(t) = diag(e^{-it/2}, e^{it/2}), Rx(t) = exp(-i t X / 2), and rzx90 is
exp(-i (pi/4) Z x X) with the first operand carrying the Z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

NATIVE_NAMES = frozenset({"rz", "rx90", "rzx90", "id"})

# name -> (param count, qubit count) for every gate the parser knows
_KNOWN = {
    "h": (0, 1), "x": (0, 1), "y": (0, 1), "z": (0, 1),
    "s": (0, 1), "t": (0, 1), "id": (0, 1), "rx90": (0, 1),
    "rx": (1, 1), "ry": (1, 1), "rz": (1, 1),
    "cx": (0, 2), "cz": (0, 2), "swap": (0, 2), "rzx90": (0, 2),
    "cp": (1, 2), "rzz": (1, 2),
}
_ALIASES = {"identity": "id", "cnot": "cx"}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.qubits) not in (1, 2):
            raise ValueError(f"{self.name}: gates act on 1 or 2 qubits")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.name}: repeated operand qubit")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"{self.name}: negative qubit id")
        if any(not math.isfinite(p) for p in self.params):
            raise ValueError(f"{self.name}: non-finite parameter")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple

    def __post_init__(self):
        for gate in self.gates:
            for q in gate.qubits:
                if q >= self.num_qubits:
                    raise ValueError(f"gate {gate.name} uses qubit {q} out of range")


@dataclass(frozen=True)
class GateTimes:
    """Per-kind durations in seconds; rz is virtual and free."""

    rx90: float = 20e-9
    rzx90: float = 80e-9
    id: float = 20e-9
    rz: float = 0.0

    @classmethod
    def dcg(cls):
        # composed-sequence backend: longer 1q slots, same 2q slot
        return cls(rx90=120e-9, id=40e-9, rzx90=80e-9)

    def duration(self, gate):
        try:
            return getattr(self, gate.name)
        except AttributeError:
            raise ValueError(f"no duration for non-native gate {gate.name!r}")


def dependencies(c):
    """Per-gate predecessor index sets from per-qubit program order."""
    last = {}
    preds = []
    for i, gate in enumerate(c.gates):
        p = set()
        for q in gate.qubits:
            if q in last:
                p.add(last[q])
            last[q] = i
        preds.append(frozenset(p))
    return tuple(preds)


def schedulable(c, scheduled):
    """Gates whose predecessors are all scheduled and that are not yet."""
    scheduled = frozenset(scheduled)
    preds = dependencies(c)
    return frozenset(
        i for i in range(len(c.gates))
        if i not in scheduled and preds[i] <= scheduled
    )


# ---------------------------------------------------------------- parsing


def parse(text, num_qubits=None):
    gates = []
    declared = None
    max_q = -1
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0].lower()
        if head == "qubits":
            if gates or declared is not None:
                raise ValueError(f"line {ln}: qubits directive must come first")
            try:
                declared = int(tokens[1])
            except (IndexError, ValueError):
                raise ValueError(f"line {ln}: malformed qubits directive")
            continue
        name = _ALIASES.get(head, head)
        rest = tokens[1:]
        if name in _KNOWN:
            n_par, n_q = _KNOWN[name]
            if len(rest) != n_par + n_q:
                raise ValueError(
                    f"line {ln}: {name} takes {n_par} parameter(s) and {n_q} qubit(s)"
                )
            par_tok, q_tok = rest[:n_par], rest[n_par:]
        else:
            q_tok = [t for t in rest if _is_int(t)]
            par_tok = [t for t in rest if not _is_int(t)]
            if len(q_tok) not in (1, 2):
                raise ValueError(f"line {ln}: cannot tell qubits from parameters")
        try:
            params = tuple(float(t) for t in par_tok)
        except ValueError:
            raise ValueError(f"line {ln}: bad parameter in {par_tok}")
        if not all(_is_int(t) for t in q_tok):
            raise ValueError(f"line {ln}: qubit operands must be integers")
        qubits = tuple(int(t) for t in q_tok)
        try:
            gate = Gate(name, qubits, params)
        except ValueError as exc:
            raise ValueError(f"line {ln}: {exc}")
        max_q = max(max_q, *qubits)
        gates.append((ln, gate))
    n = num_qubits if num_qubits is not None else declared
    if n is None:
        n = max_q + 1
    for ln, gate in gates:
        for q in gate.qubits:
            if q >= n:
                raise ValueError(f"line {ln}: qubit {q} out of range for {n} qubits")
    return Circuit(n, tuple(g for _, g in gates))


def _is_int(tok):
    try:
        int(tok)
        return True
    except ValueError:
        return False


def print_circuit(c):
    lines = [f"qubits {c.num_qubits}"]
    for gate in c.gates:
        parts = [gate.name]
        parts.extend(repr(p) for p in gate.params)
        parts.extend(str(q) for q in gate.qubits)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def save_circuit(path, c):
    with open(path, "w") as fh:
        fh.write(print_circuit(c))


def load_circuit(path):
    with open(path) as fh:
        return parse(fh.read())


# ----------------------------------------------------- native lowering


def _expand(gate):
    """One decomposition step; returns None when the gate is native."""
    name, qs, ps = gate.name, gate.qubits, gate.params
    q = qs[0]
    if name in NATIVE_NAMES:
        return None
    if name == "h":
        return [Gate("rz", (q,), (math.pi / 2,)), Gate("rx90", (q,)),
                Gate("rz", (q,), (math.pi / 2,))]
    if name == "x":
        return [Gate("rx90", (q,)), Gate("rx90", (q,))]
    if name == "y":
        return [Gate("rz", (q,), (math.pi,)), Gate("rx90", (q,)), Gate("rx90", (q,))]
    if name == "z":
        return [Gate("rz", (q,), (math.pi,))]
    if name == "s":
        return [Gate("rz", (q,), (math.pi / 2,))]
    if name == "t":
        return [Gate("rz", (q,), (math.pi / 4,))]
    if name == "rx":
        th = ps[0]
        return [Gate("rz", (q,), (-math.pi / 2,)), Gate("rx90", (q,)),
                Gate("rz", (q,), (math.pi - th,)), Gate("rx90", (q,)),
                Gate("rz", (q,), (-math.pi / 2,))]
    if name == "ry":
        return [Gate("rz", (q,), (-math.pi / 2,)), Gate("rx", (q,), ps),
                Gate("rz", (q,), (math.pi / 2,))]
    if name == "cx":
        c, t = qs
        return [Gate("x", (c,)), Gate("rzx90", (c, t)), Gate("x", (c,)),
                Gate("rx90", (t,)), Gate("rz", (c,), (math.pi / 2,))]
    if name == "cz":
        c, t = qs
        return [Gate("h", (t,)), Gate("cx", (c, t)), Gate("h", (t,))]
    if name == "cp":
        c, t = qs
        th = ps[0]
        return [Gate("rz", (c,), (th / 2,)), Gate("rz", (t,), (th / 2,)),
                Gate("cx", (c, t)), Gate("rz", (t,), (-th / 2,)),
                Gate("cx", (c, t))]
    if name == "swap":
        a, b = qs
        return [Gate("cx", (a, b)), Gate("cx", (b, a)), Gate("cx", (a, b))]
    if name == "rzz":
        a, b = qs
        return [Gate("cx", (a, b)), Gate("rz", (b,), ps), Gate("cx", (a, b))]
    raise ValueError(f"cannot lower gate {name!r} to the native set")


def to_native(c):
    """Lower every gate to {rz, rx90, rzx90, id}; unitary preserved up to phase."""
    out = []
    stack = list(reversed(c.gates))
    while stack:
        gate = stack.pop()
        expansion = _expand(gate)
        if expansion is None:
            out.append(gate)
        else:
            stack.extend(reversed(expansion))
    return Circuit(c.num_qubits, tuple(out))


# ------------------------------------------------------ dense semantics

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _rz_mat(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def _rx_mat(t):
    return math.cos(t / 2) * _I2 - 1j * math.sin(t / 2) * _X


def _ry_mat(t):
    return math.cos(t / 2) * _I2 - 1j * math.sin(t / 2) * _Y


def gate_matrix(gate):
    """Dense matrix for a named gate; first operand is the high bit."""
    name, ps = gate.name, gate.params
    if name == "id":
        return _I2.copy()
    if name == "h":
        return _H.copy()
    if name == "x":
        return _X.copy()
    if name == "y":
        return _Y.copy()
    if name == "z":
        return _Z.copy()
    if name == "s":
        return np.diag([1, 1j]).astype(complex)
    if name == "t":
        return np.diag([1, np.exp(0.25j * math.pi)])
    if name == "rz":
        return _rz_mat(ps[0])
    if name == "rx":
        return _rx_mat(ps[0])
    if name == "ry":
        return _ry_mat(ps[0])
    if name == "rx90":
        return _rx_mat(math.pi / 2)
    if name == "rzx90":
        out = np.zeros((4, 4), dtype=complex)
        out[:2, :2] = _rx_mat(math.pi / 2)
        out[2:, 2:] = _rx_mat(-math.pi / 2)
        return out
    if name == "cx":
        out = np.eye(4, dtype=complex)
        out[2:, 2:] = _X
        return out
    if name == "cz":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if name == "cp":
        return np.diag([1, 1, 1, np.exp(1j * ps[0])])
    if name == "swap":
        out = np.eye(4, dtype=complex)
        out[[1, 2]] = out[[2, 1]]
        return out
    if name == "rzz":
        t = ps[0]
        return np.diag(np.exp(-0.5j * t * np.array([1, -1, -1, 1])))
    raise ValueError(f"no matrix for gate {name!r}")


def apply_gate_to_state(state, gate, num_qubits):
    """Apply a gate to a dense state or a batch with a trailing batch axis."""
    u = gate_matrix(gate)
    tail = state.shape[1:] if state.ndim > 1 else ()
    psi = state.reshape([2] * num_qubits + list(tail))
    if len(gate.qubits) == 1:
        q = gate.qubits[0]
        psi = np.tensordot(u, psi, axes=([1], [q]))
        psi = np.moveaxis(psi, 0, q)
    else:
        a, b = gate.qubits
        u4 = u.reshape(2, 2, 2, 2)
        psi = np.tensordot(u4, psi, axes=([2, 3], [a, b]))
        psi = np.moveaxis(psi, [0, 1], [a, b])
    return np.ascontiguousarray(psi).reshape(state.shape)


def ideal_unitary(c):
    """Full circuit unitary by columns; testing oracle for small circuits."""
    if c.num_qubits > 8:
        raise ValueError("dense unitary capped at 8 qubits")
    dim = 2 ** c.num_qubits
    cols = np.eye(dim, dtype=complex)
    for gate in c.gates:
        cols = apply_gate_to_state(cols, gate, c.num_qubits)
    return cols


# ------------------------------------------------------------ benchmarks


def _ripple_qft_gates(size, offset=0, inverse=False):
    # interleaved-swap form: every interaction is nearest-neighbor and the
    # net unitary equals the DFT matrix exactly (swaps absorb bit reversal)
    gates = []
    for r in range(size):
        gates.append(Gate("h", (offset,)))
        for k in range(size - 1 - r):
            gates.append(Gate("cp", (offset + k, offset + k + 1), (math.pi / 2 ** (k + 1),)))
            gates.append(Gate("swap", (offset + k, offset + k + 1)))
    if not inverse:
        return gates
    out = []
    for g in reversed(gates):
        if g.name == "cp":
            out.append(Gate("cp", g.qubits, (-g.params[0],)))
        else:
            out.append(g)
    return out


def _bench_qft(n, rng):
    return _ripple_qft_gates(n)


def _bench_hs(n, rng):
    if n % 2:
        raise ValueError("hidden-shift circuits need an even qubit count")
    shift = rng.integers(0, 2, size=n)
    pairs = [(2 * k, 2 * k + 1) for k in range(n // 2)]
    gates = [Gate("h", (q,)) for q in range(n)]
    gates += [Gate("x", (q,)) for q in range(n) if shift[q]]
    gates += [Gate("cz", p) for p in pairs]
    gates += [Gate("x", (q,)) for q in range(n) if shift[q]]
    gates += [Gate("h", (q,)) for q in range(n)]
    gates += [Gate("cz", p) for p in pairs]
    gates += [Gate("h", (q,)) for q in range(n)]
    return gates


def _bench_qpe(n, rng):
    # n-1 counting qubits ahead of one target on the chain; the target state
    # ripples left through swaps so every controlled phase is nearest-neighbor
    m = n - 1
    val = int(rng.integers(1, 2 ** m))
    phi = val / 2 ** m
    gates = [Gate("x", (m,))]
    gates += [Gate("h", (k,)) for k in range(m)]
    for k in range(m - 1, -1, -1):
        angle = 2 * math.pi * phi * 2 ** (m - 1 - k)
        gates.append(Gate("cp", (k, k + 1), (angle,)))
        gates.append(Gate("swap", (k, k + 1)))
    gates += _ripple_qft_gates(m, offset=1, inverse=True)
    return gates


def _bench_qaoa(n, rng):
    layers = 2
    gammas = rng.uniform(0, math.pi, layers)
    betas = rng.uniform(0, math.pi, layers)
    gates = [Gate("h", (q,)) for q in range(n)]
    for g_ang, b_ang in zip(gammas, betas):
        gates += [Gate("rzz", (i, i + 1), (float(g_ang),)) for i in range(n - 1)]
        gates += [Gate("rx", (q,), (float(b_ang),)) for q in range(n)]
    return gates


def _bench_ising(n, rng):
    steps = 2
    dt = 0.2
    fields = rng.uniform(0.5, 1.5, size=n)
    gates = []
    for _ in range(steps):
        gates += [Gate("rzz", (i, i + 1), (2 * dt,)) for i in range(n - 1)]
        gates += [Gate("rx", (q,), (2 * dt * float(fields[q]),)) for q in range(n)]
    return gates


def _bench_grc(n, rng):
    layers = 4
    singles = ["h", "t", "s", "x"]
    gates = []
    for layer in range(layers):
        picks = rng.integers(0, len(singles), size=n)
        gates += [Gate(singles[picks[q]], (q,)) for q in range(n)]
        gates += [Gate("cz", (i, i + 1)) for i in range(layer % 2, n - 1, 2)]
    return gates


_BENCHES = {
    "qft": _bench_qft,
    "hs": _bench_hs,
    "qpe": _bench_qpe,
    "qaoa": _bench_qaoa,
    "ising": _bench_ising,
    "grc": _bench_grc,
}


def benchmark(name, n, seed=0, qubit_order=None):
    """Deterministic chain-shaped benchmark circuit.

    Two-qubit gates act only on consecutive chain positions, so the circuit
    fits any device along a path; qubit_order maps chain position i to a
    device qubit id (for example a grid snake).
    """
    if name not in _BENCHES:
        raise ValueError(f"unknown benchmark {name!r}")
    if not 2 <= n <= 12:
        raise ValueError("benchmarks support 2..12 qubits")
    rng = np.random.default_rng(seed)
    gates = _BENCHES[name](n, rng)
    if qubit_order is None:
        return Circuit(n, tuple(gates))
    order = list(qubit_order)
    if len(order) != n or len(set(order)) != n:
        raise ValueError("qubit_order must be a permutation of length n")
    remapped = [
        Gate(g.name, tuple(order[q] for q in g.qubits), g.params) for g in gates
    ]
    return Circuit(max(order) + 1, tuple(remapped))
