import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zzsched.circuit import Circuit, Gate, GateTimes, parse
from zzsched.scheduler import (
    SuppressionRequirement,
    gate_distance,
    gate_duration,
    group_distance,
    par_sched,
    plan_from_json,
    plan_to_json,
    schedule,
    two_q_schedule,
)
from zzsched.topology import grid_topology, line_topology

EIGHT_QUBIT_PROGRAM = (
    "h 0\nh 2\nh 4\nh 6\nx 7\n"
    "cx 0 3\ncx 4 1\ncx 2 5\ncx 6 7\n"
    "h 3\nx 5\n"
)


@pytest.fixture(scope="module")
def g3():
    return grid_topology(3, 3)


def nonid(layer):
    return {(g.name, g.qubits) for g in layer.gates if g.name != "id"}


def id_qubits(layer):
    return {g.qubits[0] for g in layer.gates if g.name == "id"}


# ---------------------------------------------------------- requirement


def test_requirement_default(g3):
    r = SuppressionRequirement.default(g3)
    assert r.max_n_q == 4
    assert r.max_n_c == 6.0
    assert r.satisfied(3, 6)
    assert not r.satisfied(4, 6)  # exclusive qubit bound
    assert not r.satisfied(3, 6.5)


def test_requirement_positive():
    with pytest.raises(ValueError):
        SuppressionRequirement(0, 5)
    with pytest.raises(ValueError):
        SuppressionRequirement(3, 0)


# ------------------------------------------------------------ distances


def test_gate_distance_examples(g3):
    a = Gate("cx", (0, 3))
    b = Gate("cx", (4, 1))
    c = Gate("cx", (2, 5))
    assert gate_distance(c, a, g3) == 10
    assert gate_distance(c, b, g3) == 6
    assert gate_distance(Gate("cx", (1, 4)), Gate("cx", (2, 5)), g3) == 6
    assert gate_distance(a, a, g3) == 2


def test_gate_distance_needs_two_qubit_gates(g3):
    with pytest.raises(ValueError):
        gate_distance(Gate("h", (0,)), Gate("cx", (0, 1)), g3)


def test_group_distance(g3):
    c = Gate("cx", (2, 5))
    a = Gate("cx", (0, 3))
    b = Gate("cx", (4, 1))
    assert group_distance(c, [b], g3) == 6
    assert group_distance(c, [a, b], g3) == 6
    assert group_distance(c, [a], g3) == 10
    with pytest.raises(ValueError):
        group_distance(c, [], g3)


# ------------------------------------------------------------ durations


def test_gate_duration_native_and_composite():
    t = GateTimes()
    assert gate_duration(Gate("rx90", (0,)), t) == pytest.approx(20e-9)
    assert gate_duration(Gate("h", (0,)), t) == pytest.approx(20e-9)
    assert gate_duration(Gate("x", (0,)), t) == pytest.approx(40e-9)
    assert gate_duration(Gate("cx", (0, 1)), t) == pytest.approx(160e-9)
    assert gate_duration(Gate("swap", (0, 1)), t) == pytest.approx(440e-9)
    assert gate_duration(Gate("rz", (0,), (1.0,)), t) == 0.0


# ------------------------------------------------------- two-qubit sets


def test_two_q_schedule_example_grouping(g3):
    gates = [Gate("cx", (0, 3)), Gate("cx", (4, 1)), Gate("cx", (2, 5))]
    r = SuppressionRequirement.default(g3)
    out = two_q_schedule(g3, gates, r, alpha=0.5)
    assert out.seed_pair == (0, 1)
    assert out.selected == (0, 2)
    assert out.result.cut.partition_s == frozenset({0, 2, 3, 5, 7})
    assert not out.flagged
    assert r.satisfied(out.result.n_q, out.result.n_c)


def test_two_q_schedule_single_gate_permissive(g3):
    r = SuppressionRequirement.default(g3)
    out = two_q_schedule(g3, [Gate("cx", (0, 1))], r)
    assert out.selected == (0,)
    assert out.seed_pair is None
    assert not out.flagged


def test_two_q_schedule_whole_set_fits():
    g = grid_topology(3, 4)
    r = SuppressionRequirement.default(g)
    gates = [Gate("cx", (0, 4)), Gate("cx", (7, 11))]
    out = two_q_schedule(g, gates, r, alpha=0.5)
    assert out.selected == (0, 1)
    assert out.seed_pair is None
    assert r.satisfied(out.result.n_q, out.result.n_c)


def test_two_q_schedule_split_keeps_requirement(g3):
    r = SuppressionRequirement.default(g3)
    gates = [Gate("cx", (4, 1)), Gate("cx", (6, 7))]
    out = two_q_schedule(g3, gates, r, alpha=0.5)
    assert out.seed_pair == (0, 1)
    assert out.selected == (0,)
    assert {1, 4} <= out.result.cut.partition_s
    assert not out.flagged
    assert r.satisfied(out.result.n_q, out.result.n_c)


def test_two_q_schedule_lone_violating_gate_flagged():
    g = line_topology(2)
    r = SuppressionRequirement(2, 1)
    out = two_q_schedule(g, [Gate("cx", (0, 1))], r)
    assert out.flagged
    assert out.selected == (0,)


def test_two_q_schedule_rejects_uncoupled(g3):
    r = SuppressionRequirement.default(g3)
    with pytest.raises(ValueError):
        two_q_schedule(g3, [Gate("cx", (0, 8))], r)
    with pytest.raises(ValueError):
        two_q_schedule(g3, [], r)


def test_two_q_schedule_deterministic(g3):
    r = SuppressionRequirement.default(g3)
    gates = [Gate("cx", (0, 3)), Gate("cx", (4, 1)), Gate("cx", (2, 5))]
    a = two_q_schedule(g3, gates, r)
    b = two_q_schedule(g3, gates, r)
    assert a == b


# ----------------------------------------------------- schedule: traces


def test_schedule_eight_qubit_trace(g3):
    c = parse(EIGHT_QUBIT_PROGRAM)
    plan = schedule(g3, c, alpha=0.5)
    layers = plan.layers
    assert len(layers) == 4

    assert nonid(layers[0]) == {("h", (0,)), ("h", (2,)), ("h", (4,)), ("h", (6,))}
    assert id_qubits(layers[0]) == {8}
    assert layers[0].cut.partition_s == frozenset({0, 2, 4, 6, 8})
    assert layers[0].n_q == 1 and layers[0].n_c == 0

    assert nonid(layers[1]) == {("cx", (0, 3)), ("cx", (2, 5)), ("x", (7,))}
    assert layers[1].cut.partition_s == frozenset({0, 2, 3, 5, 7})
    assert id_qubits(layers[1]) == set()

    assert {e for e in nonid(layers[2]) if len(e[1]) == 2} == {("cx", (4, 1))}
    assert {1, 4} <= layers[2].cut.partition_s

    assert nonid(layers[3]) == {("cx", (6, 7)), ("h", (3,)), ("x", (5,))}
    assert {3, 5, 6, 7} <= layers[3].cut.partition_s

    r = SuppressionRequirement.default(g3)
    for layer in layers:
        assert not layer.flagged
        assert r.satisfied(layer.n_q, layer.n_c)

    assert plan.layers[0].duration == pytest.approx(20e-9)
    assert plan.layers[1].duration == pytest.approx(160e-9)
    assert plan.total_duration == pytest.approx(500e-9)


def test_schedule_respects_dag_and_covers_gates(g3):
    c = parse(EIGHT_QUBIT_PROGRAM)
    plan = schedule(g3, c)
    assert_plan_valid(g3, c, plan)


def assert_plan_valid(g, c, plan, require=None):
    from zzsched.circuit import dependencies

    assert sorted(plan.source_gate_map) == list(range(len(c.gates)))
    placed = {i: [] for i in range(len(plan.layers) + 1)}
    for i, li in plan.source_gate_map.items():
        placed[li].append(i)
    # every non-rz gate sits in its mapped layer exactly once
    for li, layer in enumerate(plan.layers):
        expect = [c.gates[i] for i in sorted(placed[li]) if c.gates[i].name != "rz"]
        got = [gate for gate in layer.gates if gate.name != "id"]
        assert sorted(map(repr, expect)) == sorted(map(repr, got))
        rz_expect = [c.gates[i] for i in sorted(placed[li]) if c.gates[i].name == "rz"]
        assert list(layer.rz_gates) == rz_expect
    assert list(plan.trailing_rz) == [
        c.gates[i] for i in sorted(placed[len(plan.layers)])
    ]
    preds = dependencies(c)
    for b, ps in enumerate(preds):
        for a in ps:
            if c.gates[a].name == "rz":
                assert plan.source_gate_map[a] <= plan.source_gate_map[b]
            else:
                assert plan.source_gate_map[a] < plan.source_gate_map[b]
    for layer in plan.layers:
        if layer.cut is None:
            continue
        used = [q for gate in layer.gates for q in gate.qubits]
        assert len(set(used)) == len(used)
        assert set(used) == layer.cut.partition_s  # supplements fill the side
        if require is not None and not layer.flagged:
            assert require.satisfied(layer.n_q, layer.n_c)
    assert plan.total_duration == pytest.approx(
        sum(layer.duration for layer in plan.layers)
    )


def test_schedule_empty_circuit(g3):
    plan = schedule(g3, Circuit(9, ()))
    assert plan.layers == ()
    assert plan.total_duration == 0.0


def test_schedule_case1_orientation_flip(g3):
    plan = schedule(g3, parse("h 7\n", num_qubits=9))
    assert plan.layers[0].cut.partition_s == frozenset({1, 3, 5, 7})
    assert nonid(plan.layers[0]) == {("h", (7,))}
    assert id_qubits(plan.layers[0]) == {1, 3, 5}


def test_schedule_case1_orientation_tie(g3):
    plan = schedule(g3, parse("h 0\nh 1\n", num_qubits=9))
    assert len(plan.layers) == 2
    assert plan.layers[0].cut.partition_s == frozenset({0, 2, 4, 6, 8})
    assert nonid(plan.layers[0]) == {("h", (0,))}
    assert nonid(plan.layers[1]) == {("h", (1,))}


def test_schedule_rz_absorbed_forward(g3):
    plan = schedule(g3, parse("rz 0.5 0\nrx90 0\n", num_qubits=9))
    assert len(plan.layers) == 1
    assert plan.layers[0].rz_gates == (Gate("rz", (0,), (0.5,)),)
    assert plan.trailing_rz == ()
    assert plan.source_gate_map == {0: 0, 1: 0}


def test_schedule_trailing_rz(g3):
    plan = schedule(g3, parse("rx90 0\nrz 0.5 0\n", num_qubits=9))
    assert len(plan.layers) == 1
    assert plan.layers[0].rz_gates == ()
    assert plan.trailing_rz == (Gate("rz", (0,), (0.5,)),)
    assert plan.source_gate_map == {0: 0, 1: 1}


def test_schedule_rz_order_preserved(g3):
    plan = schedule(g3, parse("rz 1 0\nrz 2 0\nrx90 0\n", num_qubits=9))
    assert plan.layers[0].rz_gates == (
        Gate("rz", (0,), (1.0,)),
        Gate("rz", (0,), (2.0,)),
    )


def test_schedule_rejects_uncoupled(g3):
    with pytest.raises(ValueError):
        schedule(g3, parse("cx 0 8\n", num_qubits=9))
    with pytest.raises(ValueError):
        schedule(g3, parse("h 0\n", num_qubits=16))


def test_schedule_flagged_single_gate_layer():
    g = line_topology(2)
    plan = schedule(g, parse("cx 0 1\n"), r=SuppressionRequirement(2, 1))
    assert len(plan.layers) == 1
    assert plan.layers[0].flagged
    assert plan.layers[0].warning


# ------------------------------------------------------------ par_sched


def test_par_sched_eight_qubit(g3):
    c = parse(EIGHT_QUBIT_PROGRAM)
    plan = par_sched(g3, c)
    assert len(plan.layers) == 3
    assert nonid(plan.layers[0]) == {
        ("h", (0,)), ("h", (2,)), ("h", (4,)), ("h", (6,)), ("x", (7,))
    }
    assert len(plan.layers[1].gates) == 4
    assert nonid(plan.layers[2]) == {("h", (3,)), ("x", (5,))}
    assert all(not any(g.name == "id" for g in l.gates) for l in plan.layers)
    assert plan.layers[0].cut is None


def test_par_sched_serial_chain():
    g = line_topology(2)
    plan = par_sched(g, parse("h 0\nx 0\nh 0\n", num_qubits=2))
    assert [len(l.gates) for l in plan.layers] == [1, 1, 1]


def test_par_sched_matches_dag_depth():
    from zzsched.circuit import benchmark, dependencies

    g = line_topology(4)
    c = benchmark("qft", 4)
    plan = par_sched(g, c)
    preds = dependencies(c)
    depth = [0] * len(c.gates)
    for i, ps in enumerate(preds):
        depth[i] = 1 + max((depth[j] for j in ps), default=0)
    assert len(plan.layers) == max(depth)
    assert_plan_valid(g, c, plan)


def test_duration_ratio_sane():
    from zzsched.circuit import benchmark

    g = line_topology(4)
    c = benchmark("qft", 4)
    zzx = schedule(g, c)
    par = par_sched(g, c)
    assert zzx.total_duration <= 3 * par.total_duration
    assert zzx.total_duration >= par.total_duration


# ----------------------------------------------- seed separation theorem


def random_matching(rng, g, size):
    edges = list(g.edges)
    rng.shuffle(edges)
    used = set()
    out = []
    for u, v in edges:
        if u in used or v in used:
            continue
        out.append(Gate("cx", (u, v)))
        used.update((u, v))
        if len(out) == size:
            break
    return out


@pytest.mark.parametrize("rows,cols", [(3, 4), (4, 4)])
def test_seed_pairs_separate_across_rounds(rows, cols):
    g = grid_topology(rows, cols)
    r = SuppressionRequirement.default(g)
    rng = np.random.default_rng(rows * 100 + cols)
    for trial in range(40):
        gates = random_matching(rng, g, int(rng.integers(2, 7)))
        remaining = list(gates)
        round_of = {}
        seeds = []
        rounds = 0
        while remaining:
            out = two_q_schedule(g, remaining, r, alpha=0.5)
            chosen = [remaining[i] for i in out.selected]
            if out.seed_pair is not None:
                seeds.append((remaining[out.seed_pair[0]], remaining[out.seed_pair[1]]))
            for gate in chosen:
                round_of[gate] = rounds
            remaining = [gate for i, gate in enumerate(remaining) if i not in out.selected]
            rounds += 1
            assert rounds <= len(gates)
        for a, b in seeds:
            assert round_of[a] != round_of[b]


# ------------------------------------------------------------- plan JSON


def test_plan_json_round_trip(g3):
    c = parse(EIGHT_QUBIT_PROGRAM)
    for plan in (schedule(g3, c), par_sched(g3, c)):
        again = plan_from_json(plan_to_json(plan))
        assert again == plan


def test_plan_json_round_trip_with_rz(g3):
    plan = schedule(g3, parse("rz 0.25 0\nrx90 0\nrz 0.5 0\n", num_qubits=9))
    again = plan_from_json(plan_to_json(plan))
    assert again == plan


# ------------------------------------------------------ property checks


_onequbit = st.tuples(st.sampled_from(["h", "x", "rx90", "s"]), st.integers(0, 8)).map(
    lambda t: Gate(t[0], (t[1],))
)
_rz = st.tuples(st.integers(0, 8), st.floats(-3, 3, allow_nan=False)).map(
    lambda t: Gate("rz", (t[0],), (t[1],))
)
_grid_edges = grid_topology(3, 3).edges
_twoqubit = st.tuples(st.sampled_from(list(_grid_edges)), st.booleans()).map(
    lambda t: Gate("cx", t[0] if t[1] else (t[0][1], t[0][0]))
)
_circuit_strategy = st.lists(
    st.one_of(_onequbit, _rz, _twoqubit), min_size=0, max_size=14
).map(lambda gs: Circuit(9, tuple(gs)))


@settings(max_examples=25, deadline=None)
@given(_circuit_strategy)
def test_schedule_invariants_random(c):
    g = grid_topology(3, 3)
    r = SuppressionRequirement.default(g)
    plan = schedule(g, c, r=r)
    assert_plan_valid(g, c, plan, require=r)


@settings(max_examples=25, deadline=None)
@given(_circuit_strategy)
def test_par_sched_invariants_random(c):
    g = grid_topology(3, 3)
    plan = par_sched(g, c)
    assert_plan_valid(g, c, plan)
