"""Greedy construction: reference sweep, peeling variant, status chain."""

import itertools
from collections import Counter, defaultdict
from fractions import Fraction

import pytest

from cayley_greedy import (
    CayleyTree,
    RandomSource,
    StatusCounts,
    chain_transitions,
    enumerate_all,
    enumeration_law,
    exact_chain_law,
    greedy_matching,
    greedy_peeling,
    greedy_reference,
    max_independent_set,
    prufer_decode,
    reference_chain_law,
    root_last_probability,
    sample_uniform,
    simulate_status_chain,
    simulate_status_chain_many,
    status_chain_step,
    tree_count,
    verify_symmetry_exact,
)
from cayley_greedy.greedy import (
    greedy_exploration_steps,
    greedy_markov_peeling,
    law_to_json_dict,
    total_variation_exact,
    write_outcomes_csv,
)
from cayley_greedy.stats import EmpiricalDistribution

CENTER_1 = CayleyTree(3, (3, 1))  # path 2-1-3, center 1, rooted at 3
CENTER_2 = CayleyTree(3, (2, 3))  # path 1-2-3, center 2
CENTER_3 = CayleyTree(3, (3, 3))  # star at 3


class FakeRng:
    """Feeds a preset list of uniforms to status_chain_step."""

    def __init__(self, values):
        self._values = list(values)

    def uniform(self):
        return self._values.pop(0)


# ---------------------------------------------------------------------------
# Reference sweep
# ---------------------------------------------------------------------------

def test_reference_path_center_one():
    assert greedy_reference(CENTER_1, (1, 2, 3)) == {1}


def test_reference_path_center_two():
    assert greedy_reference(CENTER_2, (1, 2, 3)) == {1, 3}


def test_reference_two_vertices_any_order():
    t = CayleyTree(2, (2,))
    assert greedy_reference(t, (1, 2)) == {1}
    assert greedy_reference(t, (2, 1)) == {2}


def test_reference_requires_permutation():
    with pytest.raises(ValueError):
        greedy_reference(CENTER_1, (1, 1, 3))


def _is_independent(tree, vertices):
    return not any(v != tree.n and tree.parent_of(v) in vertices for v in vertices)


def _is_maximal(tree, vertices):
    adj = tree.adjacency()
    return all(
        v in vertices or any(w in vertices for w in adj[v])
        for v in range(1, tree.n + 1)
    )


def test_reference_result_independent_and_maximal_random():
    rng = RandomSource(314)
    for i in range(20):
        n = 2 + rng.integer(0, 40)
        t = sample_uniform(n, rng.child(i))
        order = (rng.child(1000 + i).generator.permutation(n) + 1).tolist()
        result = greedy_reference(t, order)
        assert _is_independent(t, result)
        assert _is_maximal(t, result)


def test_reference_label_order_law_invariant_under_reversal():
    # relabeling symmetry: over all trees of a given size, the size of the
    # greedy set has the same exact law whatever fixed inspection order is used
    n = 5
    identity = tuple(range(1, n + 1))
    reverse = tuple(range(n, 0, -1))
    law_a = Counter(len(greedy_reference(t, identity)) for t in enumerate_all(n))
    law_b = Counter(len(greedy_reference(t, reverse)) for t in enumerate_all(n))
    assert law_a == law_b


# ---------------------------------------------------------------------------
# Peeling variant
# ---------------------------------------------------------------------------

def test_peeling_outcome_center_1():
    out = greedy_peeling(CENTER_1)
    assert (out.size, out.steps, out.root_last) == (1, 2, 0)
    assert out.active_set == {1}


def test_peeling_outcome_center_2():
    out = greedy_peeling(CENTER_2)
    assert (out.size, out.steps, out.root_last) == (2, 2, 1)
    assert out.active_set == {1, 3}


def test_peeling_outcome_center_3():
    out = greedy_peeling(CENTER_3)
    assert (out.size, out.steps, out.root_last) == (2, 2, 0)
    assert out.active_set == {1, 2}


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_peeling_equals_reference_exhaustive(n):
    order = tuple(range(1, n + 1))
    for t in enumerate_all(n):
        out = greedy_peeling(t)
        assert out.active_set == greedy_reference(t, order)
        assert _is_independent(t, out.active_set)
        assert _is_maximal(t, out.active_set)
        assert out.size + (n - out.size) == n


def test_peeling_trace_conserves_total():
    rng = RandomSource(99)
    t = sample_uniform(40, rng)
    out, rows = greedy_peeling(t, trace=True)
    n = t.n
    for before, after in rows:
        assert sum(before) == n and sum(after) == n
        # statuses never revert: determined counts are monotone
        assert after.undetermined < before.undetermined
        assert all(a >= b for a, b in zip(after[1:], before[1:]))
    assert rows[-1][1].undetermined == 0
    assert out.size == rows[-1][1].active_white + rows[-1][1].active_blue


def test_exploration_steps_match_outcome():
    rng = RandomSource(123)
    for i in range(10):
        t = sample_uniform(2 + rng.integer(0, 30), rng.child(i))
        steps, out = greedy_exploration_steps(t)
        ref = greedy_peeling(t)
        assert (out.size, out.steps, out.root_last) == (ref.size, ref.steps, ref.root_last)
        assert len(steps) == out.steps - out.root_last
        # edges belong to the tree and children are all distinct
        assert all(t.parent_of(s.peeled) == s.parent for s in steps)
        assert len({s.peeled for s in steps}) == len(steps)


# ---------------------------------------------------------------------------
# Status-chain transitions against the tree-backed construction
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [3, 4, 5])
def test_chain_increments_match_trees_exactly(n):
    """Exact conditional increment frequencies over all trees equal the
    one-step law of the status chain, state by state."""
    grouped = defaultdict(Counter)
    for t in enumerate_all(n):
        _, rows = greedy_peeling(t, trace=True)
        for before, after in rows:
            grouped[before][after] += 1
    for state, counter in grouped.items():
        total = sum(counter.values())
        expected = dict(
            (target, prob) for prob, target in chain_transitions(state, n)
        )
        assert set(counter) == set(expected)
        for target, count in counter.items():
            assert Fraction(count, total) == expected[target]


def test_chain_transitions_start_state_n5():
    cols = chain_transitions(StatusCounts(5, 0, 0, 0, 0), 5)
    assert (Fraction(3, 5), StatusCounts(3, 1, 1, 0, 0)) in cols
    assert (Fraction(2, 5), StatusCounts(3, 0, 0, 1, 1)) in cols
    assert len(cols) == 2


def test_chain_transitions_terminal_rule():
    cols = chain_transitions(StatusCounts(1, 2, 3, 0, 0), 6)
    assert cols == [(Fraction(1), StatusCounts(0, 2, 3, 1, 0))]


def test_chain_transitions_blue_regime_example():
    # state (1, 1, 0, 1, 1) at n = 4: blue columns weigh 3/8 each,
    # the white active column 1/4, and the pair column vanishes
    cols = dict(
        (target, prob) for prob, target in chain_transitions(StatusCounts(1, 1, 0, 1, 1), 4)
    )
    assert cols[StatusCounts(0, 1, 1, 1, 1)] == Fraction(1, 4)
    assert cols[StatusCounts(0, 1, 0, 1, 2)] == Fraction(3, 8)
    assert cols[StatusCounts(0, 1, 0, 2, 1)] == Fraction(3, 8)


def test_chain_transitions_rejects_bad_states():
    with pytest.raises(ValueError):
        chain_transitions(StatusCounts(0, 2, 2, 1, 1), 6)
    with pytest.raises(ValueError):
        chain_transitions(StatusCounts(1, 1, 1, 2, 0), 5)


def test_status_chain_step_threshold_boundaries():
    # regime 1 at (4,0,0,0,0), n=4: pair below 1/2, root connection above
    state = StatusCounts(4, 0, 0, 0, 0)
    assert status_chain_step(state, 4, FakeRng([0.49])) == StatusCounts(2, 1, 1, 0, 0)
    assert status_chain_step(state, 4, FakeRng([0.51])) == StatusCounts(2, 0, 0, 1, 1)
    # regime 2 at (1,1,0,1,1), n=4: white-active column up to 1/4, then the
    # blue-blocked column up to 1/4 + 3/8 = 5/8, blue-active above
    state = StatusCounts(1, 1, 0, 1, 1)
    assert status_chain_step(state, 4, FakeRng([0.2])) == StatusCounts(0, 1, 1, 1, 1)
    assert status_chain_step(state, 4, FakeRng([0.5])) == StatusCounts(0, 1, 0, 1, 2)
    assert status_chain_step(state, 4, FakeRng([0.7])) == StatusCounts(0, 1, 0, 2, 1)
    # terminal rule consumes no randomness
    assert status_chain_step(StatusCounts(1, 0, 0, 0, 0), 2, FakeRng([])) == \
        StatusCounts(0, 0, 0, 1, 0)


def test_simulate_status_chain_small_sizes():
    out = simulate_status_chain(1, RandomSource(0))
    assert (out.size, out.steps, out.root_last) == (1, 1, 1)
    for seed in range(6):
        out = simulate_status_chain(2, RandomSource(seed))
        assert (out.size, out.steps, out.root_last) == (1, 1, 0)


def test_simulate_status_chain_law_n3():
    rng = RandomSource(1234)
    sizes = Counter(
        simulate_status_chain(3, rng.child(i)).size for i in range(20_000)
    )
    assert abs(sizes[1] / 20_000 - 1 / 3) < 0.02
    assert abs(sizes[2] / 20_000 - 2 / 3) < 0.02


def test_batch_chain_reproducible_and_matches_exact_law():
    rng = RandomSource(777)
    g1, t1, e1 = simulate_status_chain_many(5, 60_000, rng)
    g2, t2, e2 = simulate_status_chain_many(5, 60_000, RandomSource(777))
    assert (g1 == g2).all() and (t1 == t2).all() and (e1 == e2).all()
    law = exact_chain_law(5)
    emp = EmpiricalDistribution.from_samples(g1.tolist())
    assert emp.tv_to(law.size_law()) < 0.01
    emp_t = EmpiricalDistribution.from_samples(t1.tolist())
    assert emp_t.tv_to(law.steps_law()) < 0.01
    assert abs(e1.mean() - float(law.root_last_probability())) < 0.01


def test_batch_chain_joint_law_matches_exact_n4():
    rng = RandomSource(778)
    g, t, e = simulate_status_chain_many(4, 60_000, rng)
    law = exact_chain_law(4)
    emp = Counter(zip(g.tolist(), t.tolist(), e.tolist()))
    for key, prob in law.joint.items():
        assert abs(emp.get(key, 0) / 60_000 - float(prob)) < 0.01


def test_greedy_markov_peeling_matches_exact_law():
    rng = RandomSource(779)
    outs = [greedy_markov_peeling(4, rng.child(i))[1] for i in range(30_000)]
    law = exact_chain_law(4)
    emp = EmpiricalDistribution.from_samples(o.size for o in outs)
    assert emp.tv_to(law.size_law()) < 0.01
    for steps, out in (greedy_markov_peeling(9, rng.child(i)) for i in range(50)):
        assert len(steps) == out.steps - out.root_last


# ---------------------------------------------------------------------------
# Exact law
# ---------------------------------------------------------------------------

def test_exact_law_n2():
    law = exact_chain_law(2)
    assert law.joint == {(1, 1, 0): Fraction(1)}


def test_exact_law_n3():
    law = exact_chain_law(3)
    assert law.size_law() == {1: Fraction(1, 3), 2: Fraction(2, 3)}
    assert law.root_last_probability() == Fraction(1, 3)
    # complement-plus-indicator has the same law, exactly
    assert law.complement_law() == law.size_law()


def test_exact_law_n4_frozen_values():
    # independently derived by exhaustive enumeration of the 16 trees
    law = exact_chain_law(4)
    assert law.size_law() == {
        1: Fraction(1, 16), 2: Fraction(3, 4), 3: Fraction(3, 16)
    }
    assert law.steps_law() == {2: Fraction(3, 8), 3: Fraction(5, 8)}
    assert law.root_last_probability() == Fraction(1, 4)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_exact_law_equals_enumeration(n):
    assert exact_chain_law(n).joint == enumeration_law(n).joint


@pytest.mark.parametrize("n", [2, 3, 5, 8, 10])
def test_exact_law_equals_reference_chain(n):
    assert exact_chain_law(n).joint == reference_chain_law(n).joint


def test_exact_law_cap():
    with pytest.raises(ValueError):
        exact_chain_law(61)
    law = exact_chain_law(61, cap=61)
    assert law.n == 61


def test_symmetry_exact_small():
    for n in (2, 3, 5, 8, 13, 21):
        check = verify_symmetry_exact(n)
        assert check.tv == 0
    assert verify_symmetry_exact(6, cross_check=True).tv == 0


def test_root_last_probability_values():
    assert root_last_probability(2) == 0
    assert root_last_probability(3) == Fraction(1, 3)
    assert root_last_probability(4) == Fraction(1, 4)
    assert root_last_probability(5) == Fraction(33, 125)


def test_root_last_conditioned_identity_runs():
    # the internal exact identity (conditioned-chain survival expectation)
    # is asserted inside the call for every n >= 3
    for n in range(3, 26):
        root_last_probability(n)


def test_survival_expectation_coincides_at_n3():
    # at size three the stopping step is deterministically 2, so the naive
    # survival expectation over the unconditioned law also gives 1/3
    law = exact_chain_law(3)
    z = Fraction(1, 3)
    naive = sum(p * z ** (t - 1) for t, p in law.steps_law().items())
    assert naive == root_last_probability(3) == Fraction(1, 3)


def test_law_moments_match_enumeration_n6():
    law = exact_chain_law(6)
    sizes = [greedy_peeling(t).size for t in enumerate_all(6)]
    mean = Fraction(sum(sizes), tree_count(6))
    assert law.size_mean() == mean


def test_total_variation_exact():
    p = {1: Fraction(1, 2), 2: Fraction(1, 2)}
    q = {1: Fraction(1, 2), 3: Fraction(1, 2)}
    assert total_variation_exact(p, p) == 0
    assert total_variation_exact(p, q) == Fraction(1, 2)


# ---------------------------------------------------------------------------
# Greedy matching and maximum independent set
# ---------------------------------------------------------------------------

def test_matching_two_vertices():
    assert greedy_matching(CayleyTree(2, (2,)), [1]) == 1


def test_matching_path_three_any_order():
    for order in itertools.permutations([1, 2]):
        assert greedy_matching(CENTER_2, order) == 1


def test_matching_requires_edge_permutation():
    with pytest.raises(ValueError):
        greedy_matching(CENTER_2, [1, 1])


def test_matching_is_maximal_random():
    rng = RandomSource(888)
    for i in range(15):
        n = 3 + rng.integer(0, 25)
        t = sample_uniform(n, rng.child(i))
        order = (rng.child(100 + i).generator.permutation(n - 1) + 1).tolist()
        matched = set()
        kept = []
        for v in order:
            p = t.parent_of(v)
            if v not in matched and p not in matched:
                matched.update((v, p))
                kept.append(v)
        assert len(kept) == greedy_matching(t, order)
        # maximality: every unkept edge touches a matched endpoint
        for v in range(1, n):
            assert v in matched or t.parent_of(v) in matched


def _max_is_brute(tree):
    n = tree.n
    best = 0
    edges = list(tree.edges())
    for mask in range(1 << n):
        chosen = {v for v in range(1, n + 1) if mask & (1 << (v - 1))}
        if all(not (a in chosen and b in chosen) for a, b in edges):
            best = max(best, len(chosen))
    return best


def test_max_is_examples():
    assert max_independent_set(CENTER_2) == 2
    assert max_independent_set(prufer_decode([4, 4], 4)) == 3
    assert max_independent_set(CayleyTree(1, ())) == 1


def test_max_is_matches_brute_force_random():
    rng = RandomSource(901)
    for i in range(25):
        n = 2 + rng.integer(0, 9)
        t = sample_uniform(n, rng.child(i))
        assert max_independent_set(t) == _max_is_brute(t)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def test_write_outcomes_csv(tmp_path):
    path = tmp_path / "out.csv"
    write_outcomes_csv(
        [
            {"n": 3, "replicate": 0, "G": 2, "theta": 2, "E": 1},
            {"n": 3, "replicate": 1, "M": 1},
        ],
        str(path),
    )
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,replicate,G,theta,E,M,maxIS"
    assert lines[1] == "3,0,2,2,1,,"
    assert lines[2] == "3,1,,,,1,"


def test_law_to_json_dict():
    payload = law_to_json_dict(exact_chain_law(3))
    assert payload["n"] == 3
    assert payload["size_law"]["1"]["fraction"] == "1/3"
    assert abs(payload["size_law"]["2"]["float"] - 2 / 3) < 1e-15
    assert payload["root_last_probability"]["fraction"] == "1/3"
