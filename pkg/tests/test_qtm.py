import itertools
import json
import math

import numpy as np
import pytest

from sparse_unitary import check_unitary, dilate, to_dense
from sparse_unitary.models import (RuleError, TransitionRule, TruncatedQTM, hadamard_head_rule,
                                   move_right_rule, qtm_dimension, qtm_run, qtm_step_bound,
                                   qtm_truncate, qtm_validate, random_unidirectional_rule,
                                   shared_support_distance)

# partial sums of 2 * sum_{n>=t} (pi/2)^n / n!, evaluated with mpmath at 30 digits
BOUND_ORACLE = {
    0: 9.6209547619307033,
    1: 7.6209547619307033,
    3: 2.0119610080685704,
    5: 0.21269379725398188,
    10: 5.8672045050922197e-5,
}


def brute_force_matrix(rule, t):
    """Matrix elements straight from the configuration list, no codec reuse."""
    cells = 2 * t + 1
    configs = [(p, q, tape) for p in range(-t, t + 1) for q in rule.states
               for tape in itertools.product(rule.alphabet, repeat=cells)]
    # the documented index order: position, then state, then tape little endian
    def key(c):
        p, q, tape = c
        code = sum(rule.alphabet.index(s) * len(rule.alphabet) ** k for k, s in enumerate(tape))
        return ((p + t) * len(rule.states) + rule.states.index(q)) * len(rule.alphabet) ** cells + code
    index = {c: key(c) for c in configs}
    assert sorted(index.values()) == list(range(len(configs)))
    m = np.zeros((len(configs), len(configs)), dtype=complex)
    for (p, q, tape), col in index.items():
        here = tape[p + t]
        for (q0, s0, q2, s2, d), a in rule.delta.items():
            if q0 != q or s0 != here:
                continue
            p2 = p + {"L": -1, "R": 1, "S": 0}[d]
            if not -t <= p2 <= t:
                continue
            new = list(tape)
            new[p + t] = s2
            m[index[p2, q2, tuple(new)], col] += a
    return m


def literal_coin_flip_rule():
    r = 1 / math.sqrt(2)
    delta = {}
    for q in ("q0", "q1"):
        delta[q, 0, "q0", 0, "L"] = r
        delta[q, 0, "q1", 0, "R"] = r
    return TransitionRule(("q0", "q1"), (0,), 0, delta)


class TestRule:
    def test_json_round_trip(self):
        rule = random_unidirectional_rule(2, 2, 3)
        back = TransitionRule.from_json(json.dumps(rule.to_json()))
        assert back.delta == rule.delta and back.states == rule.states

    def test_normalization_error_names_pair(self):
        rule = TransitionRule(("a",), (0, 1), 0, {("a", 0, "a", 0, "R"): 1.0,
                                                 ("a", 1, "a", 1, "R"): math.sqrt(0.5)})
        with pytest.raises(RuleError, match=r"q='a', sigma=1"):
            rule.check_normalized()
        with pytest.raises(RuleError, match="sigma=1"):
            qtm_validate(rule)

    def test_stay_needs_flag(self):
        with pytest.raises(RuleError):
            TransitionRule(("a",), (0,), 0, {("a", 0, "a", 0, "S"): 1.0})
        TransitionRule(("a",), (0,), 0, {("a", 0, "a", 0, "S"): 1.0}, allow_stay=True)

    @pytest.mark.parametrize("bad", [
        {"states": ["a"], "alphabet": [0], "blank": 0},
        {"states": ["a"], "alphabet": [0], "blank": 0,
         "delta": [{"q": "a", "sigma": 0, "q2": "b", "sigma2": 0, "dir": "R", "amp": [1, 0]}]},
        {"states": ["a"], "alphabet": [0], "blank": 2, "delta": []},
    ])
    def test_malformed_json(self, bad):
        with pytest.raises(RuleError):
            TransitionRule.from_json(bad)


class TestTruncation:
    def test_dimension_example(self):
        q = qtm_truncate(move_right_rule(("a", "b"), (0, 1)), 1)
        assert q.dim == 48 == qtm_dimension(1, 2, 2)

    @pytest.mark.parametrize("t", [1, 2, 3])
    @pytest.mark.parametrize("nq,ns", [(1, 2), (2, 2), (3, 2), (2, 3)])
    def test_dimension_and_sparsity(self, t, nq, ns):
        rule = random_unidirectional_rule(nq, ns, 10 * t + nq)
        m = qtm_truncate(rule, t)
        assert m.dim == (2 * t + 1) * nq * ns ** (2 * t + 1)
        assert m.row_counts().max() <= 2 * ns * nq
        assert m.col_counts().max() <= 2 * ns * nq

    def test_codec_bijective(self):
        qtm = TruncatedQTM(random_unidirectional_rule(2, 2, 0), 2)
        for i in range(qtm.dim):
            assert qtm.encode(*qtm.decode(i)) == i

    @pytest.mark.parametrize("rule", [
        move_right_rule(), hadamard_head_rule((0, 1)), random_unidirectional_rule(2, 2, 7),
        random_unidirectional_rule(3, 2, 8),
        TransitionRule(("a",), (0, 1), 0, {("a", 0, "a", 1, "S"): 1.0, ("a", 1, "a", 0, "L"): 1.0},
                       allow_stay=True),
    ])
    def test_matches_brute_force(self, rule):
        for t in (1, 2):
            np.testing.assert_array_equal(to_dense(qtm_truncate(rule, t)), brute_force_matrix(rule, t))

    def test_move_right_interior_columns(self):
        t = 2
        qtm = TruncatedQTM(move_right_rule(), t)
        m = to_dense(qtm.to_sparse())
        for col in range(qtm.dim):
            p, _, _ = qtm.decode(col)
            nz = np.flatnonzero(m[:, col])
            if p < t:
                assert len(nz) == 1 and m[nz[0], col] == 1
            else:
                assert len(nz) == 0

    def test_size_cap(self):
        with pytest.raises(ValueError, match="cap"):
            qtm_truncate(random_unidirectional_rule(2, 2, 0), 3, cap=100)

    def test_radius_zero_rejected(self):
        with pytest.raises(ValueError):
            qtm_truncate(move_right_rule(), 0)

    def test_output_dilates(self):
        d = dilate(qtm_truncate(hadamard_head_rule(), 2))
        assert not d.involutory and d.dim == 2 * 5 * 2 * 1


class TestValidate:
    def test_move_right(self):
        rep = qtm_validate(move_right_rule(), 3)
        assert rep.interior_unitary and rep.interior_defect == 0 and rep.boundary_defect > 0

    def test_hadamard_head(self):
        rep = qtm_validate(hadamard_head_rule((0, 1)), 3)
        assert rep.interior_unitary and rep.interior_defect <= 1e-10

    def test_literal_coin_flip_is_not_unitary(self):
        # equal +1/sqrt2 amplitudes from both states give identical column images
        rep = qtm_validate(literal_coin_flip_rule(), 3)
        assert not rep.interior_unitary
        assert rep.interior_defect == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_rules(self, seed):
        rule = random_unidirectional_rule(1 + seed % 3, 2, seed)
        assert qtm_validate(rule, 2).interior_unitary

    def test_non_unidirectional_unitary_table_fails(self):
        # a unitary (q, sigma) table with mixed directions into one state is not well formed
        r = 1 / math.sqrt(2)
        rule = TransitionRule(("a",), (0, 1), 0, {
            ("a", 0, "a", 0, "L"): r, ("a", 0, "a", 1, "R"): r,
            ("a", 1, "a", 0, "L"): r, ("a", 1, "a", 1, "R"): -r})
        assert not qtm_validate(rule, 3).interior_unitary


class TestBound:
    @pytest.mark.parametrize("t,val", BOUND_ORACLE.items())
    def test_values(self, t, val):
        assert qtm_step_bound(t) == pytest.approx(val, rel=1e-14)

    def test_closed_form_at_zero(self):
        assert qtm_step_bound(0) == pytest.approx(2 * math.exp(math.pi / 2), rel=1e-15)

    def test_decreasing(self):
        vals = [qtm_step_bound(t) for t in range(30)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_negative(self):
        with pytest.raises(ValueError):
            qtm_step_bound(-1)


class TestRun:
    def test_move_right(self):
        rule = move_right_rule()
        qtm = TruncatedQTM(rule, 4)
        v = qtm_run(rule, (1, 0, 1), steps=3, t=4)
        (i,) = np.flatnonzero(v)
        p, q, tape = qtm.decode(i)
        assert v[i] == 1 and p == 3 and q == "q0"
        assert tape == (0, 0, 0, 0, 1, 0, 1, 0, 0)

    def test_zero_steps(self):
        rule = hadamard_head_rule()
        v = qtm_run(rule, steps=0, t=1)
        assert np.count_nonzero(v) == 1 and v[TruncatedQTM(rule, 1).initial_index()] == 1

    def test_steps_must_be_below_radius(self):
        with pytest.raises(ValueError, match="smaller than the radius"):
            qtm_run(move_right_rule(), steps=3, t=3)

    def test_default_radius(self):
        v = qtm_run(move_right_rule(), steps=2)
        assert len(v) == qtm_dimension(3, 1, 2)

    def test_direct_matches_matrix_power(self):
        rule = random_unidirectional_rule(2, 2, 11)
        t, s = 3, 2
        m = to_dense(qtm_truncate(rule, t))
        e = np.zeros(m.shape[0], dtype=complex)
        e[TruncatedQTM(rule, t).initial_index((1, 0))] = 1
        np.testing.assert_allclose(qtm_run(rule, (1, 0), steps=s, t=t),
                                   np.linalg.matrix_power(m, s) @ e, atol=1e-14)

    @pytest.mark.parametrize("seed", range(8))
    def test_norm_within_bound(self, seed):
        rule = random_unidirectional_rule(1 + seed % 3, 2, 100 + seed)
        for t in range(2, 6):
            s = t - 1
            n = np.linalg.norm(qtm_run(rule, (1,), steps=s, t=t))
            assert 1 - s * qtm_step_bound(t) <= n <= 1 + 1e-12

    @pytest.mark.parametrize("seed", range(4))
    def test_radius_consistency(self, seed):
        rule = random_unidirectional_rule(2, 2, 200 + seed)
        t, s = 4, 3
        a = qtm_run(rule, (1, 1), steps=s, t=t)
        b = qtm_run(rule, (1, 1), steps=s, t=t + 2)
        assert shared_support_distance(a, t, b, t + 2, rule) <= s * qtm_step_bound(t)

    def test_direct_vs_dilation_coin_flip(self):
        rule = hadamard_head_rule()
        s, t, eps = 4, 5, 1e-4
        direct = qtm_run(rule, steps=s, t=t)
        via = qtm_run(rule, steps=s, t=t, method="dilation", epsilon=eps)
        assert np.linalg.norm(direct - via) <= s * qtm_step_bound(t) + s * eps

    def test_tape_too_long(self):
        with pytest.raises(ValueError, match="does not fit"):
            qtm_run(move_right_rule(), (0, 1, 0, 1), steps=1, t=2)

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="unknown method"):
            qtm_run(move_right_rule(), steps=1, method="magic")


def test_interior_block_unitary_for_random_rule():
    # columns away from the boundary form an isometry into the window
    rule = random_unidirectional_rule(2, 2, 5)
    qtm = TruncatedQTM(rule, 2)
    m = to_dense(qtm.to_sparse())
    interior = [c for c in range(qtm.dim) if abs(qtm.decode(c)[0]) <= 1]
    sub = m[:, interior]
    assert np.max(np.abs(sub.conj().T @ sub - np.eye(len(interior)))) <= 1e-12
    assert not check_unitary(qtm.to_sparse()).is_unitary
