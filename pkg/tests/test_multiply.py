import numpy as np
import pytest

from gramlin import (
    DimensionError,
    build_csrv,
    compress,
    csrv_left_mult,
    csrv_right_mult,
    grammar_stats,
    left_mult,
    left_mult_counted,
    op_counter,
    right_mult,
    right_mult_counted,
)

from helpers import random_case, relative_error


@pytest.fixture(scope="module")
def corpus():
    rng = np.random.default_rng(31)
    out = []
    for _ in range(60):
        mat = random_case(rng, max_rows=40, max_cols=20)
        out.append((mat, compress(build_csrv(mat)), rng))
    return out


def test_worked_example_products(worked_matrix):
    g = compress(build_csrv(worked_matrix))
    ones_m = np.ones(5)
    ones_n = np.ones(6)
    assert np.allclose(right_mult(g, ones_m), [12.5, 10.8, 11.4, 11.3, 9.1, 14.8])
    assert np.allclose(left_mult(g, ones_n), [11.6, 10.2, 20.4, 18.0, 9.7])


def test_matches_dense_oracle(corpus):
    for mat, g, rng in corpus:
        x = rng.standard_normal(mat.shape[1])
        y = rng.standard_normal(mat.shape[0])
        assert relative_error(right_mult(g, x), mat @ x) < 1e-12
        assert relative_error(left_mult(g, y), y @ mat) < 1e-12


def test_matches_sequence_kernels(corpus):
    # the grammar route and the flat-sequence route agree to rounding
    for mat, g, rng in corpus:
        c = build_csrv(mat)
        x = rng.standard_normal(mat.shape[1])
        y = rng.standard_normal(mat.shape[0])
        assert relative_error(right_mult(g, x), csrv_right_mult(c, x)) < 1e-12
        assert relative_error(left_mult(g, y), csrv_left_mult(c, y)) < 1e-12


def test_duality(corpus):
    # <y, M x> == <y M, x> for every case
    for mat, g, rng in corpus:
        x = rng.standard_normal(mat.shape[1])
        y = rng.standard_normal(mat.shape[0])
        lhs = float(y @ right_mult(g, x))
        rhs = float(left_mult(g, y) @ x)
        scale = max(1.0, abs(lhs))
        assert abs(lhs - rhs) / scale < 1e-10


def test_visit_counts_are_exact(corpus):
    for mat, g, _ in corpus:
        st = grammar_stats(g)
        _, ops_r = right_mult_counted(g, np.ones(mat.shape[1]))
        _, ops_l = left_mult_counted(g, np.ones(mat.shape[0]))
        assert ops_r.rule_visits == st.n_rules == g.n_rules
        assert ops_r.final_visits == st.final_symbols == len(g.final)
        assert ops_l == ops_r
        assert op_counter(g) == ops_r


def test_counted_results_match_fast_path(corpus):
    for mat, g, rng in corpus:
        x = rng.standard_normal(mat.shape[1])
        y = rng.standard_normal(mat.shape[0])
        yr, _ = right_mult_counted(g, x)
        xl, _ = left_mult_counted(g, y)
        assert np.array_equal(yr, right_mult(g, x))
        assert np.array_equal(xl, left_mult(g, y))


def test_rule_scratch_holds_partial_sums(worked_matrix):
    # scratch[i] is the full product contribution of rule i's expansion,
    # so evaluating each rule's terminal expansion must reproduce it
    g = compress(build_csrv(worked_matrix))
    x = np.arange(1.0, 6.0)
    scratch = np.empty(g.n_rules)
    right_mult(g, x, scratch=scratch)

    def eval_code(code):
        if code < g.base:
            t = code - 1
            return g.values[t // g.n_cols] * x[t % g.n_cols]
        return eval_code(int(g.rules[code - g.base, 0])) + eval_code(
            int(g.rules[code - g.base, 1])
        )

    for i in range(g.n_rules):
        expected = eval_code(int(g.rules[i, 0])) + eval_code(int(g.rules[i, 1]))
        assert abs(scratch[i] - expected) < 1e-12


def test_out_and_scratch_reuse(worked_matrix):
    g = compress(build_csrv(worked_matrix))
    x = np.linspace(-1.0, 1.0, 5)
    y = np.linspace(2.0, -2.0, 6)
    out_r = np.full(6, 123.0)
    out_l = np.full(5, 123.0)
    scratch = np.full(g.n_rules, 99.0)
    r1 = right_mult(g, x)
    l1 = left_mult(g, y)
    assert right_mult(g, x, out=out_r, scratch=scratch) is out_r
    assert left_mult(g, y, out=out_l, scratch=scratch) is out_l
    assert np.array_equal(out_r, r1)
    assert np.array_equal(out_l, l1)


def test_shape_validation(worked_matrix):
    g = compress(build_csrv(worked_matrix))
    with pytest.raises(DimensionError):
        right_mult(g, np.ones(6))
    with pytest.raises(DimensionError):
        left_mult(g, np.ones(5))
    with pytest.raises(DimensionError):
        right_mult(g, np.ones(5), out=np.ones(5))
    with pytest.raises(DimensionError):
        right_mult(g, np.ones(5), scratch=np.ones(g.n_rules + 1))


def test_zero_matrix_products():
    g = compress(build_csrv(np.zeros((4, 3))))
    assert np.array_equal(right_mult(g, np.ones(3)), np.zeros(4))
    assert np.array_equal(left_mult(g, np.ones(4)), np.zeros(3))
