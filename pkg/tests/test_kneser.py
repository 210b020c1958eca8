import logging
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import pykneser.exceptions as exc
from pykneser.kneser import validate_inputs, KSubset, enum_ksubsets, colex_rank, colex_unrank, is_stable, \
    enum_stable, count_stable, disjoint, firsts, chromatic_number, default_colors, domain_rank, var_id, \
    decode_var, Coloring, random_coloring, subset_from_mask


def S(n, *elements):
    return KSubset.of(n, elements)


def test_validate_inputs(caplog):
    kwargs = {'n': 6, 'k': 2, 'colors': 3, 'r': 1}
    for inp in ['n', 'k', 'colors', 'r']:
        for non_integer in [None, 'string', np.nan, 2.5, True]:
            kwargs[inp] = non_integer
            with pytest.raises(exc.FunctionInputFail):
                validate_inputs(**kwargs)
        kwargs[inp] = {'n': 6, 'k': 2, 'colors': 3, 'r': 1}[inp]

    for bad in [{'n': 3, 'k': 2}, {'k': 0}, {'colors': 0}, {'r': -1}]:
        with pytest.raises(exc.FunctionInputFail):
            validate_inputs(**bad)

    with caplog.at_level(logging.WARNING):
        validate_inputs(n=25, k=2)
    assert 'Ground set size, n, is outside desk-scale boundaries (n <= 24), enumeration may be slow.' in caplog.text


def test_ksubset_validation():
    for elements in [(), (2, 1), (1, 1), (0, 2), (1, 6)]:
        with pytest.raises(exc.FunctionInputFail):
            KSubset(elements, 5)
    assert str(S(5, 3, 1)) == '{1,3}'
    assert S(5, 1, 3).mask == 0b101
    assert subset_from_mask(0b10010, 5) == S(5, 2, 5)


enum_validation = [(3, 1, ['{1}', '{2}', '{3}']),
                   (4, 2, ['{1,2}', '{1,3}', '{2,3}', '{1,4}', '{2,4}', '{3,4}']),
                   ]


@pytest.mark.parametrize('n, k, expected', enum_validation)
def test_enum_ksubsets(n, k, expected):
    assert [str(A) for A in enum_ksubsets(n, k)] == expected


def test_enum_ksubsets_5_2():
    sets = enum_ksubsets(5, 2)
    assert len(sets) == 10
    assert sets[0] == S(5, 1, 2)
    assert sets[-1] == S(5, 4, 5)
    assert list(sets) == sorted(sets)


colex_validation = [(S(5, 1, 2), 0),
                    (S(4, 1, 3), 1),
                    (S(5, 4, 5), 9),
                    (S(7, 1, 2, 3), 0),
                    (S(7, 5, 6, 7), 34),
                    ]


@pytest.mark.parametrize('A, rank', colex_validation)
def test_colex_rank(A, rank):
    assert colex_rank(A) == rank
    assert colex_unrank(rank, A.n, A.k) == A


def test_colex_unrank_out_of_range():
    with pytest.raises(exc.FunctionInputFail):
        colex_unrank(10, 5, 2)
    with pytest.raises(exc.FunctionInputFail):
        colex_unrank(-1, 5, 2)


@given(n=st.integers(2, 12), data=st.data())
def test_rank_unrank_agree_with_enumeration(n, data):
    k = data.draw(st.integers(1, n // 2))
    r = data.draw(st.integers(0, math.comb(n, k) - 1))
    A = colex_unrank(r, n, k)
    assert colex_rank(A) == r
    assert enum_ksubsets(n, k)[r] == A


stable_validation = [(S(5, 1, 3), True),
                     (S(5, 1, 5), False),
                     (S(5, 2, 3), False),
                     (S(7, 2, 4, 6), True),
                     (S(7, 1, 3, 7), False),
                     (S(3, 2), True),
                     ]


@pytest.mark.parametrize('A, stable', stable_validation)
def test_is_stable(A, stable):
    assert is_stable(A) == stable


@given(n=st.integers(4, 12), data=st.data())
def test_is_stable_matches_cyclic_adjacency(n, data):
    k = data.draw(st.integers(2, n // 2))
    A = colex_unrank(data.draw(st.integers(0, math.comb(n, k) - 1)), n, k)
    adjacent = any((a % n) + 1 == b or (b % n) + 1 == a for a in A for b in A if a != b)
    assert is_stable(A) == (not adjacent)


enum_stable_validation = [(5, 2, [S(5, 1, 3), S(5, 1, 4), S(5, 2, 4), S(5, 2, 5), S(5, 3, 5)]),
                          (6, 3, [S(6, 1, 3, 5), S(6, 2, 4, 6)]),
                          (4, 2, [S(4, 1, 3), S(4, 2, 4)]),
                          ]


@pytest.mark.parametrize('n, k, expected', enum_stable_validation)
def test_enum_stable(n, k, expected):
    assert list(enum_stable(n, k)) == expected


@pytest.mark.parametrize('n', range(2, 13))
def test_count_stable_closed_form(n):
    for k in range(1, n // 2 + 1):
        assert count_stable(n, k) == len(enum_stable(n, k))


def test_disjoint_and_firsts():
    assert disjoint(S(5, 1, 2), S(5, 3, 4))
    assert not disjoint(S(5, 1, 2), S(5, 2, 3))
    assert firsts(S(7, 2, 5, 7), 2) == S(7, 2, 5)
    assert firsts(S(3, 1, 2, 3), 3) == S(3, 1, 2, 3)
    assert firsts(S(10, 3, 9, 10), 2) == S(10, 3, 9)
    with pytest.raises(exc.FunctionInputFail):
        firsts(S(5, 1, 2), 3)


def test_chromatic_number():
    assert chromatic_number(5, 2) == 3
    assert default_colors(5, 2) == 2
    assert default_colors(12, 3) == 7


var_validation = [(S(5, 1, 2), 1, 2, False, 1),
                  (S(5, 1, 3), 2, 2, False, 4),
                  (S(5, 4, 5), 2, 2, False, 20),
                  (S(5, 1, 4), 1, 2, True, 3),
                  (S(5, 3, 5), 2, 2, True, 10),
                  ]


@pytest.mark.parametrize('A, color, colors, stable, expected', var_validation)
def test_var_id(A, color, colors, stable, expected):
    assert var_id(A, color, colors, stable) == expected
    var = decode_var(expected, A.n, A.k, colors, stable)
    assert (var.subset, var.color, var.id) == (A, color, expected)


def test_var_id_errors():
    with pytest.raises(exc.FunctionInputFail):
        var_id(S(5, 1, 2), 3, 2)
    with pytest.raises(exc.FunctionInputFail):
        domain_rank(S(5, 1, 2), stable=True)
    with pytest.raises(exc.FunctionInputFail):
        decode_var(21, 5, 2, 2)


def test_coloring():
    c = Coloring.from_function(5, 2, 2, lambda A: 1 if 1 in A else 2)
    assert c.color_of(S(5, 1, 4)) == 1
    assert c.color_of(S(5, 2, 3)) == 2
    assert len(c.color_class(1)) == 4
    assert sum(len(v) for v in c.classes().values()) == 10

    with pytest.raises(exc.FunctionInputFail):
        Coloring(5, 2, 2, (1,) * 9)
    with pytest.raises(exc.FunctionInputFail):
        Coloring(5, 2, 2, (3,) * 10)

    stable = random_coloring(5, 2, 2, np.random.default_rng(1), stable=True)
    assert len(stable.assignment) == 5
    assert set(stable.assignment) <= {1, 2}


@pytest.mark.parametrize('n', range(2, 11))
def test_rank_unrank_exhaustive(n):
    for k in range(1, n // 2 + 1):
        sets = enum_ksubsets(n, k)
        assert len(sets) == math.factorial(n) // (math.factorial(k) * math.factorial(n - k))
        for r, A in enumerate(sets):
            assert colex_rank(A) == r
            assert colex_unrank(r, n, k) == A


@pytest.mark.parametrize('stable', [False, True])
@pytest.mark.parametrize('n', range(2, 11))
def test_var_numbering_is_a_bijection(n, stable):
    for k in range(1, n // 2 + 1):
        colors = default_colors(n, k)
        sets = enum_stable(n, k) if stable else enum_ksubsets(n, k)
        ids = [var_id(A, c, colors, stable) for A in sets for c in range(1, colors + 1)]
        assert ids == list(range(1, colors * len(sets) + 1))
        for i in ids:
            var = decode_var(i, n, k, colors, stable)
            assert var_id(var.subset, var.color, colors, stable) == i


@pytest.mark.parametrize('k', range(1, 6))
def test_two_stable_sets_at_2k(k):
    stable = enum_stable(2 * k, k)
    assert len(stable) == 2
    assert stable[0].mask | stable[1].mask == (1 << 2 * k) - 1


def test_petersen_graph_is_3_regular():
    sets = enum_ksubsets(5, 2)
    assert all(sum(disjoint(A, B) for B in sets) == 3 for A in sets)
