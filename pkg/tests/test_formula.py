import io
import logging

import pytest
from pysat.solvers import Solver

import pykneser.exceptions as exc
from pykneser.formula import validate_inputs, gen_ant, gen_not_cons, gen_onto, gen_cnf, expected_counts, \
    make_clause, is_tautology, dimacs_text, write_dimacs, parse_dimacs, parse_dimacs_text, \
    brute_force_satisfiable, cnf_brute_force, BRUTE_FORCE_MAX_VARS
from pykneser.kneser import KSubset, count_stable, decode_var, var_id


def test_validate_inputs(caplog):
    for bad in [{'variant': 'petersen'}, {'domain': 'cyclic'}, {'variant': 'php', 'k': 2}, {'n': 3, 'k': 2}]:
        with pytest.raises(exc.FunctionInputFail):
            validate_inputs(**bad)
    with caplog.at_level(logging.WARNING):
        validate_inputs(n=5, k=2, colors=4)
    assert 'above the chromatic number 3' in caplog.text


def test_make_clause():
    assert make_clause([3, -1, 3, 2]) == (-1, 2, 3)
    assert make_clause([1, -1]) == (-1, 1)
    assert is_tautology((-1, 1))
    assert not is_tautology((-1, 2))


ant_validation = [(5, 2, 2, 'all', 10, 2),
                  (5, 2, 2, 'stable', 5, 2),
                  (3, 1, 2, 'all', 3, 2),
                  ]


@pytest.mark.parametrize('n, k, colors, domain, count, width', ant_validation)
def test_gen_ant(n, k, colors, domain, count, width):
    clauses = gen_ant(n, k, colors, domain)
    assert len(clauses) == count
    assert all(len(c) == width and all(l > 0 for l in c) for c in clauses)


not_cons_validation = [(5, 2, 2, 'all', 30),
                       (5, 2, 2, 'stable', 10),
                       (4, 2, 1, 'all', 3),
                       ]


@pytest.mark.parametrize('n, k, colors, domain, count', not_cons_validation)
def test_gen_not_cons(n, k, colors, domain, count):
    clauses = gen_not_cons(n, k, colors, domain)
    assert len(clauses) == count
    assert all(len(c) == 2 and c[0] < 0 and c[1] < 0 for c in clauses)


onto_validation = [(5, 2, 2, 'all', 10),
                   (7, 2, 4, 'all', 126),
                   (6, 2, 1, 'all', 0),
                   (6, 2, 1, 'stable', 0),
                   ]


@pytest.mark.parametrize('n, k, colors, domain, count', onto_validation)
def test_gen_onto(n, k, colors, domain, count):
    assert len(gen_onto(n, k, colors, domain)) == count


cnf_validation = [('kneser', 5, 2, None, 20, 40, False),
                  ('kneser', 4, 2, 2, 12, 6 + 6, True),
                  ('schrijver', 5, 2, None, 10, 15, False),
                  ('kneser-onto', 5, 2, None, 20, 50, False),
                  ('php', 4, 1, None, 12, 4 + 18, False),
                  ('php', 3, 1, 3, 9, 3 + 9, True),
                  ]


@pytest.mark.parametrize('variant, n, k, colors, num_vars, num_clauses, sat', cnf_validation)
def test_gen_cnf(variant, n, k, colors, num_vars, num_clauses, sat):
    cnf = gen_cnf(variant, n, k, colors)
    assert (cnf.num_vars, cnf.num_clauses) == (num_vars, num_clauses)
    satisfiable, model = cnf_brute_force(cnf)
    assert satisfiable == sat
    if sat:
        assignment = set(model)
        assert all(any(l in assignment for l in c) for c in cnf.clauses)


@pytest.mark.parametrize('variant', ['kneser', 'kneser-onto', 'schrijver', 'schrijver-onto'])
@pytest.mark.parametrize('k', [1, 2, 3])
def test_counts_match_closed_form(variant, k):
    for n in range(2 * k, 13):
        counts = expected_counts(variant, n, k)
        cnf = gen_cnf(variant, n, k)
        colors = n - 2 * k + 1
        size = count_stable(n, k) if variant.startswith('schrijver') else len(gen_ant(n, k, colors))
        assert cnf.num_vars == counts['vars'] == colors * size
        assert cnf.num_clauses == counts['clauses'] == counts['ant'] + counts['onto'] + counts['cons']


def test_shuffle_is_deterministic():
    a = gen_cnf('kneser', 7, 2, shuffle_seed=3)
    b = gen_cnf('kneser', 7, 2, shuffle_seed=3)
    plain = gen_cnf('kneser', 7, 2)
    assert dimacs_text(a) == dimacs_text(b)
    assert a.clauses != plain.clauses
    assert sorted(a.clauses) == sorted(plain.clauses)
    assert 'c seed=3' in dimacs_text(a)


def test_literal_decoding():
    cnf = gen_cnf('kneser', 5, 2)
    lit = cnf.literal(-4)
    assert lit.var.subset == KSubset.of(5, (1, 3))
    assert lit.var.color == 2
    assert not lit.positive
    assert lit.dimacs == -4


def test_dimacs_header_and_reparse(tmp_path):
    cnf = gen_cnf('schrijver', 7, 2, shuffle_seed=11)
    text = dimacs_text(cnf)
    assert 'p cnf {} {}'.format(cnf.num_vars, cnf.num_clauses) in text
    assert 'c domain=stable' in text
    assert 'c onto=' in text
    path = tmp_path / 'instance.cnf'
    write_dimacs(cnf, path)
    back = parse_dimacs(path)
    assert (back.variant, back.n, back.k, back.colors, back.domain, back.seed) == ('schrijver', 7, 2, 4, 'stable', 11)
    assert back.clauses == cnf.clauses

    sink = io.StringIO()
    write_dimacs(cnf, sink)
    assert sink.getvalue() == text


def test_parse_raw_dimacs():
    cnf = parse_dimacs_text('c hand written\np cnf 3 2\n1 -2 0\n2 3\n -1 0\n')
    assert cnf.variant == 'raw'
    assert cnf.clauses == [(1, -2), (-1, 2, 3)]


dimacs_error_validation = [('1 2 0\np cnf 2 1\n', 1),
                           ('p cnf 2 1\n1 x 0\n', 2),
                           ('p cnf 2 1\n1 3 0\n', 2),
                           ('p cnf 2 2\n1 2 0\n', 3),
                           ('p cnf 2 1\n1 2\n', 3),
                           ('p cnf 2\n1 2 0\n', 1),
                           ('p cnf 2 1\np cnf 2 1\n1 0\n', 2),
                           ('c nothing\n', 2),
                           ]


@pytest.mark.parametrize('text, line', dimacs_error_validation)
def test_parse_dimacs_errors(text, line):
    with pytest.raises(exc.DimacsParseFail) as info:
        parse_dimacs_text(text)
    assert info.value.line == line
    assert str(info.value).startswith('line {}:'.format(line))


def test_brute_force():
    assert brute_force_satisfiable([(1,), (-1,)], 1) == (False, None)
    assert brute_force_satisfiable([(1, 2), (-1,)], 2) == (True, (-1, 2))
    assert brute_force_satisfiable([()], 0) == (False, None)
    assert brute_force_satisfiable([(1, -2), (2, -3), (3, -1), (-1, -2)], 3, chunk_bits=1) == (True, (-1, -2, -3))
    with pytest.raises(exc.FunctionInputFail):
        brute_force_satisfiable([(1,)], BRUTE_FORCE_MAX_VARS + 1)


@pytest.mark.parametrize('variant, n, k', [('kneser', 5, 2), ('schrijver', 5, 2), ('schrijver', 6, 3),
                                           ('kneser', 6, 3), ('kneser', 4, 1), ('php', 4, 1)])
def test_boundary_instances_unsat_by_truth_table(variant, n, k):
    cnf = gen_cnf(variant, n, k)
    assert cnf.num_vars <= BRUTE_FORCE_MAX_VARS
    assert cnf_brute_force(cnf) == (False, None)


@pytest.mark.parametrize('n', range(2, 10))
def test_kneser_k1_is_php(n):
    kneser = gen_cnf('kneser', n, 1)
    php = gen_cnf('php', n, 1)
    assert kneser.num_vars == php.num_vars
    assert kneser.clauses == php.clauses


@pytest.mark.parametrize('variant', ['schrijver', 'schrijver-onto'])
@pytest.mark.parametrize('n, k', [(5, 2), (7, 2), (8, 3), (9, 2), (9, 4)])
def test_schrijver_is_subinstance_of_kneser(variant, n, k):
    sub = gen_cnf(variant, n, k)
    full = gen_cnf(variant.replace('schrijver', 'kneser'), n, k)

    def lift(lit):
        var = decode_var(abs(lit), n, k, sub.colors, stable=True)
        lifted = var_id(var.subset, var.color, full.colors)
        return lifted if lit > 0 else -lifted

    clauses = set(make_clause(c) for c in full.clauses)
    assert all(make_clause(lift(l) for l in c) in clauses for c in sub.clauses)


def _all_instances(n_max):
    for n in range(2, n_max + 1):
        yield 'php', n, 1
        for k in range(1, n // 2 + 1):
            for variant in ['kneser', 'kneser-onto', 'schrijver', 'schrijver-onto']:
                yield variant, n, k


@pytest.mark.parametrize('variant, n, k', list(_all_instances(9)))
def test_dimacs_round_trip(variant, n, k):
    cnf = gen_cnf(variant, n, k)
    assert parse_dimacs_text(dimacs_text(cnf)) == cnf


@pytest.mark.parametrize('colors, sat', [(3, True), (None, False)])
def test_petersen_instance_with_solver(colors, sat):
    cnf = gen_cnf('kneser', 5, 2, colors)
    with Solver(name='g3', bootstrap_with=cnf.clauses) as solver:
        assert solver.solve() == sat
        if sat:
            model = set(solver.get_model())
            assert all(any(l in model for l in c) for c in cnf.clauses)


@pytest.mark.parametrize('n, k', [(4, 2), (7, 3), (12, 3), (16, 5)])
def test_schrijver_counts_use_stable_count(n, k):
    counts = expected_counts('schrijver', n, k)
    assert counts['ant'] == count_stable(n, k)
    assert counts['vars'] == (n - 2 * k + 1) * count_stable(n, k)
