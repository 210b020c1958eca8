import io
import logging

import numpy as np
import pytest

import pykneser.exceptions as exc
from pykneser.kneser import Coloring, KSubset, random_coloring
from pykneser.oracle import validate_inputs, find_mono_disjoint, class_trichotomy_k2, four_set_lemma, \
    compute_chain_k2, n_bound_k2, n_bound_k2_max, final_contradiction, audit_k2, star_coloring, greedy_abc, \
    partition_ABCD, class_bound_k3, find_mono_disjoint_k3, n3_bound, n3_bound_variants, failed_program_witnesses, \
    star_family, sunflower_family, triangle_family, hilton_milner_family, structured_families, trichotomy_campaign, \
    four_set_campaign, audit_campaign, k3_family_campaign, witness_campaign, write_report, report_passed, \
    DISJOINT_PAIR, COMMON_ELEMENT, SMALL, DISJOINT_AMONG, STAR_POINT, FINDING_COLUMNS


def S(n, *elements):
    return KSubset.of(n, elements)


def family(n, *sets):
    return [S(n, *A) for A in sets]


def test_validate_inputs(caplog):
    for bad in [{'n': 2.5}, {'samples': 0}, {'workers': 0}, {'seed': 'x'}, {'n': 4, 'n_min': 5}]:
        with pytest.raises(exc.FunctionInputFail):
            validate_inputs(**bad)
    with caplog.at_level(logging.WARNING):
        validate_inputs(n=15)
    assert 'outside oracle boundaries' in caplog.text


def test_find_mono_disjoint():
    rng = np.random.default_rng(3)
    for _ in range(20):
        coloring = random_coloring(6, 2, 3, rng)
        pair = find_mono_disjoint(coloring)
        assert not pair.first.mask & pair.second.mask
        assert coloring.color_of(pair.first) == coloring.color_of(pair.second) == pair.color
    with pytest.raises(exc.FunctionInputFail):
        find_mono_disjoint(Coloring(5, 2, 3, (1,) * 10))


trichotomy_validation = [(family(5, (1, 2), (3, 4)), DISJOINT_PAIR, None),
                         (family(5, (1, 2), (1, 3), (2, 3), (4, 5)), DISJOINT_PAIR, None),
                         (family(5, (1, 2), (1, 3), (1, 4), (1, 5)), COMMON_ELEMENT, 1),
                         (family(6, (1, 2), (1, 3)), COMMON_ELEMENT, 1),
                         (family(5, (1, 2), (1, 3), (2, 3)), SMALL, None),
                         (family(7, (4, 6)), COMMON_ELEMENT, 4),
                         ([], SMALL, None),
                         ]


@pytest.mark.parametrize('members, alternative, element', trichotomy_validation)
def test_class_trichotomy_k2(members, alternative, element):
    verdict = class_trichotomy_k2(members)
    assert verdict.alternative == alternative
    assert verdict.element == element
    assert verdict.size == len(members)
    if alternative == DISJOINT_PAIR:
        D, E = verdict.pair
        assert not D.mask & E.mask


def test_class_trichotomy_k2_errors():
    with pytest.raises(exc.FunctionInputFail):
        class_trichotomy_k2(family(4, (1, 2), (3, 4)))
    with pytest.raises(exc.FunctionInputFail):
        class_trichotomy_k2(family(5, (1, 2), (1, 2)))
    with pytest.raises(exc.FunctionInputFail):
        class_trichotomy_k2(family(5, (1, 2, 3)))


def test_trichotomy_exhaustive_n5():
    frame = trichotomy_campaign(5)
    assert report_passed(frame)
    assert len(frame) == 1
    counts = dict(item.split('=') for item in frame['witness'][0].split())
    assert sum(int(v) for v in counts.values()) == 2 ** 10
    assert set(counts) == {DISJOINT_PAIR, COMMON_ELEMENT, SMALL}


def test_trichotomy_campaign_parallel_matches_serial():
    assert trichotomy_campaign(5, workers=2).equals(trichotomy_campaign(5))
    first = trichotomy_campaign(7, samples=200, seed=1, workers=2)
    assert first.equals(trichotomy_campaign(7, samples=200, seed=1, workers=2))
    assert report_passed(first)


def test_four_set_lemma():
    verdict = four_set_lemma(*family(5, (1, 2), (1, 3), (1, 4), (1, 5)))
    assert verdict == (STAR_POINT, None, 1, 5)
    verdict = four_set_lemma(*family(5, (1, 2), (1, 3), (2, 3), (1, 4)))
    assert verdict.alternative == DISJOINT_AMONG
    assert verdict.pair == (S(5, 2, 3), S(5, 1, 4))
    with pytest.raises(exc.FunctionInputFail):
        four_set_lemma(*family(5, (1, 2), (1, 2), (2, 3), (1, 4)))


def test_four_set_campaign():
    frame = four_set_campaign(5)
    assert report_passed(frame)
    assert 'quadruples=210' in frame['params'][0]
    assert '{}=5'.format(STAR_POINT) in frame['witness'][0]


def test_chain_constant_coloring():
    row = compute_chain_k2(Coloring(6, 2, 3, (1,) * 15), 1)
    assert (row.M, row.p, row.N) == (15, 0, 3)
    assert (row.M1, row.M2, row.Q1) == (0, 15, 0)
    assert row.witness is not None
    assert row.witness.color == 1


chain_star_validation = [(0, 0, 0, 0, 0, 0, None),
                         (1, 1, 1, 1, 5, 5, None),
                         (2, 2, 2, 2, 9, 9, None),
                         (3, 2, 2, 2, 15, 12, 3),
                         ]


@pytest.mark.parametrize('r, p, s, q, M, N, witness_color', chain_star_validation)
def test_chain_star_coloring(r, p, s, q, M, N, witness_color):
    row = compute_chain_k2(star_coloring(6, 2), r)
    assert (row.r, row.p, row.s, row.q, row.M, row.N) == (r, p, s, q, M, N)
    assert row.U == q * (q - 1) // 2
    assert (row.witness.color if row.witness else None) == witness_color


def test_chain_errors():
    with pytest.raises(exc.FunctionInputFail):
        compute_chain_k2(star_coloring(6, 2), 4)
    with pytest.raises(exc.FunctionInputFail):
        compute_chain_k2(star_coloring(7, 3), 1)


n_bound_validation = [(6, 0, 9),
                      (6, 1, 11),
                      (6, 2, 12),
                      (6, 3, 12),
                      (7, 4, 18),
                      ]


@pytest.mark.parametrize('n, p, expected', n_bound_validation)
def test_n_bound_k2(n, p, expected):
    assert n_bound_k2(n, p) == expected


def test_n_bound_k2_max_and_final_arithmetic():
    assert n_bound_k2_max(6) == 12
    for n in range(5, 30):
        assert n_bound_k2_max(n) == n * (n - 1) // 2 - 3
        final = final_contradiction(n)
        assert 2 * final.lhs == 2 * n * n - 8 * n + 12
        assert 2 * final.rhs == 2 * n * n - 8 * n + 6
        assert final.contradiction
    assert final_contradiction(6)[1:] == (18, 15)
    with pytest.raises(exc.FunctionInputFail):
        n_bound_k2(6, 4)


def test_audit_star_coloring():
    audit = audit_k2(star_coloring(6, 2))
    assert audit.passed
    assert audit.witness.color == 3
    assert audit.conclusion.endswith('from r=3')
    frame = audit.to_frame()
    assert list(frame.columns) == FINDING_COLUMNS
    conditional = frame[frame['kind'] == 'M<=N']
    assert list(conditional['verdict']) == ['pass', 'pass', 'vacuous']
    assert frame[frame['kind'] == 'outcome']['verdict'].tolist() == ['pass']
    assert (frame[frame['kind'] == 'U+P2_literal<=q(n-1)']['verdict'] == 'info').all()
    assert len(audit.chain_frame()) == 4


@pytest.mark.parametrize('n', [5, 6, 7, 8])
def test_audit_random_colorings(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        audit = audit_k2(random_coloring(n, 2, n - 3, rng))
        assert audit.passed, [f for f in audit.findings if f.verdict == 'fail']
        assert audit.witness is not None


def test_audit_needs_n_minus_3_colors():
    with pytest.raises(exc.FunctionInputFail):
        audit_k2(Coloring(6, 2, 2, (1,) * 15))


def test_audit_campaign():
    frame = audit_campaign(6, samples=20, seed=2)
    assert report_passed(frame)
    assert list(frame['kind'][:2]) == ['chain-audit', 'chain-audit-star']


def test_structured_family_sizes():
    n = 7
    assert len(star_family(n)) == 15
    assert len(sunflower_family(n, (1, 2))) == 5
    assert sunflower_family(n, (1,)) == family(n, (1, 2, 3), (1, 4, 5), (1, 6, 7))
    assert len(triangle_family(n)) == 3 * n - 8
    assert len(hilton_milner_family(n)) == 3 * n - 8
    assert set(structured_families(n)) == {'star', 'sunflower-pair', 'sunflower-point', 'triangle',
                                           'triangle-pendant', 'hilton-milner'}


def test_greedy_and_partition():
    T = triangle_family(7)
    assert greedy_abc(T) == (1, 2, 3)
    part = partition_ABCD(T, 1, 2, 3)
    assert part.sizes == (4, 4, 0, 5)
    assert part.witness is None

    part = partition_ABCD(T + [S(7, 4, 5, 6)], 1, 2, 3)
    assert part.witness == (S(7, 1, 2, 3), S(7, 4, 5, 6))
    with pytest.raises(exc.FunctionInputFail):
        partition_ABCD(T, 4, 5, 6)
    with pytest.raises(exc.FunctionInputFail):
        greedy_abc([])


class_bound_validation = [('star', COMMON_ELEMENT),
                          ('sunflower-pair', COMMON_ELEMENT),
                          ('sunflower-point', COMMON_ELEMENT),
                          ('triangle', SMALL),
                          ('triangle-pendant', DISJOINT_PAIR),
                          ('hilton-milner', SMALL),
                          ]


@pytest.mark.parametrize('name, alternative', class_bound_validation)
@pytest.mark.parametrize('n', [7, 8, 10])
def test_class_bound_structured(name, alternative, n):
    analysis = class_bound_k3(structured_families(n)[name], n)
    assert analysis.alternative == alternative
    if alternative == SMALL:
        assert analysis.size == 3 * n - 8
        assert analysis.ab_bound and analysis.cd_bound
        assert [f.verdict for f in analysis.findings()] == ['pass', 'pass', 'pass', 'info']


def test_class_bound_triangle_cases():
    analysis = class_bound_k3(triangle_family(7))
    assert analysis.abc == (1, 2, 3)
    assert (analysis.ab_case, analysis.cd_case) == (5, 1)
    assert analysis.findings()[0].witness == SMALL


def test_class_bound_edge_cases():
    assert class_bound_k3([], 7).alternative == SMALL
    with pytest.raises(exc.FunctionInputFail):
        class_bound_k3([])
    with pytest.raises(exc.FunctionInputFail):
        class_bound_k3(triangle_family(6))
    analysis = class_bound_k3(family(7, (1, 2, 3), (4, 5, 6)))
    assert analysis.pair == (S(7, 1, 2, 3), S(7, 4, 5, 6))


def test_k3_family_campaign():
    frame = k3_family_campaign(7, samples=60, seed=5)
    assert report_passed(frame)
    assert len(frame) == 7
    assert frame['kind'][0] == 'class-bound-k3'


def test_find_mono_disjoint_k3_star_trace():
    pair = find_mono_disjoint_k3(star_coloring(7, 3))
    assert pair.color == 2
    assert len(pair.trace) == 1

    coloring = star_coloring(8, 3)
    pair = find_mono_disjoint_k3(coloring)
    assert not pair.first.mask & pair.second.mask
    assert coloring.color_of(pair.first) == coloring.color_of(pair.second) == pair.color == 3
    assert pair.trace[0] == 'n=8: class 1 has common element 1, delete both'
    assert pair.trace[-1].startswith('n=7: base case scan finds')


@pytest.mark.parametrize('n', [7, 8, 9])
def test_find_mono_disjoint_k3_random(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        coloring = random_coloring(n, 3, n - 5, rng)
        pair = find_mono_disjoint_k3(coloring)
        assert not pair.first.mask & pair.second.mask
        assert coloring.color_of(pair.first) == coloring.color_of(pair.second) == pair.color
        assert 1 <= len(pair.trace) <= n - 6


def test_find_mono_disjoint_k3_errors():
    rng = np.random.default_rng(0)
    with pytest.raises(exc.FunctionInputFail):
        find_mono_disjoint_k3(random_coloring(8, 3, 2, rng))
    with pytest.raises(exc.FunctionInputFail):
        find_mono_disjoint_k3(random_coloring(8, 2, 5, rng))


def test_witness_campaign():
    assert report_passed(witness_campaign(8, k=3, samples=10, seed=1))
    assert report_passed(witness_campaign(6, k=2, samples=10, seed=1))


n3_validation = [(10, 0, 'class-bound', 110),
                 (10, 4, 'class-bound', 122),
                 (10, 4, 'definition', 123),
                 (10, 5, 'definition', 100 + 10),
                 ]


@pytest.mark.parametrize('n, p, summand, expected', n3_validation)
def test_n3_bound(n, p, summand, expected):
    assert n3_bound(n, p, summand) == expected


def test_n3_bound_errors():
    with pytest.raises(exc.FunctionInputFail):
        n3_bound(10, 6)
    with pytest.raises(exc.FunctionInputFail):
        n3_bound(10, 1, 'average')


def test_n3_bound_variants():
    frame = n3_bound_variants(10)
    assert list(frame['p']) == list(range(6))
    assert frame['C(n,3)'].iloc[0] == 120
    assert frame['class-bound>=C(n,3)'].tolist() == [False, True, True, True, True, False]


@pytest.mark.parametrize('summand', ['class-bound', 'definition'])
def test_failed_program_witnesses(summand):
    witnesses = failed_program_witnesses(summand=summand)
    assert sorted(witnesses) == list(range(10, 21))
    for n, ps in witnesses.items():
        assert n - 6 in ps


def test_write_report(tmp_path):
    frame = four_set_campaign(5)
    sink = io.StringIO()
    write_report(frame, sink)
    lines = sink.getvalue().splitlines()
    assert lines[0] == 'kind\tparams\twitness\tverdict'
    assert lines[1].endswith('\tpass')
    path = tmp_path / 'report.tsv'
    write_report(frame, path)
    assert path.read_text() == sink.getvalue()


def _counts(frame):
    return {key: int(value) for key, value in (item.split('=') for item in frame['witness'][0].split())}


def test_trichotomy_exhaustive_n6():
    frame = trichotomy_campaign(6, workers=2)
    assert report_passed(frame)
    assert 'families=32768 exhaustive' in frame['params'][0]
    assert sum(_counts(frame).values()) == 2 ** 15


@pytest.mark.slow
@pytest.mark.parametrize('n', [7, 8])
def test_trichotomy_random_full_scale(n):
    frame = trichotomy_campaign(n, samples=10 ** 5, seed=n, workers=4)
    assert report_passed(frame)
    assert sum(_counts(frame).values()) == 10 ** 5


@pytest.mark.parametrize('n, quadruples', [(6, 1365), (7, 5985)])
def test_four_set_campaign_exhaustive(n, quadruples):
    frame = four_set_campaign(n)
    assert report_passed(frame)
    assert 'quadruples={}'.format(quadruples) in frame['params'][0]


@pytest.mark.slow
@pytest.mark.parametrize('n', range(6, 11))
def test_audit_campaign_full_scale(n):
    frame = audit_campaign(n, samples=10 ** 3, seed=n, workers=4)
    assert report_passed(frame), frame[frame['verdict'] == 'fail']
    assert 'colorings=1000' in frame['params'][0]


@pytest.mark.slow
@pytest.mark.parametrize('n', range(7, 11))
def test_k3_family_campaign_full_scale(n):
    frame = k3_family_campaign(n, samples=10 ** 4, seed=n, workers=4)
    assert report_passed(frame), frame[frame['verdict'] == 'fail']
    assert 'families=10000' in frame['params'][0]


@pytest.mark.slow
@pytest.mark.parametrize('n', range(7, 12))
def test_witness_campaign_full_scale(n):
    frame = witness_campaign(n, k=3, samples=10 ** 3, seed=n, workers=4)
    assert report_passed(frame), frame[frame['verdict'] == 'fail']
    assert _counts(frame)['found'] == 10 ** 3
