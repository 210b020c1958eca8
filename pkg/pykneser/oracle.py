import functools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import pykneser.exceptions as exc
from pykneser.kneser import (Coloring, KSubset, default_colors, enum_ksubsets, random_coloring,
                             validate_inputs as validate_ground)

logger = logging.getLogger(__name__)

DISJOINT_PAIR = 'disjoint-pair'
COMMON_ELEMENT = 'common-element'
SMALL = 'small'

DISJOINT_AMONG = 'disjoint-among'
STAR_POINT = 'star-point'

N3_SUMMANDS = ('class-bound', 'definition')

FINDING_COLUMNS = ['kind', 'params', 'witness', 'verdict']

# Exhaustive family sweeps above this many candidate sets are not desk scale
EXHAUSTIVE_FAMILY_BITS = 15


class Finding(NamedTuple):
    kind: str
    params: str
    witness: str
    verdict: str


class MonoPair(NamedTuple):
    first: KSubset
    second: KSubset
    color: int
    trace: Tuple[str, ...] = ()

    def __str__(self) -> str:
        return '{} {} color {}'.format(self.first, self.second, self.color)


class ClassVerdict(NamedTuple):
    alternative: str
    pair: Optional[Tuple[KSubset, KSubset]]
    element: Optional[int]
    size: int


class FourSetVerdict(NamedTuple):
    alternative: str
    pair: Optional[Tuple[KSubset, KSubset]]
    point: Optional[int]
    union_size: int


def validate_inputs(**kwargs) -> None:
    for i in ['n', 'samples', 'workers', 'seed']:
        if i in kwargs and kwargs[i] is not None:
            if isinstance(kwargs[i], bool) or not isinstance(kwargs[i], (int, np.integer)):
                raise exc.FunctionInputFail('{} is not an integer'.format(i))
    for i in ['samples', 'workers']:
        if kwargs.get(i) is not None and kwargs[i] < 1:
            raise exc.FunctionInputFail('{} must be at least 1 (got {})'.format(i, kwargs[i]))
    if 'n' in kwargs and 'n_min' in kwargs and kwargs['n'] < kwargs['n_min']:
        raise exc.FunctionInputFail('Ground set size, n={}, is below {}'.format(kwargs['n'], kwargs['n_min']))
    if kwargs.get('n') is not None and kwargs['n'] > 14:
        logger.warning('Ground set size, n, is outside oracle boundaries (n <= 14), enumeration over the coloring may be slow.')


def _family_masks(S: Sequence[KSubset], k: int, n: int = None) -> List[int]:
    for A in S:
        if len(A) != k:
            raise exc.FunctionInputFail('{} is not a {}-subset'.format(A, k))
        if n is not None and A.n != n:
            raise exc.FunctionInputFail('{} is not a subset of [{}]'.format(A, n))
    masks = [A.mask for A in S]
    if len(set(masks)) != len(masks):
        raise exc.FunctionInputFail('Family contains repeated sets')
    return masks


def _first_disjoint_pair(masks: Sequence[int]) -> Optional[Tuple[int, int]]:
    '''
    Indices (i, j), i < j, of the first disjoint pair in row-major order
    '''
    if len(masks) < 2:
        return None
    arr = np.asarray(masks, dtype=np.int64)
    hits = np.argwhere(np.triu((arr[:, None] & arr[None, :]) == 0, k=1))
    if not len(hits):
        return None
    return int(hits[0][0]), int(hits[0][1])


def _common(masks: Sequence[int]) -> int:
    return functools.reduce(lambda x, y: x & y, masks) if masks else 0


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length()


def _elements(mask: int) -> List[int]:
    return [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]


# Direct scan

def find_mono_disjoint(coloring: Coloring) -> MonoPair:
    '''
    A monochromatic disjoint pair by direct scan over the color classes.
    With at most n-2k+1 colors one always exists, so coming back empty is an internal error.
    '''
    if coloring.colors > default_colors(coloring.n, coloring.k):
        raise exc.FunctionInputFail('A coloring with {} colors may avoid monochromatic disjoint pairs; at most {} are allowed'.format(
            coloring.colors, default_colors(coloring.n, coloring.k)))
    for color, S in coloring.classes().items():
        hit = _first_disjoint_pair(_family_masks(S, coloring.k))
        if hit is not None:
            return MonoPair(S[hit[0]], S[hit[1]], color)
    raise exc.InternalInconsistency('No monochromatic disjoint pair in a {}-coloring of the {}-subsets of [{}]'.format(
        coloring.colors, coloring.k, coloring.n))


# k = 2

def class_trichotomy_k2(S: Sequence[KSubset], n: int = None) -> ClassVerdict:
    '''
    Every family of 2-subsets has two disjoint members, or at most 3 members, or a common element.
    The reported alternative is the first that holds in the order disjoint pair, common element, small;
    the empty family is reported small.
    :param S: family of 2-subsets of [n]
    :param n: ground set size, taken from the members when omitted
    '''
    if n is None and S:
        n = S[0].n
    if n is not None:
        validate_inputs(n=n, n_min=5)
    masks = _family_masks(S, 2, n)
    hit = _first_disjoint_pair(masks)
    if hit is not None:
        D, E = S[hit[0]], S[hit[1]]
        if D.mask & E.mask:
            raise exc.InternalInconsistency('Reported pair {} {} is not disjoint'.format(D, E))
        return ClassVerdict(DISJOINT_PAIR, (D, E), None, len(S))
    common = _common(masks)
    if common:
        x = _lowest(common)
        if not all(x in A for A in S):
            raise exc.InternalInconsistency('Element {} is missing from some member'.format(x))
        return ClassVerdict(COMMON_ELEMENT, None, x, len(S))
    if len(S) <= 3:
        return ClassVerdict(SMALL, None, None, len(S))
    raise exc.InternalInconsistency('Family {} has no disjoint pair, no common element and {} > 3 members'.format(
        [str(A) for A in S], len(S)))


def four_set_lemma(A: KSubset, B: KSubset, C: KSubset, D: KSubset) -> FourSetVerdict:
    '''
    Four distinct 2-subsets: two of them are disjoint, or they form a star on 5 points
    (union of size 5 and a single common point).
    '''
    quad = [A, B, C, D]
    masks = _family_masks(quad, 2)
    union = functools.reduce(lambda x, y: x | y, masks)
    hit = _first_disjoint_pair(masks)
    if hit is not None:
        return FourSetVerdict(DISJOINT_AMONG, (quad[hit[0]], quad[hit[1]]), None, bin(union).count('1'))
    common = _common(masks)
    if bin(union).count('1') == 5 and bin(common).count('1') == 1:
        return FourSetVerdict(STAR_POINT, None, _lowest(common), 5)
    raise exc.InternalInconsistency('Sets {} {} {} {} fit neither alternative'.format(A, B, C, D))


class _ClassStat(NamedTuple):
    color: int
    sets: Tuple[KSubset, ...]
    masks: Tuple[int, ...]
    common: int
    pair: Optional[Tuple[int, int]]

    @property
    def size(self) -> int:
        return len(self.masks)


def _class_stats(coloring: Coloring) -> List[_ClassStat]:
    stats = []
    for color, S in coloring.classes().items():
        masks = tuple(A.mask for A in S)
        stats.append(_ClassStat(color, tuple(S), masks, _common(masks), _first_disjoint_pair(masks)))
    return stats


class ChainRow(NamedTuple):
    '''
    The counting quantities over color classes 1..r of a coloring of the 2-subsets of [n].
    P2 counts only sets in classes of size at least 4; P2_literal counts sets of every class.
    '''
    r: int
    p: int
    s: int
    q: int
    M: int
    N: int
    M1: int
    M2: int
    Q1: int
    P2: int
    P2_literal: int
    U: int
    witness: Optional[MonoPair]

    def stronger_bound(self, n: int) -> int:
        return self.s * (n - 1) - self.s * (self.s - 1) // 2 + 3 * (self.r - self.p)


def _chain_row(coloring: Coloring, stats: List[_ClassStat], r: int) -> ChainRow:
    n = coloring.n
    upto = stats[:r]
    large = [c for c in upto if c.size >= 4]

    p = sum(1 for c in large if c.common)
    special = {_lowest(c.common) for c in large if bin(c.common).count('1') == 1}
    special_q = {i for c in large for i in _elements(c.common)}

    M = sum(c.size for c in upto)
    M1 = sum(c.size for c in upto if c.size <= 3)
    M2 = sum(c.size for c in upto if c.size >= 4)
    Q1 = sum(1 for c in upto if c.size <= 3)
    N = p * (n - 1) - p * (p - 1) // 2 + 3 * (r - p)

    P2 = P2_literal = 0
    for c in upto:
        for mask in c.masks:
            first, second = mask & -mask, mask & ~(mask & -mask)
            if bool(c.common & first) != bool(c.common & second):
                P2_literal += 1
                if c.size >= 4:
                    P2 += 1
    U = sum(1 for A in enum_ksubsets(n, 2) if A.elements[0] in special_q and A.elements[1] in special_q)

    witness = None
    for c in upto:
        if c.pair is not None:
            witness = MonoPair(c.sets[c.pair[0]], c.sets[c.pair[1]], c.color)
            break
    return ChainRow(r, p, len(special), len(special_q), M, N, M1, M2, Q1, P2, P2_literal, U, witness)


def _check_chain_coloring(coloring: Coloring) -> None:
    if coloring.k != 2 or coloring.stable:
        raise exc.FunctionInputFail('The counting chain is defined for colorings of all 2-subsets')
    validate_inputs(n=coloring.n, n_min=5)


def compute_chain_k2(coloring: Coloring, r: int) -> ChainRow:
    '''
    All counting quantities at prefix r by direct enumeration over the coloring
    :param coloring: coloring of the 2-subsets of [n]
    :param r: number of leading colors, 0 <= r <= min(colors, n-3)
    '''
    _check_chain_coloring(coloring)
    validate_ground(r=r)
    if r > min(coloring.colors, coloring.n - 3):
        raise exc.FunctionInputFail('Color prefix r={} is outside [0, {}]'.format(r, min(coloring.colors, coloring.n - 3)))
    return _chain_row(coloring, _class_stats(coloring), r)


def n_bound_k2(n: int, p: int) -> int:
    '''
    N at r = n-3 for a given number p of large classes with a common element
    '''
    if not 0 <= p <= n - 3:
        raise exc.FunctionInputFail('p={} is outside [0, {}]'.format(p, n - 3))
    return p * (n - 1) - p * (p - 1) // 2 + 3 * (n - 3 - p)


def n_bound_k2_max(n: int) -> int:
    return max(n_bound_k2(n, p) for p in range(n - 2))


class FinalArithmetic(NamedTuple):
    n: int
    lhs: int
    rhs: int

    @property
    def contradiction(self) -> bool:
        return self.lhs > self.rhs


def final_contradiction(n: int) -> FinalArithmetic:
    '''
    C(n,2) + C(n-3,2) against (n-1)(n-3); twice these are 2n^2-8n+12 and 2n^2-8n+6
    '''
    validate_inputs(n=n, n_min=5)
    return FinalArithmetic(n, math.comb(n, 2) + math.comb(n - 3, 2), (n - 1) * (n - 3))


@dataclass
class ChainAuditK2:
    n: int
    rows: List[ChainRow]
    findings: List[Finding] = field(default_factory=list)
    conclusion: str = ''

    @property
    def passed(self) -> bool:
        return all(f.verdict != 'fail' for f in self.findings)

    @property
    def witness(self) -> Optional[MonoPair]:
        return self.rows[-1].witness if self.rows else None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.findings, columns=FINDING_COLUMNS)

    def chain_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row._replace(witness=str(row.witness) if row.witness else '') for row in self.rows],
                            columns=ChainRow._fields)


def audit_k2(coloring: Coloring) -> ChainAuditK2:
    '''
    Walk the counting chain r = 0..n-3 and check every inequality of the k=2 counting argument.

    Inequalities that assume no monochromatic disjoint pair among colors 1..r are reported vacuous
    once a witness exists at r. The others are checked at every r.
    :param coloring: coloring of the 2-subsets of [n] with n-3 colors
    '''
    _check_chain_coloring(coloring)
    n = coloring.n
    if coloring.colors != n - 3:
        raise exc.FunctionInputFail('The chain audit needs n-3={} colors (got {})'.format(n - 3, coloring.colors))
    stats = _class_stats(coloring)
    rows = [_chain_row(coloring, stats, r) for r in range(n - 2)]
    audit = ChainAuditK2(n, rows)

    def add(kind, r, ok, witness=''):
        audit.findings.append(Finding(kind, 'n={} r={}'.format(n, r), witness, 'pass' if ok else 'fail'))

    for prev, row in zip(rows, rows[1:]):
        r = row.r
        add('monotone-p', r, row.p - prev.p in (0, 1), 'p={}->{}'.format(prev.p, row.p))
        add('monotone-M', r, row.M >= prev.M, 'M={}->{}'.format(prev.M, row.M))
        add('monotone-N', r, row.N - prev.N >= 3, 'N={}->{}'.format(prev.N, row.N))

    for row in rows[1:]:
        r = row.r
        add('s<=p', r, row.s <= row.p, 's={} p={}'.format(row.s, row.p))
        add('q=s', r, row.q == row.s, 'q={} s={}'.format(row.q, row.s))
        add('M=M1+M2', r, row.M == row.M1 + row.M2, 'M={} M1={} M2={}'.format(row.M, row.M1, row.M2))
        add('M1<=3Q1', r, row.M1 <= 3 * row.Q1, 'M1={} Q1={}'.format(row.M1, row.Q1))
        add('U=C(q,2)', r, row.U == math.comb(row.q, 2), 'U={} q={}'.format(row.U, row.q))
        add('U+P2<=q(n-1)', r, row.U + row.P2 <= row.q * (n - 1), 'U={} P2={} q={}'.format(row.U, row.P2, row.q))
        audit.findings.append(Finding('U+P2_literal<=q(n-1)', 'n={} r={}'.format(n, r),
                                      'U={} P2_literal={} q={} holds={}'.format(
                                          row.U, row.P2_literal, row.q, row.U + row.P2_literal <= row.q * (n - 1)),
                                      'info'))

        conditional = [
            ('M<=N', row.M <= row.N, 'M={} N={}'.format(row.M, row.N)),
            ('stronger', row.M <= row.stronger_bound(n), 'M={} bound={}'.format(row.M, row.stronger_bound(n))),
            ('M2<=P2', row.M2 <= row.P2, 'M2={} P2={}'.format(row.M2, row.P2)),
            ('corollary-1', row.M + row.U <= row.q * (n - 1) + 3 * row.Q1,
             'M+U={} bound={}'.format(row.M + row.U, row.q * (n - 1) + 3 * row.Q1)),
        ]
        for kind, ok, witness in conditional:
            if row.witness is not None:
                audit.findings.append(Finding(kind, 'n={} r={}'.format(n, r), str(row.witness), 'vacuous'))
            else:
                add(kind, r, ok, witness)

    last = rows[-1]
    r = last.r
    add('corollary-2', r, last.M == math.comb(n, 2), 'M={}'.format(last.M))
    add('corollary-3', r, last.q <= n - 3, 'q={}'.format(last.q))
    lhs = last.q * (n - 1) + 3 * last.Q1 + math.comb(n - 3, 2)
    add('corollary-4', r, lhs <= (n - 3) * (n - 1) + last.U, 'lhs={} rhs={}'.format(lhs, (n - 3) * (n - 1) + last.U))
    add('N<=C(n,2)-3', r, last.N <= math.comb(n, 2) - 3, 'N={}'.format(last.N))
    add('max-N<=C(n,2)-3', r, n_bound_k2_max(n) <= math.comb(n, 2) - 3, 'max N={}'.format(n_bound_k2_max(n)))
    final = final_contradiction(n)
    add('final-arithmetic', r, final.contradiction, '{} > {}'.format(final.lhs, final.rhs))

    if last.witness is None:
        audit.conclusion = 'no witness at r={}: every inequality would have to hold, which the final arithmetic rules out'.format(r)
        add('outcome', r, False, audit.conclusion)
    else:
        first = next(row.r for row in rows if row.witness is not None)
        audit.conclusion = 'witness {} from r={}'.format(last.witness, first)
        add('outcome', r, True, audit.conclusion)

    failures = [f for f in audit.findings if f.verdict == 'fail']
    if failures:
        logger.error('Chain audit n=%d: %d failing findings, first %s', n, len(failures), failures[0])
    return audit


def star_coloring(n: int, k: int, colors: int = None) -> Coloring:
    '''
    Color A by min(min(A), colors): classes 1..colors-1 are stars, the last class collects the rest
    '''
    validate_ground(n=n, k=k)
    if colors is None:
        colors = default_colors(n, k)
    return Coloring.from_function(n, k, colors, lambda A: min(A.elements[0], colors))


# k = 3

def greedy_abc(S: Sequence[KSubset]) -> Tuple[int, int, int]:
    '''
    Choose a member {a, b, c} so that the induced families satisfy |A| >= |B| >= |C|:
    a maximizes the number of members containing it, b (from a member with a) the number
    containing b but not a, c (from a member with a and b) the number containing c but not a or b.
    Ties go to the smallest element.
    '''
    if not S:
        raise exc.FunctionInputFail('greedy choice needs a nonempty family')
    masks = _family_masks(S, 3)
    n = max(A.n for A in S)

    def best(candidates, score):
        return max(sorted(candidates), key=lambda x: (score(x), -x))

    def bit(x):
        return 1 << (x - 1)

    a = best({e for A in S for e in A}, lambda x: sum(1 for m in masks if m & bit(x)))
    with_a = [A for A in S if a in A]
    b = best({e for A in with_a for e in A if e != a},
             lambda x: sum(1 for m in masks if m & bit(x) and not m & bit(a)))
    with_ab = [A for A in with_a if b in A]
    c = best({e for A in with_ab for e in A if e not in (a, b)},
             lambda x: sum(1 for m in masks if m & bit(x) and not m & (bit(a) | bit(b))))
    logger.debug('greedy choice on %d sets over [%d]: a=%d b=%d c=%d', len(S), n, a, b, c)
    return a, b, c


class Partition(NamedTuple):
    A: List[KSubset]
    B: List[KSubset]
    C: List[KSubset]
    D: List[KSubset]
    witness: Optional[Tuple[KSubset, KSubset]] = None

    @property
    def sizes(self) -> Tuple[int, int, int, int]:
        return len(self.A), len(self.B), len(self.C), len(self.D)


def partition_ABCD(S: Sequence[KSubset], a: int, b: int, c: int) -> Partition:
    '''
    A: a in W, b not in W. B: b in W, a not in W. C: c in W, a and b not in W. D: a and b in W.
    A member avoiding a, b and c is disjoint from {a, b, c} and is returned as a witness.
    '''
    abc = [W for W in S if set(W.elements) == {a, b, c}]
    if not abc:
        raise exc.FunctionInputFail('{{{},{},{}}} is not a member of the family'.format(*sorted((a, b, c))))
    part = Partition([], [], [], [])
    witness = None
    for W in S:
        if a in W and b not in W:
            part.A.append(W)
        elif b in W and a not in W:
            part.B.append(W)
        elif a in W and b in W:
            part.D.append(W)
        elif c in W:
            part.C.append(W)
        elif witness is None:
            witness = (abc[0], W)
    return part._replace(witness=witness)


@dataclass
class ClassAnalysisK3:
    n: int
    size: int
    alternative: str
    pair: Optional[Tuple[KSubset, KSubset]] = None
    element: Optional[int] = None
    abc: Optional[Tuple[int, int, int]] = None
    partition: Optional[Partition] = None
    ab_case: Optional[int] = None
    cd_case: Optional[int] = None
    ab_bound: Optional[bool] = None
    cd_bound: Optional[bool] = None
    a_bound: Optional[bool] = None

    def findings(self) -> List[Finding]:
        params = 'n={} size={}'.format(self.n, self.size)
        witness = {DISJOINT_PAIR: ' '.join(str(W) for W in self.pair or ()),
                   COMMON_ELEMENT: str(self.element), SMALL: ''}[self.alternative]
        rows = [Finding('trichotomy-k3', params, '{}: {}'.format(self.alternative, witness).strip(': '), 'pass')]
        if self.partition is not None:
            sizes = 'A={} B={} C={} D={}'.format(*self.partition.sizes)
            rows.append(Finding('ab-bound', params + ' case={}'.format(self.ab_case), sizes, 'pass' if self.ab_bound else 'fail'))
            rows.append(Finding('cd-bound', params + ' case={}'.format(self.cd_case), sizes, 'pass' if self.cd_bound else 'fail'))
            rows.append(Finding('A<=n-3', params + ' case={}'.format(self.ab_case), sizes, 'info'))
        return rows


def _ab_case(B: List[KSubset], b: int) -> int:
    if not B:
        return 1
    if len(B) == 1:
        return 3
    masks = [W.mask for W in B]
    only_b = 1 << (b - 1)
    if any(x & y == only_b for x, y in combinations(masks, 2)):
        return 2
    if len(B) == 2:
        return 4
    return 5 if bin(_common(masks)).count('1') == 2 else 6


def _cd_case(C: List[KSubset]) -> int:
    if not C:
        return 1
    if len(C) == 1:
        return 2
    return 3 if bin(_common([W.mask for W in C])).count('1') == 2 else 4


def class_bound_k3(S: Sequence[KSubset], n: int = None) -> ClassAnalysisK3:
    '''
    Every family of 3-subsets of [n], n >= 7, has two disjoint members, or a common element,
    or at most 3n-8 members.

    In the last case the family is split by a greedy member {a, b, c} into A, B, C, D and the
    bounds |A|+|B| <= 2n-6 and |C|+|D| <= n-2 are checked with the case that establishes them.
    |A| <= n-3 is recorded for information only; it does not hold in every configuration.
    '''
    if n is None:
        if not S:
            raise exc.FunctionInputFail('n is required for an empty family')
        n = S[0].n
    validate_inputs(n=n, n_min=7)
    masks = _family_masks(S, 3, n)

    hit = _first_disjoint_pair(masks)
    if hit is not None:
        return ClassAnalysisK3(n, len(S), DISJOINT_PAIR, pair=(S[hit[0]], S[hit[1]]))
    common = _common(masks)
    if common:
        return ClassAnalysisK3(n, len(S), COMMON_ELEMENT, element=_lowest(common))
    if not S:
        return ClassAnalysisK3(n, 0, SMALL)

    abc = greedy_abc(S)
    part = partition_ABCD(S, *abc)
    if part.witness is not None:
        raise exc.InternalInconsistency('Member {} avoids {} although no disjoint pair exists'.format(part.witness[1], abc))
    A, B, C, D = part.sizes
    analysis = ClassAnalysisK3(
        n, len(S), SMALL, abc=abc, partition=part,
        ab_case=_ab_case(part.B, abc[1]), cd_case=_cd_case(part.C),
        ab_bound=B > 0 and A + B <= 2 * n - 6, cd_bound=C + D <= n - 2, a_bound=A <= n - 3)
    if not (A >= B >= C):
        raise exc.InternalInconsistency('Greedy choice {} gives |A|={} |B|={} |C|={}'.format(abc, A, B, C))
    if not (analysis.ab_bound and analysis.cd_bound and len(S) <= 3 * n - 8):
        raise exc.InternalInconsistency('Family of {} sets over [{}] breaks the class bound: A={} B={} C={} D={} (cases {}, {})'.format(
            len(S), n, A, B, C, D, analysis.ab_case, analysis.cd_case))
    return analysis


def _restrict(coloring: Coloring, x: int, color: int) -> Tuple[Coloring, List[int], List[int]]:
    '''
    Drop element x and color `color`, relabel the remaining elements and colors consecutively.
    :return: the smaller coloring, element labels (new i -> old keep[i-1]) and color labels likewise
    '''
    n = coloring.n
    keep = [e for e in range(1, n + 1) if e != x]
    colors = [c for c in range(1, coloring.colors + 1) if c != color]
    new_color = {c: i + 1 for i, c in enumerate(colors)}

    def recolor(A):
        old = coloring.color_of(KSubset(tuple(keep[e - 1] for e in A), n))
        if old == color:
            raise exc.InternalInconsistency('{} avoids {} but has the deleted color {}'.format(A, x, color))
        return new_color[old]

    return Coloring.from_function(n - 1, coloring.k, coloring.colors - 1, recolor), keep, colors


def find_mono_disjoint_k3(coloring: Coloring) -> MonoPair:
    '''
    Monochromatic disjoint pair in an (n-5)-coloring of the 3-subsets of [n], extracted by induction on n.

    At n = 7 the classes are scanned directly. Above that, a class with a common element x
    is removed together with x and the instance shrinks to n-1; otherwise the largest class
    exceeds 3n-8 members and the class bound produces the pair.
    '''
    if coloring.k != 3 or coloring.stable:
        raise exc.FunctionInputFail('Inductive extraction is defined for colorings of all 3-subsets')
    validate_inputs(n=coloring.n, n_min=7)
    if coloring.colors != coloring.n - 5:
        raise exc.FunctionInputFail('Inductive extraction needs n-5={} colors (got {})'.format(coloring.n - 5, coloring.colors))
    pair = _k3_step(coloring, ())
    if pair.first.mask & pair.second.mask or coloring.color_of(pair.first) != pair.color \
            or coloring.color_of(pair.second) != pair.color:
        raise exc.InternalInconsistency('Lifted pair {} does not verify'.format(pair))
    return pair


def _k3_step(coloring: Coloring, trace: Tuple[str, ...]) -> MonoPair:
    n = coloring.n
    if n == 7:
        pair = find_mono_disjoint(coloring)
        return pair._replace(trace=trace + ('n=7: base case scan finds {}'.format(pair),))

    classes = coloring.classes()
    for color, S in classes.items():
        common = _common([A.mask for A in S]) if S else 1
        if common:
            x = _lowest(common)
            smaller, keep, colors = _restrict(coloring, x, color)
            step = 'n={}: class {} has common element {}, delete both'.format(n, color, x)
            inner = _k3_step(smaller, trace + (step,))
            first = KSubset(tuple(keep[e - 1] for e in inner.first), n)
            second = KSubset(tuple(keep[e - 1] for e in inner.second), n)
            return MonoPair(first, second, colors[inner.color - 1], inner.trace)

    color, S = max(classes.items(), key=lambda item: (len(item[1]), -item[0]))
    analysis = class_bound_k3(S, n)
    if analysis.alternative != DISJOINT_PAIR:
        raise exc.InternalInconsistency('Largest class {} of size {} gave {}'.format(color, len(S), analysis.alternative))
    step = 'n={}: largest class {} has {} > {} sets, class bound finds a disjoint pair'.format(n, color, len(S), 3 * n - 8)
    return MonoPair(analysis.pair[0], analysis.pair[1], color, trace + (step,))


def n3_bound(n: int, p: int, summand: str = 'class-bound') -> int:
    '''
    C(n-1,2) + ... + C(n-p,2) + (n-5-p) * t with t = 3n-8 ('class-bound') or t = 3n-7 ('definition')
    '''
    validate_inputs(n=n, n_min=6)
    if summand not in N3_SUMMANDS:
        raise exc.FunctionInputFail('Summand must be one of {} (got {})'.format(N3_SUMMANDS, summand))
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or not 0 <= p <= n - 5:
        raise exc.FunctionInputFail('p={} is outside [0, {}]'.format(p, n - 5))
    t = 3 * n - 8 if summand == 'class-bound' else 3 * n - 7
    return sum(math.comb(n - j, 2) for j in range(1, p + 1)) + (n - 5 - p) * t


def n3_bound_variants(n: int) -> pd.DataFrame:
    total = math.comb(n, 3)
    rows = []
    for p in range(n - 4):
        cb, df = n3_bound(n, p, 'class-bound'), n3_bound(n, p, 'definition')
        rows.append((n, p, cb, df, total, cb >= total, df >= total))
    return pd.DataFrame(rows, columns=['n', 'p', 'class-bound', 'definition', 'C(n,3)', 'class-bound>=C(n,3)',
                                       'definition>=C(n,3)'])


def failed_program_witnesses(ns: Sequence[int] = range(10, 21), summand: str = 'class-bound') -> Dict[int, List[int]]:
    '''
    For each n, the values of p at which the k=3 counting bound reaches C(n,3) and so proves nothing
    '''
    return {n: [p for p in range(n - 4) if n3_bound(n, p, summand) >= math.comb(n, 3)] for n in ns}


# Structured families of 3-subsets

def star_family(n: int, x: int = 1) -> List[KSubset]:
    return [A for A in enum_ksubsets(n, 3) if x in A]


def sunflower_family(n: int, core: Tuple[int, ...] = (1, 2)) -> List[KSubset]:
    '''
    Sets containing the core; a one-element core gives petals partitioning the rest where possible
    '''
    if len(core) == 2:
        return [A for A in enum_ksubsets(n, 3) if core[0] in A and core[1] in A]
    x = core[0]
    rest = [e for e in range(1, n + 1) if e != x]
    return [KSubset.of(n, (x, rest[i], rest[i + 1])) for i in range(0, len(rest) - 1, 2)]


def triangle_family(n: int, T: Tuple[int, int, int] = (1, 2, 3)) -> List[KSubset]:
    '''
    Sets meeting T in at least two points: 3n-8 sets, pairwise intersecting, no common element
    '''
    return [A for A in enum_ksubsets(n, 3) if len(set(A.elements) & set(T)) >= 2]


def hilton_milner_family(n: int, x: int = 1, T: Tuple[int, int, int] = (2, 3, 4)) -> List[KSubset]:
    '''
    Sets through x meeting T, plus T itself: 3n-8 sets, pairwise intersecting, no common element
    '''
    family = [A for A in enum_ksubsets(n, 3) if x in A and set(A.elements) & set(T)]
    return family + [KSubset.of(n, T)]


def structured_families(n: int) -> Dict[str, List[KSubset]]:
    triangle = triangle_family(n)
    return {
        'star': star_family(n),
        'sunflower-pair': sunflower_family(n, (1, 2)),
        'sunflower-point': sunflower_family(n, (1,)),
        'triangle': triangle,
        'triangle-pendant': triangle + [KSubset.of(n, (4, 5, 6))],
        'hilton-milner': hilton_milner_family(n),
    }


# Campaigns

def _spawn(seed: Optional[int], workers: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(workers)


def _shares(samples: int, workers: int) -> List[int]:
    return [samples // workers + (1 if i < samples % workers else 0) for i in range(workers)]


def _run_chunks(fn: Callable, args: List[tuple], workers: int) -> list:
    if workers == 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args)))


def _tally(results: List[Dict[str, int]]) -> Dict[str, int]:
    out = {}
    for chunk in results:
        for key, value in chunk.items():
            out[key] = out.get(key, 0) + value
    return out


def _trichotomy_chunk(n: int, families: List[int], sets: List[KSubset]):
    counts, failures = {}, []
    for bits in families:
        S = [A for i, A in enumerate(sets) if bits >> i & 1]
        try:
            verdict = class_trichotomy_k2(S, n)
            counts[verdict.alternative] = counts.get(verdict.alternative, 0) + 1
        except exc.InternalInconsistency as e:
            failures.append(str(e))
    return counts, failures


def _random_families(rng: np.random.Generator, count: int, width: int) -> List[int]:
    # density drawn per family so sparse and dense families both occur
    density = rng.random(count)
    bits = rng.random((count, width)) < density[:, None]
    return [sum(1 << int(i) for i in np.flatnonzero(row)) for row in bits]


def _trichotomy_random_chunk(n: int, count: int, seed_seq: np.random.SeedSequence):
    sets = list(enum_ksubsets(n, 2))
    return _trichotomy_chunk(n, _random_families(np.random.default_rng(seed_seq), count, len(sets)), sets)


def trichotomy_campaign(n: int, samples: int = None, seed: int = 0, workers: int = 1) -> pd.DataFrame:
    '''
    class_trichotomy_k2 over every family of 2-subsets of [n] (samples=None, n <= 6) or over random families
    '''
    validate_inputs(n=n, n_min=5, samples=samples, workers=workers, seed=seed)
    sets = list(enum_ksubsets(n, 2))
    if samples is None:
        if len(sets) > EXHAUSTIVE_FAMILY_BITS:
            raise exc.FunctionInputFail('Exhaustive sweep over 2^{} families is not feasible; pass samples'.format(len(sets)))
        total = 1 << len(sets)
        bounds = np.linspace(0, total, workers + 1, dtype=np.int64)
        args = [(n, list(range(int(lo), int(hi))), sets) for lo, hi in zip(bounds, bounds[1:])]
        results = _run_chunks(_trichotomy_chunk, args, workers)
        params = 'n={} families={} exhaustive'.format(n, total)
    else:
        args = [(n, share, s) for share, s in zip(_shares(samples, workers), _spawn(seed, workers))]
        results = _run_chunks(_trichotomy_random_chunk, args, workers)
        params = 'n={} families={} seed={}'.format(n, samples, seed)
    counts = _tally([r[0] for r in results])
    failures = [f for r in results for f in r[1]]
    rows = [Finding('trichotomy-k2', params, ' '.join('{}={}'.format(k, v) for k, v in sorted(counts.items())),
                    'fail' if failures else 'pass')]
    rows += [Finding('trichotomy-k2', params, f, 'fail') for f in failures]
    logger.info('Trichotomy sweep %s: %s', params, counts)
    return pd.DataFrame(rows, columns=FINDING_COLUMNS)


def four_set_campaign(n: int) -> pd.DataFrame:
    validate_inputs(n=n, n_min=5)
    counts, failures = {}, []
    for quad in combinations(enum_ksubsets(n, 2), 4):
        try:
            verdict = four_set_lemma(*quad)
            counts[verdict.alternative] = counts.get(verdict.alternative, 0) + 1
        except exc.InternalInconsistency as e:
            failures.append(str(e))
    params = 'n={} quadruples={} exhaustive'.format(n, sum(counts.values()) + len(failures))
    rows = [Finding('four-set', params, ' '.join('{}={}'.format(k, v) for k, v in sorted(counts.items())),
                    'fail' if failures else 'pass')]
    rows += [Finding('four-set', params, f, 'fail') for f in failures]
    return pd.DataFrame(rows, columns=FINDING_COLUMNS)


def _audit_chunk(n: int, count: int, seed_seq: np.random.SeedSequence):
    rng = np.random.default_rng(seed_seq)
    counts = {'colorings': 0, 'vacuous': 0, 'checked': 0}
    failures = []
    for _ in range(count):
        audit = audit_k2(random_coloring(n, 2, n - 3, rng))
        counts['colorings'] += 1
        for f in audit.findings:
            if f.verdict == 'vacuous':
                counts['vacuous'] += 1
            elif f.verdict in ('pass', 'fail'):
                counts['checked'] += 1
        failures.extend(f for f in audit.findings if f.verdict == 'fail')
    return counts, failures


def audit_campaign(n: int, samples: int = 1000, seed: int = 0, workers: int = 1) -> pd.DataFrame:
    '''
    audit_k2 over seeded random (n-3)-colorings of the 2-subsets of [n], plus the star coloring
    '''
    validate_inputs(n=n, n_min=5, samples=samples, workers=workers, seed=seed)
    args = [(n, share, s) for share, s in zip(_shares(samples, workers), _spawn(seed, workers))]
    results = _run_chunks(_audit_chunk, args, workers)
    counts = _tally([r[0] for r in results])
    failures = [f for r in results for f in r[1]]
    star = audit_k2(star_coloring(n, 2))
    failures += [f for f in star.findings if f.verdict == 'fail']
    params = 'n={} colorings={} seed={}'.format(n, samples, seed)
    rows = [Finding('chain-audit', params, 'checked={checked} vacuous={vacuous}'.format(**counts),
                    'fail' if failures else 'pass'),
            Finding('chain-audit-star', 'n={}'.format(n), star.conclusion, 'pass' if star.passed else 'fail')]
    rows += failures
    logger.info('Chain audit %s: %d findings checked, %d failures', params, counts['checked'], len(failures))
    return pd.DataFrame(rows, columns=FINDING_COLUMNS)


def _k3_tally(counts: Dict[str, int], analysis: ClassAnalysisK3) -> None:
    keys = [analysis.alternative]
    if analysis.partition is not None:
        keys += ['ab-case-{}'.format(analysis.ab_case), 'cd-case-{}'.format(analysis.cd_case)]
        if not analysis.a_bound:
            keys.append('A>n-3')
    for key in keys:
        counts[key] = counts.get(key, 0) + 1


def _k3_family_chunk(n: int, count: int, seed_seq: np.random.SeedSequence):
    rng = np.random.default_rng(seed_seq)
    sets = list(enum_ksubsets(n, 3))
    pools = list(structured_families(n).values())
    counts, failures = {}, []
    for i in range(count):
        if i % 2:
            bits = _random_families(rng, 1, len(sets))[0]
            S = [A for j, A in enumerate(sets) if bits >> j & 1]
        else:
            # random subfamily of a pairwise intersecting structured family
            pool = pools[int(rng.integers(len(pools)))]
            S = [A for A in pool if rng.random() < 0.8] or pool[:1]
        try:
            _k3_tally(counts, class_bound_k3(S, n))
        except exc.InternalInconsistency as e:
            failures.append(str(e))
    return counts, failures


def k3_family_campaign(n: int, samples: int = 10000, seed: int = 0, workers: int = 1) -> pd.DataFrame:
    '''
    class_bound_k3 over the structured families, their random subfamilies and random families
    '''
    validate_inputs(n=n, n_min=7, samples=samples, workers=workers, seed=seed)
    args = [(n, share, s) for share, s in zip(_shares(samples, workers), _spawn(seed, workers))]
    results = _run_chunks(_k3_family_chunk, args, workers)
    counts = _tally([r[0] for r in results])
    failures = [f for r in results for f in r[1]]
    params = 'n={} families={} seed={}'.format(n, samples, seed)
    rows = [Finding('class-bound-k3', params, ' '.join('{}={}'.format(k, v) for k, v in sorted(counts.items())),
                    'fail' if failures else 'pass')]
    for name, S in structured_families(n).items():
        try:
            analysis = class_bound_k3(S, n)
            rows.append(Finding('structured-' + name, 'n={} size={}'.format(n, len(S)), analysis.alternative, 'pass'))
        except exc.InternalInconsistency as e:
            rows.append(Finding('structured-' + name, 'n={} size={}'.format(n, len(S)), str(e), 'fail'))
    rows += [Finding('class-bound-k3', params, f, 'fail') for f in failures]
    return pd.DataFrame(rows, columns=FINDING_COLUMNS)


def _witness_chunk(n: int, k: int, count: int, seed_seq: np.random.SeedSequence):
    rng = np.random.default_rng(seed_seq)
    counts, failures = {'found': 0}, []
    for _ in range(count):
        coloring = random_coloring(n, k, default_colors(n, k), rng)
        try:
            pair = find_mono_disjoint_k3(coloring) if k == 3 else find_mono_disjoint(coloring)
            counts['found'] += 1
            depth = 'depth-{}'.format(len(pair.trace))
            counts[depth] = counts.get(depth, 0) + 1
        except exc.InternalInconsistency as e:
            failures.append(str(e))
    return counts, failures


def witness_campaign(n: int, k: int = 3, samples: int = 1000, seed: int = 0, workers: int = 1) -> pd.DataFrame:
    '''
    Monochromatic disjoint pairs on seeded random (n-2k+1)-colorings; k=3 uses the inductive extraction
    '''
    validate_ground(n=n, k=k)
    validate_inputs(n=n, n_min=7 if k == 3 else 2 * k, samples=samples, workers=workers, seed=seed)
    args = [(n, k, share, s) for share, s in zip(_shares(samples, workers), _spawn(seed, workers))]
    results = _run_chunks(_witness_chunk, args, workers)
    counts = _tally([r[0] for r in results])
    failures = [f for r in results for f in r[1]]
    params = 'n={} k={} colorings={} seed={}'.format(n, k, samples, seed)
    rows = [Finding('mono-disjoint', params, ' '.join('{}={}'.format(k_, v) for k_, v in sorted(counts.items())),
                    'fail' if failures else 'pass')]
    rows += [Finding('mono-disjoint', params, f, 'fail') for f in failures]
    return pd.DataFrame(rows, columns=FINDING_COLUMNS)


def write_report(frame: pd.DataFrame, sink) -> None:
    '''
    One finding per line, tab separated: kind, params, witness, verdict
    '''
    if isinstance(sink, (str, os.PathLike)):
        frame.to_csv(sink, sep='\t', index=False)
    else:
        sink.write(frame.to_csv(sep='\t', index=False))


def report_passed(frame: pd.DataFrame) -> bool:
    return not (frame['verdict'] == 'fail').any()
