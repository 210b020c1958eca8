import io
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, TypedDict

import numpy as np
from scipy.special import comb

import pykneser.exceptions as exc
from pykneser.kneser import KSubset, VarId, count_stable, decode_var, default_colors, domain, \
    validate_inputs as validate_ground

logger = logging.getLogger(__name__)

VARIANTS = ('kneser', 'kneser-onto', 'schrijver', 'schrijver-onto', 'php')
DOMAINS = ('all', 'stable')
NUMBERING_CONTRACT = 'id = rank*colors + color; rank = 0-based colex position within domain'
ONTO_READING = ('at-most-one per set (conjunctive reading); '
                'the disjunctive reading as written is almost always true and is not emitted')

# Truth-table brute force is restricted to this many variables
BRUTE_FORCE_MAX_VARS = 24

Clause = Tuple[int, ...]


class Literal(NamedTuple):
    var: VarId
    positive: bool

    @property
    def dimacs(self) -> int:
        return self.var.id if self.positive else -self.var.id


def make_clause(literals: Iterable[int]) -> Clause:
    '''
    Normalized clause: duplicate literals merged, sorted by variable then polarity
    '''
    return tuple(sorted(set(int(l) for l in literals), key=lambda l: (abs(l), l)))


def is_tautology(clause: Clause) -> bool:
    s = set(clause)
    return any(-l in s for l in s)


def literal_of(lit: int, n: int, k: int, colors: int, stable: bool = False) -> Literal:
    return Literal(decode_var(abs(lit), n, k, colors, stable), lit > 0)


@dataclass
class Cnf:
    """
    A generated (or parsed) CNF instance. Clauses are tuples of DIMACS literals.
    variant 'raw' marks a file read without generator metadata.
    """
    variant: str
    n: int
    k: int
    colors: int
    domain: str
    clauses: List[Clause]
    num_vars: int
    seed: Optional[int] = None

    @property
    def stable(self) -> bool:
        return self.domain == 'stable'

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def literal(self, lit: int) -> Literal:
        return literal_of(lit, self.n, self.k, self.colors, self.stable)


class ClauseCounts(TypedDict):
    vars: int
    ant: int
    onto: int
    cons: int
    clauses: int


def validate_inputs(**kwargs) -> None:
    """
    Validation of formula parameters on top of the ground-set checks in pykneser.kneser
    """
    validate_ground(**{i: kwargs[i] for i in ['n', 'k', 'colors'] if i in kwargs and kwargs[i] is not None})
    if 'variant' in kwargs and kwargs['variant'] not in VARIANTS:
        raise exc.FunctionInputFail('Unknown variant {}, expected one of {}'.format(kwargs['variant'], ', '.join(VARIANTS)))
    if 'domain' in kwargs and kwargs['domain'] not in DOMAINS:
        raise exc.FunctionInputFail('Unknown domain {}, expected all or stable'.format(kwargs['domain']))
    if kwargs.get('variant') == 'php' and kwargs.get('k', 1) != 1:
        raise exc.FunctionInputFail('Variant php is the k=1 instance, got k={}'.format(kwargs['k']))
    if 'colors' in kwargs and kwargs['colors'] is not None and 'n' in kwargs and 'k' in kwargs:
        if kwargs['colors'] > kwargs['n'] - 2 * kwargs['k'] + 2:
            logger.warning('Number of colors, {}, is above the chromatic number {}; '
                           'the instance is trivially satisfiable.'.format(kwargs['colors'], kwargs['n'] - 2 * kwargs['k'] + 2))


def _domain_sets(n: int, k: int, domain_: str) -> Tuple[KSubset, ...]:
    validate_inputs(n=n, k=k, domain=domain_)
    return domain(n, k, domain_ == 'stable')


def gen_ant(n: int, k: int, colors: int, domain_: str = 'all') -> List[Clause]:
    '''
    One all-positive clause per domain set: every set receives some color
    :param domain_: 'all' or 'stable'
    :return: list of clauses in colex order of the sets
    '''
    validate_inputs(n=n, k=k, colors=colors)
    sets = _domain_sets(n, k, domain_)
    return [tuple(rank * colors + l for l in range(1, colors + 1)) for rank in range(len(sets))]


def gen_not_cons(n: int, k: int, colors: int, domain_: str = 'all') -> List[Clause]:
    '''
    Binary clauses forbidding two disjoint domain sets to share a color.
    Each unordered pair is listed once, A before B in colex order, colors innermost.
    '''
    validate_inputs(n=n, k=k, colors=colors)
    masks = [A.mask for A in _domain_sets(n, k, domain_)]
    clauses = []
    for i, a in enumerate(masks):
        for j in range(i + 1, len(masks)):
            if a & masks[j]:
                continue
            for l in range(1, colors + 1):
                clauses.append((-(i * colors + l), -(j * colors + l)))
    return clauses


def gen_onto(n: int, k: int, colors: int, domain_: str = 'all') -> List[Clause]:
    '''
    At-most-one color per set: C(colors, 2) binary clauses per domain set
    '''
    validate_inputs(n=n, k=k, colors=colors)
    sets = _domain_sets(n, k, domain_)
    clauses = []
    for rank in range(len(sets)):
        base = rank * colors
        for l in range(1, colors + 1):
            for s in range(l + 1, colors + 1):
                clauses.append((-(base + l), -(base + s)))
    return clauses


def gen_cnf(variant: str, n: int, k: int, colors: int = None, shuffle_seed: int = None) -> Cnf:
    '''
    The refutation form Ant (+ Onto) + not-Cons of the Kneser family
    :param variant: kneser, kneser-onto, schrijver, schrijver-onto or php
    :param colors: color count, defaults to n-2k+1 (the unsatisfiable boundary)
    :param shuffle_seed: optional seed for a deterministic permutation of the clause order
    :return: Cnf
    '''
    validate_inputs(variant=variant, n=n, k=k, colors=colors)
    if colors is None:
        colors = default_colors(n, k)
    domain_ = 'stable' if variant.startswith('schrijver') else 'all'

    clauses = gen_ant(n, k, colors, domain_)
    if variant.endswith('-onto'):
        clauses += gen_onto(n, k, colors, domain_)
    clauses += gen_not_cons(n, k, colors, domain_)

    if shuffle_seed is not None:
        rng = np.random.default_rng(shuffle_seed)
        clauses = [clauses[i] for i in rng.permutation(len(clauses))]

    num_vars = colors * len(domain(n, k, domain_ == 'stable'))
    logger.debug('Generated %s n=%d k=%d colors=%d: %d vars, %d clauses', variant, n, k, colors, num_vars, len(clauses))
    return Cnf(variant, n, k, colors, domain_, clauses, num_vars, shuffle_seed)


def expected_counts(variant: str, n: int, k: int, colors: int = None) -> ClauseCounts:
    '''
    Closed-form variable and clause counts. The stable domain has no closed form for
    its disjoint pairs, they are counted on bitmasks instead.
    '''
    validate_inputs(variant=variant, n=n, k=k, colors=colors)
    if colors is None:
        colors = default_colors(n, k)
    if variant.startswith('schrijver'):
        size = count_stable(n, k)
        masks = [A.mask for A in domain(n, k, True)]
        pairs = sum(1 for i, a in enumerate(masks) for b in masks[i + 1:] if not a & b)
    else:
        size = int(comb(n, k, exact=True))
        pairs = int(comb(n, k, exact=True) * comb(n - k, k, exact=True)) // 2
    onto = size * int(comb(colors, 2, exact=True)) if variant.endswith('-onto') else 0
    cons = colors * pairs
    return ClauseCounts(vars=colors * size, ant=size, onto=onto, cons=cons, clauses=size + onto + cons)


# DIMACS

def _header_lines(cnf: Cnf) -> List[str]:
    lines = ['c variant={} n={} k={} colors={}'.format(cnf.variant, cnf.n, cnf.k, cnf.colors),
             'c domain={}'.format(cnf.domain),
             'c numbering={}'.format(NUMBERING_CONTRACT),
             'c onto={}'.format(ONTO_READING)]
    if cnf.seed is not None:
        lines.append('c seed={}'.format(cnf.seed))
    return lines


def dimacs_text(cnf: Cnf) -> str:
    lines = _header_lines(cnf) if cnf.variant != 'raw' else []
    lines.append('p cnf {} {}'.format(cnf.num_vars, len(cnf.clauses)))
    lines.extend(' '.join(str(l) for l in c) + ' 0' if c else '0' for c in cnf.clauses)
    return '\n'.join(lines) + '\n'


def write_dimacs(cnf: Cnf, sink) -> None:
    '''
    Write the instance as DIMACS CNF
    :param sink: path or writable text stream
    '''
    text = dimacs_text(cnf)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, 'w', newline='\n') as f:
            f.write(text)
    else:
        sink.write(text)


def _metadata(comment: str, meta: dict) -> None:
    for token in comment.split():
        key, sep, value = token.partition('=')
        if sep and key in ('variant', 'n', 'k', 'colors', 'domain', 'seed') and key not in meta:
            meta[key] = value


def parse_dimacs(source) -> Cnf:
    '''
    Read DIMACS CNF. Generator metadata in the comment lines is restored when present.
    :param source: path or readable text stream
    :return: Cnf (variant 'raw' when no metadata is found)
    '''
    if isinstance(source, (str, os.PathLike)):
        with open(source) as f:
            lines = f.read().splitlines()
    else:
        lines = source.read().splitlines()

    meta = {}
    header = None
    clauses = []
    current = []
    lineno = 0
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith('c'):
            if header is None and not line.startswith('c numbering') and not line.startswith('c onto'):
                _metadata(line[1:], meta)
            continue
        if line.startswith('p'):
            if header is not None:
                raise exc.DimacsParseFail('duplicate problem line', lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != 'cnf':
                raise exc.DimacsParseFail('malformed problem line "{}"'.format(line), lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise exc.DimacsParseFail('non-integer counts in problem line "{}"'.format(line), lineno)
            if header[0] < 0 or header[1] < 0:
                raise exc.DimacsParseFail('negative counts in problem line', lineno)
            continue
        if header is None:
            raise exc.DimacsParseFail('clause before the problem line', lineno)
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise exc.DimacsParseFail('"{}" is not a literal'.format(token), lineno)
            if lit == 0:
                clauses.append(make_clause(current))
                current = []
            elif abs(lit) > header[0]:
                raise exc.DimacsParseFail('literal {} exceeds the declared {} variables'.format(lit, header[0]), lineno)
            else:
                current.append(lit)

    if header is None:
        raise exc.DimacsParseFail('missing problem line', lineno + 1)
    if current:
        raise exc.DimacsParseFail('last clause is not terminated by 0', lineno + 1)
    if len(clauses) != header[1]:
        raise exc.DimacsParseFail('declared {} clauses, found {}'.format(header[1], len(clauses)), lineno + 1)

    try:
        if 'variant' in meta:
            return Cnf(meta['variant'], int(meta['n']), int(meta['k']), int(meta['colors']),
                       meta.get('domain', 'all'), clauses, header[0],
                       int(meta['seed']) if 'seed' in meta else None)
    except (KeyError, ValueError):
        raise exc.DimacsParseFail('incomplete generator metadata {}'.format(meta), 1)
    return Cnf('raw', 0, 0, 0, 'all', clauses, header[0])


def parse_dimacs_text(text: str) -> Cnf:
    return parse_dimacs(io.StringIO(text))


# Brute force

def brute_force_satisfiable(clauses: Sequence[Clause], num_vars: int, chunk_bits: int = 16) -> Tuple[bool, Optional[Tuple[int, ...]]]:
    '''
    Truth-table satisfiability over all 2^num_vars assignments, evaluated in numpy chunks.
    Rows that falsify a clause are dropped before the next clause is evaluated.
    :return: (satisfiable, model as DIMACS literals or None)
    '''
    if num_vars > BRUTE_FORCE_MAX_VARS:
        raise exc.FunctionInputFail('Brute force is limited to {} variables (got {})'.format(BRUTE_FORCE_MAX_VARS, num_vars))
    if any(len(c) == 0 for c in clauses):
        return False, None
    if num_vars == 0:
        return True, ()

    compiled = [(np.array([l - 1 for l in c if l > 0], dtype=np.int64),
                 np.array([-l - 1 for l in c if l < 0], dtype=np.int64)) for c in clauses]
    shifts = np.arange(num_vars, dtype=np.uint32)
    total = 1 << num_vars
    step = 1 << min(chunk_bits, num_vars)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.uint32)
        values = ((idx[:, None] >> shifts) & 1).astype(bool)
        for pos, neg in compiled:
            sat = np.zeros(len(values), dtype=bool)
            if len(pos):
                sat |= values[:, pos].any(axis=1)
            if len(neg):
                sat |= (~values[:, neg]).any(axis=1)
            values = values[sat]
            if not len(values):
                break
        if len(values):
            row = values[0]
            return True, tuple(v + 1 if row[v] else -(v + 1) for v in range(num_vars))
    return False, None


def cnf_brute_force(cnf: Cnf) -> Tuple[bool, Optional[Tuple[int, ...]]]:
    return brute_force_satisfiable(cnf.clauses, cnf.num_vars)
