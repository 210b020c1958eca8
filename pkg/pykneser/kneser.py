import functools
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

import pykneser.exceptions as exc

logger = logging.getLogger(__name__)

# Enumerations above this ground-set size are legal but no longer desk scale
DESK_SCALE_N = 24


def validate_inputs(**kwargs) -> None:
    """
    Validation of the ground-set parameters shared by all modules.

    ===========  ===================================  =========================
    Parameter    Hard requirement                     Soft boundary (warning)
    ===========  ===================================  =========================
    n            integer, n >= 2k                     n <= 24
    k            integer, k >= 1
    colors       integer, colors >= 1
    r            integer, r >= 0
    ===========  ===================================  =========================
    """
    for i in ['n', 'k', 'colors', 'r']:
        if i in kwargs:
            if kwargs[i] is None:
                raise exc.FunctionInputFail('No construction is done due to missing {}'.format(i))
            if isinstance(kwargs[i], bool) or not isinstance(kwargs[i], (int, np.integer)):
                raise exc.FunctionInputFail('{} is not an integer'.format(i))

    if 'k' in kwargs and kwargs['k'] < 1:
        raise exc.FunctionInputFail('Subset size, k, must be at least 1 (got {})'.format(kwargs['k']))
    if 'n' in kwargs and 'k' in kwargs and kwargs['n'] < 2 * kwargs['k']:
        raise exc.FunctionInputFail('Ground set size, n={}, is smaller than 2k={}'.format(kwargs['n'], 2 * kwargs['k']))
    if 'colors' in kwargs and kwargs['colors'] < 1:
        raise exc.FunctionInputFail('Number of colors must be at least 1 (got {})'.format(kwargs['colors']))
    if 'r' in kwargs and kwargs['r'] < 0:
        raise exc.FunctionInputFail('Color prefix, r, must be non-negative (got {})'.format(kwargs['r']))

    if 'n' in kwargs and kwargs['n'] > DESK_SCALE_N:
        logger.warning('Ground set size, n, is outside desk-scale boundaries (n <= {}), '
                       'enumeration may be slow.'.format(DESK_SCALE_N))


@functools.total_ordering
@dataclass(frozen=True)
class KSubset:
    """
    A k-element subset of [n] = {1, ..., n}, elements kept strictly increasing.
    Ordering is colex, which coincides with the integer order of the bitmask.
    """
    elements: Tuple[int, ...]
    n: int

    def __post_init__(self):
        if not isinstance(self.elements, tuple):
            object.__setattr__(self, 'elements', tuple(self.elements))
        if not self.elements:
            raise exc.FunctionInputFail('A k-subset needs at least one element')
        if any(a >= b for a, b in zip(self.elements, self.elements[1:])):
            raise exc.FunctionInputFail('Elements {} are not strictly increasing'.format(self.elements))
        if self.elements[0] < 1 or self.elements[-1] > self.n:
            raise exc.FunctionInputFail('Elements {} are outside [1, {}]'.format(self.elements, self.n))

    @classmethod
    def of(cls, n: int, elements) -> 'KSubset':
        return cls(tuple(sorted(elements)), n)

    @property
    def k(self) -> int:
        return len(self.elements)

    @functools.cached_property
    def mask(self) -> int:
        m = 0
        for e in self.elements:
            m |= 1 << (e - 1)
        return m

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, item) -> bool:
        return item in self.elements

    def __lt__(self, other: 'KSubset') -> bool:
        return self.mask < other.mask

    def __str__(self) -> str:
        return '{' + ','.join(str(e) for e in self.elements) + '}'


def subset_from_mask(mask: int, n: int) -> KSubset:
    return KSubset(tuple(i + 1 for i in range(n) if mask >> i & 1), n)


@functools.lru_cache(maxsize=None)
def enum_ksubsets(n: int, k: int) -> Tuple[KSubset, ...]:
    '''
    All k-subsets of [n] in colex order
    :param n: ground set size
    :param k: subset size
    :return: tuple of KSubset, position equals colex rank
    '''
    validate_inputs(n=n, k=k)
    ordered = sorted(combinations(range(1, n + 1), k), key=lambda t: t[::-1])
    return tuple(KSubset(t, n) for t in ordered)


def colex_rank(A: KSubset) -> int:
    '''
    0-based colex rank, sum of C(a_i - 1, i) over the increasing elements a_1 < ... < a_k
    '''
    return sum(math.comb(a - 1, i) for i, a in enumerate(A.elements, 1))


def colex_unrank(r: int, n: int, k: int) -> KSubset:
    '''
    Inverse of colex_rank
    :param r: rank in [0, C(n,k))
    :return: the k-subset of [n] at position r
    '''
    validate_inputs(n=n, k=k, r=r)
    if r >= math.comb(n, k):
        raise exc.FunctionInputFail('Rank {} is outside [0, C({},{}) = {})'.format(r, n, k, math.comb(n, k)))

    elements = []
    upper = n
    for i in range(k, 0, -1):
        c = upper - 1
        while math.comb(c, i) > r:
            c -= 1
        elements.append(c + 1)
        r -= math.comb(c, i)
        upper = c
    return KSubset(tuple(reversed(elements)), n)


def is_stable(A: KSubset) -> bool:
    '''
    True iff no two cyclically adjacent elements of [n] lie in A. The pair {n, 1} counts as adjacent.
    '''
    e = A.elements
    if any(b - a < 2 for a, b in zip(e, e[1:])):
        return False
    return not (len(e) > 1 and e[0] == 1 and e[-1] == A.n)


@functools.lru_cache(maxsize=None)
def enum_stable(n: int, k: int) -> Tuple[KSubset, ...]:
    return tuple(A for A in enum_ksubsets(n, k) if is_stable(A))


def count_stable(n: int, k: int) -> int:
    '''
    Closed form n/(n-k) * C(n-k, k) for the number of stable k-subsets of [n]
    '''
    validate_inputs(n=n, k=k)
    return n * math.comb(n - k, k) // (n - k)


def disjoint(A: KSubset, B: KSubset) -> bool:
    return not (A.mask & B.mask)


def firsts(A: KSubset, k: int) -> KSubset:
    '''
    The k smallest elements of A, on the same ground set
    '''
    if k < 1 or len(A) < k:
        raise exc.FunctionInputFail('Cannot take the {} smallest elements of {}'.format(k, A))
    return KSubset(A.elements[:k], A.n)


def chromatic_number(n: int, k: int) -> int:
    validate_inputs(n=n, k=k)
    return n - 2 * k + 2


def default_colors(n: int, k: int) -> int:
    '''
    Number of colors of the unsatisfiable instance, one below the chromatic number
    '''
    validate_inputs(n=n, k=k)
    return n - 2 * k + 1


# Variable numbering

def domain(n: int, k: int, stable: bool = False) -> Tuple[KSubset, ...]:
    return enum_stable(n, k) if stable else enum_ksubsets(n, k)


@functools.lru_cache(maxsize=None)
def _stable_positions(n: int, k: int) -> Dict[int, int]:
    return {A.mask: i for i, A in enumerate(enum_stable(n, k))}


def domain_rank(A: KSubset, stable: bool = False) -> int:
    '''
    Position of A in its domain. For the stable domain this is the rank among stable sets only.
    '''
    if not stable:
        return colex_rank(A)
    try:
        return _stable_positions(A.n, A.k)[A.mask]
    except KeyError:
        raise exc.FunctionInputFail('{} is not a stable subset of [{}]'.format(A, A.n))


class VarId(NamedTuple):
    subset: KSubset
    color: int
    id: int


def var_id(A: KSubset, color: int, colors: int, stable: bool = False) -> int:
    '''
    The numbering contract: id = rank * colors + color with 0-based domain rank and colors 1..colors
    '''
    if not 1 <= color <= colors:
        raise exc.FunctionInputFail('Color {} is outside [1, {}]'.format(color, colors))
    return domain_rank(A, stable) * colors + color


def make_var(A: KSubset, color: int, colors: int, stable: bool = False) -> VarId:
    return VarId(A, color, var_id(A, color, colors, stable))


def decode_var(id: int, n: int, k: int, colors: int, stable: bool = False) -> VarId:
    '''
    Inverse of var_id
    :param id: positive variable id
    :return: VarId with subset, color and the id itself
    '''
    validate_inputs(n=n, k=k, colors=colors)
    dom = domain(n, k, stable)
    if not 1 <= id <= colors * len(dom):
        raise exc.FunctionInputFail('Variable {} is outside [1, {}]'.format(id, colors * len(dom)))
    rank, c = divmod(id - 1, colors)
    return VarId(dom[rank], c + 1, id)


@dataclass(frozen=True)
class Coloring:
    """
    A total coloring of the domain (all k-subsets, or the stable ones) with colors 1..colors.
    assignment[i] is the color of the domain set at colex position i.
    """
    n: int
    k: int
    colors: int
    assignment: Tuple[int, ...]
    stable: bool = False

    def __post_init__(self):
        validate_inputs(n=self.n, k=self.k, colors=self.colors)
        object.__setattr__(self, 'assignment', tuple(int(c) for c in self.assignment))
        size = len(domain(self.n, self.k, self.stable))
        if len(self.assignment) != size:
            raise exc.FunctionInputFail('Coloring assigns {} sets, the domain has {}'.format(len(self.assignment), size))
        if any(not 1 <= c <= self.colors for c in self.assignment):
            raise exc.FunctionInputFail('Coloring uses colors outside [1, {}]'.format(self.colors))

    @classmethod
    def from_function(cls, n: int, k: int, colors: int, fn: Callable[[KSubset], int],
                      stable: bool = False) -> 'Coloring':
        return cls(n, k, colors, tuple(fn(A) for A in domain(n, k, stable)), stable)

    @property
    def sets(self) -> Tuple[KSubset, ...]:
        return domain(self.n, self.k, self.stable)

    def color_of(self, A: KSubset) -> int:
        return self.assignment[domain_rank(A, self.stable)]

    def color_class(self, color: int) -> List[KSubset]:
        return [A for A, c in zip(self.sets, self.assignment) if c == color]

    def classes(self) -> Dict[int, List[KSubset]]:
        out = {c: [] for c in range(1, self.colors + 1)}
        for A, c in zip(self.sets, self.assignment):
            out[c].append(A)
        return out


def random_coloring(n: int, k: int, colors: int, rng: np.random.Generator, stable: bool = False) -> Coloring:
    size = len(domain(n, k, stable))
    return Coloring(n, k, colors, tuple(rng.integers(1, colors + 1, size=size)), stable)


def family_masks(S: Sequence[KSubset]) -> List[int]:
    return [A.mask for A in S]
