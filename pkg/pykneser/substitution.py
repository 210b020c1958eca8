import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import pykneser.exceptions as exc
from pykneser.formula import Clause, Cnf, gen_cnf, make_clause
from pykneser.kneser import KSubset, default_colors, disjoint, domain, domain_rank, is_stable, validate_inputs as validate_ground

logger = logging.getLogger(__name__)

FAMILIES = ('kneser', 'schrijver')


class InstanceDescriptor(NamedTuple):
    variant: str
    k: int
    n: int
    colors: int

    @property
    def stable(self) -> bool:
        return self.variant.startswith('schrijver')

    @property
    def label(self) -> str:
        name = 'Schrijver' if self.stable else 'Kneser'
        return '{}_{{{},{}}}'.format(name, self.k, self.n)

    @property
    def num_vars(self) -> int:
        return self.colors * len(domain(self.n, self.k, self.stable))


@dataclass
class Substitution:
    """
    A variable-to-variable map between two instances of the same family.
    mapping sends source variable ids to target variable ids; cases records, per source
    set mask, which construction produced the image (1: firsts, 2: P with lambda, 0: identity/composed).
    """
    source: InstanceDescriptor
    target: InstanceDescriptor
    mapping: Dict[int, int]
    steps: int = 1
    cases: Dict[int, int] = field(default_factory=dict)

    def __call__(self, var: int) -> int:
        try:
            return self.mapping[var]
        except KeyError:
            raise exc.ContractViolation('Variable {} is outside the domain of {} -> {}'.format(
                var, self.source.label, self.target.label))

    def map_literal(self, lit: int) -> int:
        image = self(abs(lit))
        return image if lit > 0 else -image

    def map_clause(self, clause: Clause) -> Clause:
        return make_clause(self.map_literal(l) for l in clause)


def validate_inputs(**kwargs) -> None:
    validate_ground(**{i: kwargs[i] for i in ['k', 'colors'] if i in kwargs and kwargs[i] is not None})
    if 'variant' in kwargs and (kwargs['variant'] == 'php' or family_of(kwargs['variant']) not in FAMILIES):
        raise exc.FunctionInputFail('Substitutions exist for the kneser and schrijver families, got {}'.format(kwargs['variant']))
    if 'n' in kwargs and 'k' in kwargs:
        n, k = kwargs['n'], kwargs['k']
        if isinstance(n, bool) or not isinstance(n, int):
            raise exc.FunctionInputFail('n is not an integer')
        if n < 2 * (k + 1) or n < 3:
            raise exc.FunctionInputFail('Substitution from k+1={} needs n >= {} (got n={})'.format(k + 1, max(2 * (k + 1), 3), n))


def family_of(variant: str) -> str:
    if variant in ('kneser', 'kneser-onto', 'php'):
        return 'kneser'
    if variant in ('schrijver', 'schrijver-onto'):
        return 'schrijver'
    return variant


def phi_subset(A: KSubset, k: int) -> Tuple[KSubset, int]:
    '''
    Image of a (k+1)-subset A of [n] under the set part of the substitution.
    :return: (k-subset of [n-2], case) where case 1 keeps the k smallest elements and case 2
             replaces the pair {n-1, n} of A = P + {n-1, n} by lambda = max{j <= n-2, j not in P}
    '''
    n = A.n
    if len(A) != k + 1:
        raise exc.FunctionInputFail('{} is not a {}-subset'.format(A, k + 1))
    head = A.elements[:k]
    if head[-1] <= n - 2:
        return KSubset(head, n - 2), 1
    P = A.elements[:-2]
    if A.elements[-2:] != (n - 1, n):
        raise exc.InternalInconsistency('{} has an element above n-2 among its first {} but does not contain {{n-1, n}}'.format(A, k))
    lam = max(j for j in range(1, n - 1) if j not in P)
    return KSubset.of(n - 2, P + (lam,)), 2


def build_phi(k: int, n: int, variant: str = 'kneser', colors: int = None) -> Substitution:
    '''
    The substitution from the (k+1, n) instance to the (k, n-2) instance of the same family.
    Colors are preserved; both instances have n-2k-1 colors unless overridden.
    '''
    validate_inputs(k=k, n=n, variant=variant, colors=colors)
    if colors is None:
        colors = default_colors(n, k + 1)
    stable = family_of(variant) == 'schrijver'
    source = InstanceDescriptor(variant, k + 1, n, colors)
    target = InstanceDescriptor(variant, k, n - 2, colors)

    mapping = {}
    cases = {}
    for A in domain(n, k + 1, stable):
        C, case = phi_subset(A, k)
        if stable and not is_stable(C):
            raise exc.InternalInconsistency('Stable {} maps to the non-stable {}'.format(A, C))
        a_base = domain_rank(A, stable) * colors
        c_base = domain_rank(C, stable) * colors
        for l in range(1, colors + 1):
            mapping[a_base + l] = c_base + l
        cases[A.mask] = case
    return Substitution(source, target, mapping, 1, cases)


def identity_substitution(variant: str, k: int, n: int, colors: int = None) -> Substitution:
    validate_ground(n=n, k=k)
    if colors is None:
        colors = default_colors(n, k)
    descriptor = InstanceDescriptor(variant, k, n, colors)
    return Substitution(descriptor, descriptor, {v: v for v in range(1, descriptor.num_vars + 1)}, 0)


def compose_phi(k_top: int, n_top: int, variant: str = 'kneser', colors: int = None) -> Substitution:
    '''
    Chain of substitutions from the (k_top, n_top) instance down to k = 1, each step checked on its own
    '''
    validate_inputs(variant=variant, colors=colors)
    validate_ground(n=n_top, k=k_top)
    if colors is None:
        colors = default_colors(n_top, k_top)
    if k_top == 1:
        return identity_substitution(variant, 1, n_top, colors)

    composed = None
    n = n_top
    for step, k in enumerate(range(k_top - 1, 0, -1), 1):
        try:
            phi = build_phi(k, n, variant, colors)
        except exc.FunctionInputFail as e:
            raise exc.FunctionInputFail('Composition step {} ({} -> k={}) fails: {}'.format(step, k + 1, k, e))
        if composed is None:
            composed = phi
        else:
            composed = Substitution(composed.source, phi.target,
                                    {v: phi.mapping[w] for v, w in composed.mapping.items()},
                                    composed.steps + 1)
        n -= 2
    return composed


def _check_source(phi: Substitution, cnf: Cnf) -> None:
    src = phi.source
    if (cnf.k, cnf.n, cnf.colors) != (src.k, src.n, src.colors) or family_of(cnf.variant) != family_of(src.variant):
        raise exc.ContractViolation('Instance {} k={} n={} colors={} does not match the substitution source {}'.format(
            cnf.variant, cnf.k, cnf.n, cnf.colors, src.label))


def apply_to_cnf(phi: Substitution, source_cnf: Cnf, dedupe: bool = True) -> Cnf:
    '''
    Rewrite every clause variable-wise; duplicate literals are merged, and with dedupe
    repeated clauses keep only their first occurrence
    '''
    _check_source(phi, source_cnf)
    clauses = [phi.map_clause(c) for c in source_cnf.clauses]
    if dedupe:
        clauses = list(dict.fromkeys(clauses))
    tgt = phi.target
    variant = source_cnf.variant
    return Cnf(variant, tgt.n, tgt.k, tgt.colors, source_cnf.domain, clauses, tgt.num_vars)


@dataclass
class SubstitutionReport:
    source: InstanceDescriptor
    target: InstanceDescriptor
    image_equals_target: bool = True
    ant_witnesses: bool = True
    cons_witnesses: bool = True
    disjointness_preserved: bool = True
    stability_preserved: bool = True
    dispatch_consistent: bool = True
    source_clauses: int = 0
    target_clauses: int = 0
    max_multiplicity: int = 0
    counterexample: Optional[str] = None

    @property
    def passed(self) -> bool:
        return all([self.image_equals_target, self.ant_witnesses, self.cons_witnesses,
                    self.disjointness_preserved, self.stability_preserved, self.dispatch_consistent])

    def fail(self, check: str, message: str) -> None:
        setattr(self, check, False)
        if self.counterexample is None:
            self.counterexample = '{}: {}'.format(check, message)

    def summary(self) -> str:
        verdict = 'pass' if self.passed else 'FAIL'
        text = '{}: {} -> image = {}, {} source clauses, {} target clauses, max multiplicity {}'.format(
            verdict, self.source.label, self.target.label, self.source_clauses, self.target_clauses, self.max_multiplicity)
        if self.counterexample:
            text += '; first counterexample: ' + self.counterexample
        return text

    def findings(self) -> List[Tuple[str, str, str, str]]:
        params = 'variant={} k={} n={} colors={}'.format(self.source.variant, self.source.k, self.source.n, self.source.colors)
        rows = []
        for check in ['image_equals_target', 'ant_witnesses', 'cons_witnesses', 'disjointness_preserved',
                      'stability_preserved', 'dispatch_consistent']:
            ok = getattr(self, check)
            witness = '' if ok else (self.counterexample or '')
            rows.append((check, params, witness, 'pass' if ok else 'fail'))
        rows.append(('max_multiplicity', params, str(self.max_multiplicity), 'info'))
        return rows


def ant_preimage(C: KSubset, stable: bool) -> KSubset:
    '''
    A source set mapping to C: C + {n-1}, or C + {n} when stability forbids n-1 (n-2 in C)
    '''
    n = C.n + 2
    if stable and C.n in C:
        return KSubset(C.elements + (n,), n)
    return KSubset(C.elements + (n - 1,), n)


def cons_preimage(C: KSubset, D: KSubset, stable: bool) -> Tuple[KSubset, KSubset]:
    '''
    Disjoint source sets mapping to (C, D): n-1 goes to one of them and n to the other.
    In the stable case n-1 may not join a set containing n-2 and n may not join a set containing 1.
    '''
    n = C.n + 2
    if stable and (C.n in C or 1 in D):
        return KSubset(C.elements + (n,), n), KSubset(D.elements + (n - 1,), n)
    return KSubset(C.elements + (n - 1,), n), KSubset(D.elements + (n,), n)


def verify_image(k: int, n: int, variant: str = 'kneser', colors: int = None, phi: Substitution = None) -> SubstitutionReport:
    '''
    Check that the substituted (k+1, n) instance is exactly the (k, n-2) instance, up to repetition and order,
    and that every target clause has an explicit preimage.
    '''
    validate_inputs(k=k, n=n, variant=variant, colors=colors)
    if phi is None:
        phi = build_phi(k, n, variant, colors)
    stable = phi.source.stable
    colors = phi.source.colors
    report = SubstitutionReport(phi.source, phi.target)

    source_cnf = gen_cnf(variant, n, k + 1, colors)
    target_cnf = gen_cnf(variant, n - 2, k, colors)
    image = [phi.map_clause(c) for c in source_cnf.clauses]
    multiplicity = Counter(image)
    report.source_clauses = len(source_cnf.clauses)
    report.target_clauses = len(target_cnf.clauses)
    report.max_multiplicity = max(multiplicity.values()) if multiplicity else 0

    image_set = set(multiplicity)
    target_set = set(target_cnf.clauses)
    if image_set != target_set:
        missing = sorted(target_set - image_set)
        extra = sorted(image_set - target_set)
        report.fail('image_equals_target', '{} target clauses without preimage (e.g. {}), {} image clauses outside the target (e.g. {})'.format(
            len(missing), missing[:1], len(extra), extra[:1]))

    source_sets = domain(n, k + 1, stable)
    images = {A.mask: phi_subset(A, k) for A in source_sets}

    for A in source_sets:
        C, case = images[A.mask]
        if (case == 2) != ((n - 1) in A and n in A):
            report.fail('dispatch_consistent', '{} handled by case {}'.format(A, case))
        if stable and not is_stable(C):
            report.fail('stability_preserved', '{} -> {}'.format(A, C))

    masks = [A.mask for A in source_sets]
    for i, A in enumerate(source_sets):
        for j in range(i + 1, len(source_sets)):
            if masks[i] & masks[j]:
                continue
            C, D = images[masks[i]][0], images[masks[j]][0]
            if not disjoint(C, D):
                report.fail('disjointness_preserved', '{} and {} map to {} and {}'.format(A, source_sets[j], C, D))
                break

    source_masks = set(masks)
    target_sets = domain(n - 2, k, stable)
    for C in target_sets:
        A = ant_preimage(C, stable)
        if A.mask not in source_masks or images[A.mask][0] != C:
            report.fail('ant_witnesses', 'no preimage {} for the Ant clause of {}'.format(A, C))

    for i, C in enumerate(target_sets):
        for D in target_sets[i + 1:]:
            if not disjoint(C, D):
                continue
            A, B = cons_preimage(C, D, stable)
            ok = (A.mask in source_masks and B.mask in source_masks and disjoint(A, B)
                  and images[A.mask][0] == C and images[B.mask][0] == D)
            if not ok:
                report.fail('cons_witnesses', 'no disjoint preimage ({}, {}) for ({}, {})'.format(A, B, C, D))

    if report.passed:
        logger.info(report.summary())
    else:
        logger.error(report.summary())
    return report


def write_substitution(phi: Substitution, sink) -> None:
    '''
    Two-column export "source-id target-id", one variable per line, after a comment header
    '''
    lines = ['c source={} target={} variant={} colors={} steps={}'.format(
        phi.source.label, phi.target.label, phi.source.variant, phi.source.colors, phi.steps)]
    lines.extend('{} {}'.format(v, phi.mapping[v]) for v in sorted(phi.mapping))
    text = '\n'.join(lines) + '\n'
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, 'w') as f:
            f.write(text)
    else:
        sink.write(text)
