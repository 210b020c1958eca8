import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import pykneser.exceptions as exc
from pykneser.formula import Clause, Cnf, make_clause
from pykneser.substitution import Substitution

logger = logging.getLogger(__name__)

MODES = ('strict', 'tolerant')
FORMATS = ('native', 'rup')

INPUT = 'i'
RESOLVE = 'r'

# binary DRAT tags
ADD_TAG, DELETE_TAG = ord('a'), ord('d')


class Step(NamedTuple):
    kind: str
    clause: Clause
    left: Optional[int] = None
    right: Optional[int] = None
    pivot: Optional[int] = None


def input_step(clause: Iterable[int]) -> Step:
    return Step(INPUT, make_clause(clause))


def resolve_step(left: int, right: int, pivot: int, clause: Iterable[int]) -> Step:
    return Step(RESOLVE, make_clause(clause), left, right, abs(pivot))


@dataclass
class ResolutionProof:
    """
    Sequence of input and resolution steps. Step references are 0-based list positions,
    the text format uses 1-based step numbers. conclusion defaults to the first empty clause.
    """
    steps: List[Step] = field(default_factory=list)
    conclusion: Optional[int] = None

    def __post_init__(self):
        if self.conclusion is None:
            self.conclusion = next((i for i, s in enumerate(self.steps) if not s.clause), len(self.steps) - 1)

    def __len__(self) -> int:
        return len(self.steps)

    def add(self, step: Step) -> int:
        self.steps.append(step)
        return len(self.steps) - 1


def proof_size(proof: ResolutionProof) -> int:
    return len(proof.steps)


def resolvent(a: Clause, b: Clause, pivot: int) -> Clause:
    '''
    Resolvent of two clauses on the pivot variable, which must occur positively in one and negatively in the other
    '''
    p = abs(pivot)
    sa, sb = set(a), set(b)
    if p in sa and -p in sb:
        return make_clause((sa - {p}) | (sb - {-p}))
    if -p in sa and p in sb:
        return make_clause((sa - {-p}) | (sb - {p}))
    raise exc.FunctionInputFail('Pivot {} does not clash between {} and {}'.format(p, a, b))


@dataclass
class Verdict:
    passed: bool
    mode: str
    step: Optional[int] = None
    reason: str = ''
    steps_checked: int = 0

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        if self.passed:
            return 'pass ({} mode, {} steps)'.format(self.mode, self.steps_checked)
        return 'fail ({} mode) at step {}: {}'.format(self.mode, None if self.step is None else self.step + 1, self.reason)


def _subsumed_by_cnf(clause: frozenset, index: Dict[int, List[frozenset]], has_empty: bool) -> bool:
    if has_empty:
        return True
    for lit in clause:
        for c in index.get(lit, ()):
            if c <= clause:
                return True
    return False


def check_refutation(cnf: Cnf, proof: ResolutionProof, mode: str = 'strict') -> Verdict:
    '''
    Check a resolution refutation of cnf.
    strict: inputs appear verbatim in cnf and every recorded clause is the exact resolvent.
    tolerant: inputs may be weakenings of cnf clauses, and recorded clauses may be weakenings of the resolvent.
    :return: Verdict with the first failing step (0-based) and the reason
    '''
    if mode not in MODES:
        raise exc.FunctionInputFail('Unknown checking mode {}, expected strict or tolerant'.format(mode))

    cnf_set = {frozenset(c) for c in cnf.clauses}
    index = defaultdict(list)
    for c in cnf_set:
        for lit in c:
            index[lit].append(c)
    has_empty = frozenset() in cnf_set
    tolerant = mode == 'tolerant'

    clauses = []
    for i, step in enumerate(proof.steps):
        recorded = frozenset(step.clause)
        if step.kind == INPUT:
            if recorded not in cnf_set and not (tolerant and _subsumed_by_cnf(recorded, index, has_empty)):
                return Verdict(False, mode, i, 'input clause {} is not in the formula'.format(step.clause), i)
        elif step.kind == RESOLVE:
            if not (0 <= step.left < i and 0 <= step.right < i):
                return Verdict(False, mode, i, 'parents {} and {} are not earlier steps'.format(step.left + 1, step.right + 1), i)
            try:
                res = frozenset(resolvent(tuple(clauses[step.left]), tuple(clauses[step.right]), step.pivot))
            except exc.FunctionInputFail as e:
                return Verdict(False, mode, i, str(e), i)
            if recorded != res and not (tolerant and res <= recorded):
                return Verdict(False, mode, i, 'recorded clause {} is not the resolvent {}'.format(
                    step.clause, make_clause(res)), i)
        else:
            return Verdict(False, mode, i, 'unknown step kind {}'.format(step.kind), i)
        clauses.append(recorded)

    c = proof.conclusion
    if c is None or not 0 <= c < len(clauses):
        return Verdict(False, mode, c, 'conclusion is not a step of the proof', len(clauses))
    if clauses[c]:
        return Verdict(False, mode, c, 'conclusion {} is not the empty clause'.format(proof.steps[c].clause), len(clauses))
    return Verdict(True, mode, None, '', len(clauses))


def transport(proof: ResolutionProof, phi: Substitution, tighten: bool = True) -> ResolutionProof:
    '''
    Push a refutation of the substitution source through the variable map.

    With tighten=False every clause is replaced by its literal-wise image; resolvents then become
    weakenings and the result checks in tolerant mode with the same number of steps.
    With tighten=True each step keeps a clause contained in its image: when the image of the pivot
    has vanished from a parent, the step collapses to that parent and is aliased away, so the
    proof can only get shorter.
    '''
    if not tighten:
        steps = []
        for step in proof.steps:
            image = phi.map_clause(step.clause)
            if step.kind == RESOLVE:
                steps.append(Step(RESOLVE, image, step.left, step.right, phi(step.pivot)))
            else:
                steps.append(Step(step.kind, image))
        return ResolutionProof(steps, proof.conclusion)

    out = ResolutionProof()
    derived = []
    alias = []
    for step in proof.steps:
        if step.kind == INPUT:
            image = phi.map_clause(step.clause)
            derived.append(frozenset(image))
            alias.append(out.add(Step(INPUT, image)))
            continue

        p = step.pivot
        if p in proof.steps[step.left].clause:
            pos, neg = step.left, step.right
        else:
            pos, neg = step.right, step.left
        q = phi(p)
        if q not in derived[pos]:
            derived.append(derived[pos])
            alias.append(alias[pos])
        elif -q not in derived[neg]:
            derived.append(derived[neg])
            alias.append(alias[neg])
        else:
            res = (derived[pos] - {q}) | (derived[neg] - {-q})
            derived.append(frozenset(res))
            alias.append(out.add(resolve_step(alias[pos], alias[neg], q, res)))

    out.conclusion = alias[proof.conclusion]
    logger.debug('Transported %d steps into %d', len(proof.steps), len(out.steps))
    return out


# Proof formats

def _binary_drat_lines(data: bytes) -> List[str]:
    '''
    Binary DRAT: a tag byte 'a' or 'd', then each literal as a little-endian base-128 number 2v (+1 when negative),
    the clause closed by 0. Returned as text DRAT lines.
    '''
    lines = []
    i = 0
    while i < len(data):
        tag = data[i]
        if tag not in (ADD_TAG, DELETE_TAG):
            raise exc.ProofParseFail('unexpected byte 0x{:02x} at offset {} of a binary proof'.format(tag, i), len(lines) + 1)
        i += 1
        lits = []
        while True:
            value, shift = 0, 0
            while True:
                if i >= len(data):
                    raise exc.ProofParseFail('binary proof ends inside a clause', len(lines) + 1)
                byte = data[i]
                i += 1
                value |= (byte & 0x7f) << shift
                shift += 7
                if not byte & 0x80:
                    break
            if value == 0:
                break
            lits.append(-(value >> 1) if value & 1 else value >> 1)
        lines.append(('d ' if tag == DELETE_TAG else '') + ' '.join(str(l) for l in lits + [0]))
    return lines


def _decode(data: bytes) -> List[str]:
    if data[:1] == b'a' or b'\x00' in data:
        return _binary_drat_lines(data)
    try:
        return data.decode().splitlines()
    except UnicodeDecodeError as e:
        raise exc.ProofParseFail('proof is neither text nor binary DRAT ({})'.format(e))


def _read_lines(source) -> List[str]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, 'rb') as f:
            return _decode(f.read())
    if hasattr(source, 'read'):
        data = source.read()
        return _decode(data) if isinstance(data, bytes) else data.splitlines()
    try:
        return [line.decode() if isinstance(line, bytes) else line for line in source]
    except UnicodeDecodeError as e:
        raise exc.ProofParseFail('proof lines are not text ({})'.format(e))


def _literals(tokens: Sequence[str], lineno: int) -> List[int]:
    try:
        values = [int(t) for t in tokens]
    except ValueError:
        raise exc.ProofParseFail('non-integer literal in {}'.format(' '.join(tokens)), lineno)
    if not values or values[-1] != 0:
        raise exc.ProofParseFail('clause is not terminated by 0', lineno)
    if 0 in values[:-1]:
        raise exc.ProofParseFail('literal 0 inside a clause', lineno)
    return values[:-1]


def emit_proof(proof: ResolutionProof, sink) -> None:
    '''
    Native text format: "i <lits> 0" for inputs and "r a b p <lits> 0" for resolvents, a and b being 1-based step numbers
    '''
    lines = ['c conclusion {}'.format(proof.conclusion + 1)]
    for step in proof.steps:
        lits = ' '.join(str(l) for l in step.clause)
        body = (lits + ' 0') if lits else '0'
        if step.kind == INPUT:
            lines.append('i ' + body)
        else:
            lines.append('r {} {} {} {}'.format(step.left + 1, step.right + 1, step.pivot, body))
    text = '\n'.join(lines) + '\n'
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, 'w') as f:
            f.write(text)
    else:
        sink.write(text)


def _parse_native(lines: List[str]) -> ResolutionProof:
    steps = []
    conclusion = None
    for lineno, line in enumerate(lines, 1):
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == 'c':
            if len(tokens) == 3 and tokens[1] == 'conclusion':
                try:
                    conclusion = int(tokens[2]) - 1
                except ValueError:
                    raise exc.ProofParseFail('malformed conclusion comment', lineno)
            continue
        if tokens[0] == INPUT:
            steps.append(input_step(_literals(tokens[1:], lineno)))
        elif tokens[0] == RESOLVE:
            if len(tokens) < 5:
                raise exc.ProofParseFail('resolution step needs two parents, a pivot and a clause', lineno)
            try:
                a, b, p = int(tokens[1]), int(tokens[2]), int(tokens[3])
            except ValueError:
                raise exc.ProofParseFail('non-integer step reference', lineno)
            if not (1 <= a <= len(steps) and 1 <= b <= len(steps)):
                raise exc.ProofParseFail('step {} references a later or missing step'.format(len(steps) + 1), lineno)
            if p == 0:
                raise exc.ProofParseFail('pivot 0', lineno)
            steps.append(resolve_step(a - 1, b - 1, p, _literals(tokens[4:], lineno)))
        else:
            raise exc.ProofParseFail('unknown step kind "{}"'.format(tokens[0]), lineno)
    if not steps:
        raise exc.ProofParseFail('empty proof')
    return ResolutionProof(steps, conclusion)


class _RupBuilder:
    """
    Rebuilds resolution steps for clausal (RUP/DRUP) proofs. Every lemma is assumed false,
    unit propagation runs over the formula and the lemmas derived so far, and the conflict
    is resolved back along the trail until only literals of the lemma remain.
    """

    def __init__(self, cnf: Cnf):
        self.proof = ResolutionProof()
        self.db: List[Clause] = []
        self.step_of: List[Optional[int]] = []
        self.occurs = defaultdict(list)
        self.known = {}
        for c in cnf.clauses:
            self._add(c, None)

    def _add(self, clause: Clause, step: Optional[int]) -> int:
        key = frozenset(clause)
        if key in self.known:
            idx = self.known[key]
            if self.step_of[idx] is None and step is not None:
                self.step_of[idx] = step
            return idx
        idx = len(self.db)
        self.db.append(clause)
        self.step_of.append(step)
        self.known[key] = idx
        for lit in clause:
            self.occurs[lit].append(idx)
        return idx

    def _step(self, idx: int) -> int:
        if self.step_of[idx] is None:
            self.step_of[idx] = self.proof.add(Step(INPUT, self.db[idx]))
        return self.step_of[idx]

    @staticmethod
    def _unit_prop(clause: Clause, value: Dict[int, bool]) -> Tuple[str, Optional[int]]:
        ulit = None
        for lit in clause:
            v = value.get(abs(lit))
            if v is None:
                if ulit is not None:
                    return 'none', None
                ulit = lit
            elif v == (lit > 0):
                return 'satisfied', lit
        if ulit is None:
            return 'conflict', None
        return 'unit', ulit

    def _propagate(self, lemma: Clause) -> Optional[Tuple[int, List[int], Dict[int, int]]]:
        value: Dict[int, bool] = {}
        reason: Dict[int, Optional[int]] = {}
        trail: List[int] = []

        def assign(lit, why):
            value[abs(lit)] = lit > 0
            reason[abs(lit)] = why
            trail.append(lit)

        for lit in lemma:
            if abs(lit) not in value:
                assign(-lit, None)
        for idx, c in enumerate(self.db):
            if len(c) == 0:
                return idx, trail, reason
            if len(c) == 1:
                v = value.get(abs(c[0]))
                if v is None:
                    assign(c[0], idx)
                elif v != (c[0] > 0):
                    return idx, trail, reason

        head = 0
        while head < len(trail):
            falsified = -trail[head]
            head += 1
            for idx in self.occurs.get(falsified, ()):
                status, lit = self._unit_prop(self.db[idx], value)
                if status == 'conflict':
                    return idx, trail, reason
                if status == 'unit':
                    assign(lit, idx)
        return None

    def derive(self, lemma: Clause, lineno: int = None, number: int = None) -> Clause:
        if any(-l in lemma for l in lemma):
            return lemma
        found = self._propagate(lemma)
        if found is None:
            raise exc.ProofParseFail('lemma {} ({}) is not derivable by unit propagation'.format(
                number, ' '.join(str(l) for l in lemma) or 'empty clause'), lineno, lemma)
        conflict, trail, reason = found
        current = set(self.db[conflict])
        current_step = self._step(conflict)
        for lit in reversed(trail):
            why = reason[abs(lit)]
            if why is None or -lit not in current:
                continue
            other = self.db[why]
            current = (current - {-lit}) | (set(other) - {lit})
            other_step = self._step(why)
            if lit > 0:
                current_step = self.proof.add(resolve_step(other_step, current_step, lit, current))
            else:
                current_step = self.proof.add(resolve_step(current_step, other_step, lit, current))
        derived = make_clause(current)
        self._add(derived, current_step)
        return derived


def _parse_rup(lines: List[str], cnf: Cnf) -> ResolutionProof:
    builder = _RupBuilder(cnf)
    number = 0
    for lineno, line in enumerate(lines, 1):
        tokens = line.split()
        if not tokens or tokens[0] == 'c':
            continue
        if tokens[0] == 'd':
            # deletions only free memory in a checker, keeping the clauses is sound
            continue
        number += 1
        derived = builder.derive(make_clause(_literals(tokens, lineno)), lineno, number)
        if not derived:
            break
    else:
        builder.derive((), None, 'final')
    proof = builder.proof
    proof.conclusion = next(i for i, s in enumerate(proof.steps) if not s.clause)
    logger.info('Imported %d lemmas into %d resolution steps', number, len(proof.steps))
    return proof


def parse_proof(source, format: str = 'native', cnf: Cnf = None) -> ResolutionProof:
    '''
    Read a proof.
    :param source: path, readable stream or iterable of lines
    :param format: native or rup (RUP/DRUP/DRAT, text or binary, deletions ignored)
    :param cnf: formula the clausal proof refers to, required for rup
    '''
    if format not in FORMATS:
        raise exc.FunctionInputFail('Unknown proof format {}, expected native or rup'.format(format))
    lines = _read_lines(source)
    if format == 'native':
        return _parse_native(lines)
    if cnf is None:
        raise exc.FunctionInputFail('RUP import needs the formula the proof refers to')
    return _parse_rup(lines, cnf)
