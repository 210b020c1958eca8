import logging
import math
import os
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit

import pykneser.exceptions as exc

logger = logging.getLogger(__name__)

GATE_OPS = ('and', 'or', 'xor', 'not')

# Item 4 ranges over all pairs X <= Y, i.e. 3^n pairs
EXHAUSTIVE_PAIRS_N = 12
EXHAUSTIVE_N = 16

CITATION_NOTE = ('item 5 is cited by the k=2 counting argument but the counting lemma states items 1-4 only; '
                 'the citation is read as the monotonicity item 4')


@dataclass
class CountCircuit:
    """
    Boolean circuit over n inputs. Node ids 0..n-1 are the inputs, node n+i is gates[i].
    outputs lists the nodes of the binary popcount, least significant bit first.
    """
    n: int
    gates: List[Tuple[str, int, Optional[int]]] = field(default_factory=list)
    outputs: List[int] = field(default_factory=list)

    def gate(self, op: str, a: int, b: int = None) -> int:
        self.gates.append((op, a, b))
        return self.n + len(self.gates) - 1

    @property
    def size(self) -> int:
        return len(self.gates)


def validate_inputs(**kwargs) -> None:
    for i in ['n', 'samples']:
        if i in kwargs and kwargs[i] is not None:
            if isinstance(kwargs[i], bool) or not isinstance(kwargs[i], (int, np.integer)):
                raise exc.FunctionInputFail('{} is not an integer'.format(i))
            if kwargs[i] < 1:
                raise exc.FunctionInputFail('{} must be at least 1 (got {})'.format(i, kwargs[i]))
    if kwargs.get('n', 0) > 4096:
        logger.warning('Circuit width, n, is outside desk-scale boundaries (n <= 4096).')


def _ripple_add(c: CountCircuit, x: List[int], y: List[int], width: int) -> List[int]:
    # full adder: s = a ^ b ^ cin, cout = (a & b) | ((a ^ b) & cin); no carry beyond width
    out = []
    carry = None
    for i in range(width):
        operands = [t for t in (x[i] if i < len(x) else None, y[i] if i < len(y) else None, carry) if t is not None]
        last = i + 1 == width
        if len(operands) == 1:
            out.append(operands[0])
            carry = None
        elif len(operands) == 2:
            u, v = operands
            out.append(c.gate('xor', u, v))
            carry = None if last else c.gate('and', u, v)
        elif len(operands) == 3:
            a, b, cin = operands
            t = c.gate('xor', a, b)
            out.append(c.gate('xor', t, cin))
            carry = None if last else c.gate('or', c.gate('and', a, b), c.gate('and', t, cin))
    return out


def build_count(n: int) -> CountCircuit:
    '''
    Popcount circuit: a balanced binary tree of ripple-carry adders.
    Each partial sum of m inputs keeps m.bit_length() bits, so the output has ceil(log2(n+1)) bits.
    :param n: number of inputs
    '''
    validate_inputs(n=n)
    c = CountCircuit(n)

    def count(lo, hi):
        if hi - lo == 1:
            return [lo]
        mid = (lo + hi) // 2
        return _ripple_add(c, count(lo, mid), count(mid, hi), (hi - lo).bit_length())

    c.outputs = count(0, n)
    return c


def eval_circuit(c: CountCircuit, inputs) -> np.ndarray:
    '''
    Evaluate on one boolean vector or on a matrix of vectors (one per row).
    Rows are bit-packed so each gate is a single numpy operation over all rows.
    :return: integer value of the outputs (int for a single vector, int64 array otherwise)
    '''
    x = np.asarray(inputs, dtype=bool)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != c.n:
        raise exc.FunctionInputFail('Input width {} does not match circuit width {}'.format(x.shape[-1], c.n))
    m = x.shape[0]
    packed = np.packbits(x, axis=0)
    values = [packed[:, i] for i in range(c.n)]
    for op, a, b in c.gates:
        if op == 'and':
            values.append(values[a] & values[b])
        elif op == 'or':
            values.append(values[a] | values[b])
        elif op == 'xor':
            values.append(values[a] ^ values[b])
        elif op == 'not':
            values.append(~values[a])
        else:
            raise exc.FunctionInputFail('Unknown gate {}'.format(op))
    out = np.zeros(m, dtype=np.int64)
    for bit, node in enumerate(c.outputs):
        out |= np.unpackbits(values[node], count=m).astype(np.int64) << bit
    return int(out[0]) if single else out


def circuit_size(n: int) -> int:
    return build_count(n).size


def fit_circuit_size(ns: Sequence[int] = (8, 16, 32, 64, 128)) -> Tuple[float, List[int]]:
    '''
    Least-squares fit of size(n) = c * n * log2(n)
    :return: fitted c and the measured sizes
    '''
    sizes = [circuit_size(n) for n in ns]
    popt, _ = curve_fit(lambda x, c: c * x * np.log2(x), np.asarray(ns, dtype=float), np.asarray(sizes, dtype=float))
    logger.info('Count circuit size fit: c = %.3f over n in %s', popt[0], list(ns))
    return float(popt[0]), sizes


def write_netlist(c: CountCircuit, sink) -> None:
    lines = ['c count circuit n={} gates={}'.format(c.n, c.size), 'inputs {}'.format(c.n)]
    for i, (op, a, b) in enumerate(c.gates):
        lines.append('g {} {} {}'.format(c.n + i, op, a if b is None else '{} {}'.format(a, b)))
    lines.append('outputs ' + ' '.join(str(o) for o in c.outputs))
    text = '\n'.join(lines) + '\n'
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, 'w') as f:
            f.write(text)
    else:
        sink.write(text)


# Arithmetic on binary encodings, arrays of shape (..., width), least significant bit first

def int_to_bits(values, width: int) -> np.ndarray:
    v = np.asarray(values, dtype=np.int64)
    return ((v[..., None] >> np.arange(width)) & 1).astype(bool)


def bits_to_int(bits) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64)
    return (b << np.arange(b.shape[-1])).sum(axis=-1)


def _pad(a: np.ndarray, width: int) -> np.ndarray:
    if a.shape[-1] >= width:
        return a
    pad = np.zeros(a.shape[:-1] + (width - a.shape[-1],), dtype=bool)
    return np.concatenate([a, pad], axis=-1)


def binary_add(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=bool), np.asarray(b, dtype=bool)
    width = max(a.shape[-1], b.shape[-1])
    a, b = np.broadcast_arrays(_pad(a, width), _pad(b, width))
    out = np.zeros(a.shape[:-1] + (width + 1,), dtype=bool)
    carry = np.zeros(a.shape[:-1], dtype=bool)
    for i in range(width):
        t = a[..., i] ^ b[..., i]
        out[..., i] = t ^ carry
        carry = (a[..., i] & b[..., i]) | (t & carry)
    out[..., width] = carry
    return out


def binary_subtract(a, b) -> Tuple[np.ndarray, np.ndarray]:
    '''
    a - b modulo 2^width, with the final borrow (True exactly when a < b)
    '''
    a, b = np.asarray(a, dtype=bool), np.asarray(b, dtype=bool)
    width = max(a.shape[-1], b.shape[-1])
    a, b = np.broadcast_arrays(_pad(a, width), _pad(b, width))
    out = np.zeros(a.shape, dtype=bool)
    borrow = np.zeros(a.shape[:-1], dtype=bool)
    for i in range(width):
        t = a[..., i] ^ b[..., i]
        out[..., i] = t ^ borrow
        borrow = (~a[..., i] & b[..., i]) | (~t & borrow)
    return out, borrow


def binary_equal(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=bool), np.asarray(b, dtype=bool)
    width = max(a.shape[-1], b.shape[-1])
    return (_pad(a, width) == _pad(b, width)).all(axis=-1)


def binary_less_equal(a, b) -> np.ndarray:
    _, borrow = binary_subtract(b, a)
    return ~borrow


def binary_multiply(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=bool), np.asarray(b, dtype=bool)
    width = a.shape[-1] + b.shape[-1]
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    acc = np.zeros(shape + (width,), dtype=bool)
    for i in range(b.shape[-1]):
        partial = np.zeros(shape + (width,), dtype=bool)
        partial[..., i:i + a.shape[-1]] = a & b[..., i:i + 1]
        acc = binary_add(acc, partial)[..., :width]
    return acc


def binary_choose2(a) -> np.ndarray:
    '''
    x(x-1)/2 on encodings: multiply x by x-1 (x = 0 gives 0 whatever x-1 wraps to) and drop the lowest bit
    '''
    a = np.asarray(a, dtype=bool)
    one = np.zeros(a.shape[-1], dtype=bool)
    one[0] = True
    decremented, _ = binary_subtract(a, one)
    return binary_multiply(a, decremented)[..., 1:]


# The four counting identities

class IdentityResult(NamedTuple):
    item: int
    statement: str
    passed: bool
    checked: int
    exhaustive: bool
    counterexample: Optional[str] = None


@dataclass
class IdentityReport:
    n: int
    seed: Optional[int]
    items: List[IdentityResult] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.items)

    def to_frame(self) -> pd.DataFrame:
        rows = [('identity-{}'.format(r.item), 'n={} seed={} checked={} exhaustive={}'.format(
                    self.n, self.seed, r.checked, r.exhaustive), r.counterexample or '', 'pass' if r.passed else 'fail')
                for r in self.items]
        rows += [('note', 'n={}'.format(self.n), note, 'info') for note in self.notes]
        return pd.DataFrame(rows, columns=['kind', 'params', 'witness', 'verdict'])


def _all_vectors(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(bool)


def _first_failure(ok: np.ndarray, describe) -> Optional[str]:
    bad = np.flatnonzero(~ok)
    return describe(bad[0]) if len(bad) else None


def _vector(row) -> str:
    return ''.join('1' if v else '0' for v in row)


def check_count_identities(n: int, samples: int = None, seed: int = 0) -> IdentityReport:
    '''
    Evaluate both sides of each counting identity as integers:
    (1) all inputs true gives n; (2) the count of pairwise conjunctions is C(count, 2);
    (3) the count over the n x n grid X_i for i != j is count * (n-1);
    (4) X <= Y pointwise gives count(X) <= count(Y).
    Exhaustive over all inputs for n <= 16 (item 4 for n <= 12) unless samples is given.
    '''
    validate_inputs(n=n, samples=samples)
    if n < 2:
        raise exc.FunctionInputFail('Counting identities need n >= 2 (got {})'.format(n))
    rng = np.random.default_rng(seed)
    report = IdentityReport(n, seed, notes=[CITATION_NOTE])
    width = n.bit_length()
    count_n = build_count(n)

    exhaustive = samples is None and n <= EXHAUSTIVE_N
    X = _all_vectors(n) if exhaustive else rng.integers(0, 2, size=(samples or 10 ** 4, n)).astype(bool)
    m = len(X)
    cx = eval_circuit(count_n, X)
    cx_bits = int_to_bits(cx, width)

    full = eval_circuit(count_n, np.ones(n, dtype=bool))
    report.items.append(IdentityResult(1, 'all true => Count_n = n', full == n, 1, True,
                                       None if full == n else 'count {} for all-true input'.format(full)))

    I, J = np.triu_indices(n, 1)
    pairs = X[:, I] & X[:, J]
    lhs = eval_circuit(build_count(len(I)), pairs)
    ok = binary_equal(int_to_bits(lhs, len(I).bit_length()), binary_choose2(cx_bits))
    report.items.append(IdentityResult(2, 'Count(X_i & X_j, i<j) = C(Count(X), 2)', bool(ok.all()), m, exhaustive,
                                       _first_failure(ok, lambda i: 'X={} lhs={}'.format(_vector(X[i]), lhs[i]))))

    grid = np.repeat(X, n, axis=1)
    grid[:, np.arange(n) * (n + 1)] = False
    lhs = eval_circuit(build_count(n * n), grid)
    ok = binary_equal(int_to_bits(lhs, (n * n).bit_length()), binary_multiply(cx_bits, int_to_bits(n - 1, width)))
    report.items.append(IdentityResult(3, 'Count(X_i * [i != j]) = Count(X) * (n-1)', bool(ok.all()), m, exhaustive,
                                       _first_failure(ok, lambda i: 'X={} lhs={}'.format(_vector(X[i]), lhs[i]))))

    pairs_exhaustive = samples is None and n <= EXHAUSTIVE_PAIRS_N
    if pairs_exhaustive:
        digits = (np.arange(3 ** n, dtype=np.int64)[:, None] // (3 ** np.arange(n))) % 3
        lo, hi = digits == 2, digits >= 1
    else:
        hi = rng.integers(0, 2, size=(samples or 10 ** 4, n)).astype(bool)
        lo = hi & rng.integers(0, 2, size=hi.shape).astype(bool)
    clo, chi = eval_circuit(count_n, lo), eval_circuit(count_n, hi)
    ok = binary_less_equal(int_to_bits(clo, width), int_to_bits(chi, width))
    report.items.append(IdentityResult(4, 'X <= Y pointwise => Count(X) <= Count(Y)', bool(ok.all()), len(lo),
                                       pairs_exhaustive,
                                       _first_failure(ok, lambda i: 'X={} Y={}'.format(_vector(lo[i]), _vector(hi[i])))))

    for r in report.items:
        if not r.passed:
            logger.error('Counting identity %d fails for n=%d: %s', r.item, n, r.counterexample)
    return report
