import shlex
import sys
import textwrap

import pytest
from pysat.solvers import Solver

from pykneser.harness import SolverAdapter

# Third argument picks the proof encoding: text (default), binary DRAT, or bytes that are neither
FAKE_SOLVER = textwrap.dedent('''\
    import sys
    from pysat.formula import CNF
    from pysat.solvers import Solver

    def binary(lines):
        out = bytearray()
        for line in lines:
            tokens = line.split()
            if not tokens:
                continue
            if tokens[0] == 'd':
                out += b'd'
                tokens = tokens[1:]
            else:
                out += b'a'
            for lit in map(int, tokens[:-1]):
                u = 2 * abs(lit) + (lit < 0)
                while u > 127:
                    out.append(u & 0x7f | 0x80)
                    u >>= 7
                out.append(u)
            out.append(0)
        return bytes(out)

    formula = CNF(from_file=sys.argv[1])
    proof = len(sys.argv) > 2
    mode = sys.argv[3] if len(sys.argv) > 3 else 'text'
    with Solver(name='glucose3', bootstrap_with=formula.clauses, with_proof=proof) as s:
        sat = s.solve()
        print('c conflicts: {}'.format(s.accum_stats()['conflicts']))
        if sat:
            print('s SATISFIABLE')
        else:
            print('s UNSATISFIABLE')
            if proof:
                lines = s.get_proof()
                with open(sys.argv[2], 'wb') as f:
                    if mode == 'binary':
                        f.write(binary(lines))
                    elif mode == 'garbage':
                        f.write(b'a\\x82\\x01\\xa3\\x00d\\xff\\x00')
                    else:
                        f.write(('\\n'.join(lines) + '\\n').encode())
    sys.exit(10 if sat else 20)
''')

SLEEPY_SOLVER = textwrap.dedent('''\
    import time
    time.sleep(30)
''')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-scale sweeps, deselect with -m "not slow"')


def solve_with_proof(cnf):
    '''
    In-process CDCL run with DRUP logging
    :return: (satisfiable, proof lines or None)
    '''
    with Solver(name='glucose3', bootstrap_with=cnf.clauses, with_proof=True) as s:
        sat = s.solve()
        return sat, (None if sat else s.get_proof())


def binary_drat(lines) -> bytes:
    out = bytearray()
    for line in lines:
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == 'd':
            out += b'd'
            tokens = tokens[1:]
        else:
            out += b'a'
        for lit in map(int, tokens[:-1]):
            u = 2 * abs(lit) + (lit < 0)
            while u > 127:
                out.append(u & 0x7f | 0x80)
                u >>= 7
            out.append(u)
        out.append(0)
    return bytes(out)


def _adapter(path, name, proof_mode=''):
    python = shlex.quote(sys.executable)
    return SolverAdapter(name=name, solver=str(path), command=python + ' {solver} {cnf}',
                         proof_command=python + ' {solver} {cnf} {proof} ' + proof_mode)


def _fake(tmp_path, proof_mode=''):
    script = tmp_path / 'fake_solver.py'
    script.write_text(FAKE_SOLVER)
    return _adapter(script, 'fake' + proof_mode, proof_mode)


@pytest.fixture
def fake_solver(tmp_path):
    return _fake(tmp_path)


@pytest.fixture
def binary_solver(tmp_path):
    return _fake(tmp_path, 'binary')


@pytest.fixture
def garbage_proof_solver(tmp_path):
    return _fake(tmp_path, 'garbage')


@pytest.fixture
def sleepy_solver(tmp_path):
    script = tmp_path / 'sleepy_solver.py'
    script.write_text(SLEEPY_SOLVER)
    return _adapter(script, 'sleepy')


@pytest.fixture
def drup():
    return solve_with_proof


@pytest.fixture
def to_binary_drat():
    return binary_drat
