import logging
import math
import os
import platform
import re
import shlex
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.stats import linregress

import pykneser.exceptions as exc
from pykneser.formula import BRUTE_FORCE_MAX_VARS, VARIANTS, Cnf, cnf_brute_force, gen_cnf, write_dimacs
from pykneser.kneser import chromatic_number, default_colors, validate_inputs as validate_ground
from pykneser.resolution import check_refutation, parse_proof
from pykneser.substitution import InstanceDescriptor

logger = logging.getLogger(__name__)

SOLVER_ENV = 'PYKNESER_SOLVER'
DEFAULT_SOLVER = 'cadical'

SAT, UNSAT, TIMEOUT, ERROR = 'SAT', 'UNSAT', 'TIMEOUT', 'ERROR'

CSV_COLUMNS = ['variant', 'k', 'n', 'colors', 'vars', 'clauses', 'result', 'seconds', 'conflicts', 'proof_checked']

ADAPTER_KEYS = ('name', 'solver', 'command', 'proof_command', 'sat_pattern', 'unsat_pattern', 'conflicts_pattern')

# competition exit status
EXIT_SAT, EXIT_UNSAT = 10, 20


@dataclass(frozen=True)
class SolverAdapter:
    """
    How to call one external solver and read its answer.
    Templates may use {solver}, {cnf} and {proof}; patterns are multiline regular expressions
    searched in stdout + stderr. conflicts_pattern needs one group with the number.
    """
    name: str = 'competition'
    solver: str = DEFAULT_SOLVER
    command: str = '{solver} {cnf}'
    proof_command: str = '{solver} {cnf} {proof} --no-binary'
    sat_pattern: str = r'^s SATISFIABLE'
    unsat_pattern: str = r'^s UNSATISFIABLE'
    conflicts_pattern: str = r'conflicts:?\s+(\d+)'

    def argv(self, cnf_path: str, proof_path: str = None) -> List[str]:
        template = self.proof_command if proof_path else self.command
        return shlex.split(template.format(solver=shlex.quote(self.solver), cnf=shlex.quote(str(cnf_path)),
                                           proof=shlex.quote(str(proof_path or ''))))


def read_adapter_config(path) -> SolverAdapter:
    '''
    key=value lines, '#' comments and blank lines ignored. The solver defaults to $PYKNESER_SOLVER.
    '''
    values = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if '=' not in line:
                raise exc.FunctionInputFail('{} line {}: expected key=value'.format(path, lineno))
            key, value = (part.strip() for part in line.split('=', 1))
            if key not in ADAPTER_KEYS:
                raise exc.FunctionInputFail('{} line {}: unknown adapter key {}'.format(path, lineno, key))
            values[key] = value
    values.setdefault('solver', os.environ.get(SOLVER_ENV, DEFAULT_SOLVER))
    for key in ('sat_pattern', 'unsat_pattern', 'conflicts_pattern'):
        if key in values:
            try:
                re.compile(values[key])
            except re.error as e:
                raise exc.FunctionInputFail('{}: {} is not a valid pattern ({})'.format(path, key, e))
    return SolverAdapter(**values)


def default_adapter() -> SolverAdapter:
    return SolverAdapter(solver=os.environ.get(SOLVER_ENV, DEFAULT_SOLVER))


@dataclass
class SolverRun:
    instance: InstanceDescriptor
    command: str
    num_vars: int
    num_clauses: int
    result: str
    seconds: float
    conflicts: Optional[int] = None
    proof_path: Optional[str] = None
    proof_checked: bool = False
    error: Optional[str] = None


def instance_name(cnf: Cnf) -> str:
    return '{}_k{}_n{}_c{}.cnf'.format(cnf.variant, cnf.k, cnf.n, cnf.colors)


def _read_result(adapter: SolverAdapter, output: str, returncode: int) -> str:
    if re.search(adapter.unsat_pattern, output, re.MULTILINE):
        return UNSAT
    if re.search(adapter.sat_pattern, output, re.MULTILINE):
        return SAT
    if returncode == EXIT_UNSAT:
        return UNSAT
    if returncode == EXIT_SAT:
        return SAT
    raise exc.SolverOutputFail('{} gave no result line and exit status {}'.format(adapter.name, returncode))


def run_solver(cnf: Cnf, adapter: SolverAdapter = None, timeout: float = 60, want_proof: bool = False,
               workdir=None) -> SolverRun:
    '''
    Write the instance, run the external solver on it and read the answer.

    A proof requested with want_proof (text or binary DRAT) is imported as a RUP proof and checked in tolerant mode;
    a failed check is recorded on the run, never raised.
    :param cnf: the instance
    :param adapter: solver adapter, default_adapter() when omitted
    :param timeout: wall-clock limit in seconds
    :param workdir: directory for the instance and proof files. When omitted a temporary directory is used
                    and removed before returning, the run then has no proof_path.
    '''
    adapter = adapter or default_adapter()
    if timeout <= 0:
        raise exc.FunctionInputFail('timeout must be positive (got {})'.format(timeout))
    if workdir is None:
        with tempfile.TemporaryDirectory(prefix='pykneser-') as tmp:
            run = run_solver(cnf, adapter, timeout, want_proof, tmp)
        run.proof_path = None
        return run
    cnf_path = os.path.join(str(workdir), instance_name(cnf))
    write_dimacs(cnf, cnf_path)
    proof_path = cnf_path[:-len('.cnf')] + '.drat' if want_proof else None
    argv = adapter.argv(cnf_path, proof_path)
    run = SolverRun(InstanceDescriptor(cnf.variant, cnf.k, cnf.n, cnf.colors), ' '.join(argv),
                    cnf.num_vars, cnf.num_clauses, TIMEOUT, float(timeout), proof_path=proof_path)

    logger.debug('Running %s', run.command)
    start = time.perf_counter()
    try:
        completed = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        logger.info('%s timed out after %ss', instance_name(cnf), timeout)
        return run
    except (FileNotFoundError, PermissionError) as e:
        raise exc.SolverNotFound('Cannot start {} ({}); set {} or an adapter file'.format(argv[0], e, SOLVER_ENV))
    run.seconds = time.perf_counter() - start

    output = completed.stdout + completed.stderr
    run.result = _read_result(adapter, output, completed.returncode)
    found = re.search(adapter.conflicts_pattern, output, re.MULTILINE)
    if found:
        run.conflicts = int(found.group(1))

    if want_proof and run.result == UNSAT:
        try:
            verdict = check_refutation(cnf, parse_proof(proof_path, 'rup', cnf), 'tolerant')
            run.proof_checked = verdict.passed
            if not verdict.passed:
                run.error = str(verdict)
        except (exc.ProofParseFail, OSError) as e:
            run.error = 'proof import failed: {}'.format(e)
        if not run.proof_checked:
            logger.error('Proof for %s does not check: %s', instance_name(cnf), run.error)
    logger.info('%s: %s in %.3fs', instance_name(cnf), run.result, run.seconds)
    return run


@dataclass
class CampaignSpec:
    """
    A grid of instances for one variant and k over a range of n.
    colors is 'unsat' (n-2k+1), 'sat' (n-2k+2) or a fixed number.
    """
    variant: str = 'kneser'
    k: int = 2
    ns: Sequence[int] = range(5, 12)
    colors: Union[str, int] = 'unsat'
    adapter: SolverAdapter = field(default_factory=default_adapter)
    timeout: float = 60
    seed: Optional[int] = None
    want_proof: bool = False
    workers: int = 1

    def colors_for(self, n: int) -> int:
        if self.colors == 'unsat':
            return default_colors(n, self.k)
        if self.colors == 'sat':
            return chromatic_number(n, self.k)
        return self.colors


@dataclass
class Campaign:
    spec: CampaignSpec
    rows: List[SolverRun] = field(default_factory=list)
    hardware: str = ''


def validate_inputs(**kwargs) -> None:
    spec = kwargs.get('spec')
    if spec is None:
        return
    if spec.variant not in VARIANTS:
        raise exc.FunctionInputFail('Unknown variant {}, expected one of {}'.format(spec.variant, ', '.join(VARIANTS)))
    if not (spec.colors in ('unsat', 'sat') or (isinstance(spec.colors, int) and spec.colors >= 1)):
        raise exc.FunctionInputFail('colors must be unsat, sat or a positive integer (got {})'.format(spec.colors))
    if not list(spec.ns):
        raise exc.FunctionInputFail('Campaign grid has no values of n')
    for n in spec.ns:
        validate_ground(n=n, k=spec.k)
    if spec.workers < 1:
        raise exc.FunctionInputFail('workers must be at least 1 (got {})'.format(spec.workers))


def hardware_note() -> str:
    return 'platform={} processor={} cpus={} python={}'.format(
        platform.platform(), platform.processor() or 'unknown', os.cpu_count(), platform.python_version())


def _campaign_row(spec: CampaignSpec, n: int, outdir: str) -> SolverRun:
    colors = spec.colors_for(n)
    cnf = gen_cnf(spec.variant, n, spec.k, colors, shuffle_seed=spec.seed)
    try:
        run = run_solver(cnf, spec.adapter, spec.timeout, spec.want_proof, outdir)
    except (exc.SolverNotFound, exc.SolverOutputFail) as e:
        logger.error('%s: %s', instance_name(cnf), e)
        return SolverRun(InstanceDescriptor(cnf.variant, cnf.k, cnf.n, cnf.colors), '', cnf.num_vars,
                         cnf.num_clauses, ERROR, 0.0, error=str(e))
    if run.result in (SAT, UNSAT) and cnf.num_vars <= BRUTE_FORCE_MAX_VARS:
        satisfiable, _ = cnf_brute_force(cnf)
        if satisfiable != (run.result == SAT):
            run.error = 'truth table says {}'.format(SAT if satisfiable else UNSAT)
            logger.error('%s: solver answered %s, %s', instance_name(cnf), run.result, run.error)
    return run


def campaign(spec: CampaignSpec, outdir) -> Campaign:
    '''
    Generate every instance of the grid into outdir and solve them with a bounded worker pool.
    Errors are kept as rows, the campaign carries on.
    '''
    validate_inputs(spec=spec)
    os.makedirs(outdir, exist_ok=True)
    result = Campaign(spec, hardware=hardware_note())
    with ThreadPoolExecutor(max_workers=spec.workers) as pool:
        result.rows = list(pool.map(lambda n: _campaign_row(spec, n, str(outdir)), list(spec.ns)))
    logger.info('Campaign %s k=%d: %d rows, %d unsat, %d timeouts', spec.variant, spec.k, len(result.rows),
                sum(r.result == UNSAT for r in result.rows), sum(r.result == TIMEOUT for r in result.rows))
    return result


def campaign_frame(result: Campaign) -> pd.DataFrame:
    rows = [(r.instance.variant, r.instance.k, r.instance.n, r.instance.colors, r.num_vars, r.num_clauses, r.result,
             round(r.seconds, 6), '' if r.conflicts is None else r.conflicts, r.proof_checked)
            for r in result.rows]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def write_campaign_csv(result: Campaign, path) -> None:
    campaign_frame(result).to_csv(path, index=False)


class GrowthRate(NamedTuple):
    slope: float
    intercept: float
    rvalue: float
    points: int

    @property
    def factor_per_n(self) -> float:
        return math.exp(self.slope)


def growth_rate(frame: pd.DataFrame) -> Optional[GrowthRate]:
    '''
    Least-squares slope of log(seconds) against n over the completed rows; reported, not asserted
    '''
    done = frame[frame['result'].isin([SAT, UNSAT]) & (frame['seconds'] > 0)]
    if done['n'].nunique() < 2:
        return None
    fit = linregress(done['n'].astype(float), np.log(done['seconds'].astype(float)))
    return GrowthRate(float(fit.slope), float(fit.intercept), float(fit.rvalue), len(done))
