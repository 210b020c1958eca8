class FunctionInputFail(Exception):
    """
    Raise when input parameters are configured in a way which makes the construction impossible or meaningless
    (I.e. n < 2k, rank outside [0, C(n,k)), unknown variant etc)
    """
    pass


class DimacsParseFail(Exception):
    """
    Raise when a DIMACS CNF text cannot be read. The 1-based line number is kept on the exception.
    """
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__('line {}: {}'.format(line, message))


class ProofParseFail(Exception):
    """
    Raise when a proof file is malformed, or when an imported lemma is not derivable by unit propagation
    """
    def __init__(self, message: str, line: int = None, clause: tuple = None):
        self.line = line
        self.clause = clause
        if line is not None:
            message = 'line {}: {}'.format(line, message)
        super().__init__(message)


class ContractViolation(Exception):
    """
    Raise when a substitution is applied to variables or formulas outside its declared source
    """
    pass


class InternalInconsistency(Exception):
    """
    Raise when a search that is guaranteed to succeed comes back empty. Signals a bug, not a user error.
    """
    pass


class SolverNotFound(Exception):
    """
    Raise when the external SAT solver executable cannot be started
    """
    pass


class SolverOutputFail(Exception):
    """
    Raise when the solver output carries no recognisable result line or exit status
    """
    pass
