"""Exception types shared across the package."""


class TreeWeightsError(Exception):
    """Base class for all errors raised by this package."""


class LabelError(TreeWeightsError):
    """A leaf label was not found in the tree or weight container."""


class InstanceTooSmallError(TreeWeightsError):
    """An operation was asked for fewer labels than its guarantee needs."""

    def __init__(self, message, required, got):
        super().__init__(message)
        self.required = required
        self.got = got


class ParseError(TreeWeightsError):
    """Malformed input text; ``line`` is 1-based when it applies."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ReconstructionError(TreeWeightsError):
    """A decision / reconstruction procedure rejected its input.

    ``kind`` is a stable machine-readable string, one of:

      ``condition2``              the derived pairwise values are inconsistent
      ``pseudobell-graph``        the star-condition graph is not a disjoint
                                  union of cliques (witness: an open triple)
      ``no-disjoint-pseudobells`` fewer than two disjoint neighbour pairs
      ``prune-inconsistent``      pruned entries disagree across representatives
      ``base-case``               the final small linear system is inconsistent
      ``verification``            the assembled tree does not reproduce the input
      ``positivity``              a reconstructed edge weight is not positive

    ``level`` is the 0-based pruning level at which the failure occurred
    (``None`` when it is not level-specific), ``witness`` an op-specific
    tuple identifying the offending labels/entries.
    """

    def __init__(self, kind, message, level=None, witness=None, trace=None):
        super().__init__(message)
        self.kind = kind
        self.level = level
        self.witness = witness
        self.trace = trace
