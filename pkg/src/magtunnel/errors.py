"""Error taxonomy shared across the pipeline.

Exit-code mapping used by the CLI: ConfigError -> 2, AssumptionError -> 3,
SolverError -> 4.
"""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""

    exit_code = 2


class AssumptionError(RuntimeError):
    """A structural hypothesis on the input (symmetry, vanishing order,
    well count/non-degeneracy) is violated."""

    exit_code = 3


class SolverError(RuntimeError):
    """A numerical solver failed to converge or certify its result."""

    exit_code = 4
