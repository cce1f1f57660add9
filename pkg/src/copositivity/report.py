"""The Report produced by the check pipeline and its exit-code mapping."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .certification import Verdict, VerdictKind
from .errors import ContractViolation, InputError, NotCopositiveError

EXIT_COPOSITIVE = 0
EXIT_NOT_COPOSITIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT_ERROR = 64
EXIT_INTERNAL_ERROR = 70

SCHEMA_VERSION = 1

CLASSIFICATIONS = ("trivial+", "trivial-", "nonseparable", "separable")
METHODS = ("single-path", "fallback")


def exit_code_for(kind: Optional[VerdictKind]) -> int:
    """Exit code of a verdict: 0 copositive, 1 not copositive, 2 otherwise."""
    if kind is None:
        return EXIT_INCONCLUSIVE
    copositive = kind.copositive
    if copositive is True:
        return EXIT_COPOSITIVE
    if copositive is False:
        return EXIT_NOT_COPOSITIVE
    return EXIT_INCONCLUSIVE


@dataclass
class Report:
    """Everything one run of the decision pipeline found out about its input.

    ``verdict.certified`` is only ever True when it came from interval
    certification or from the sign precheck.
    """

    input: str
    n: int = 0
    terms: int = 0
    classification: Optional[str] = None
    gamma_size: Optional[int] = None
    gamma_dim: Optional[int] = None
    j_size: Optional[int] = None
    method: Optional[str] = None
    t_star: Optional[float] = None
    verdict: Optional[Verdict] = None
    timing: Dict[str, float] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    track: Optional[Dict[str, Any]] = None
    hyperplane: Optional[Dict[str, Any]] = None
    certificate: Optional[Dict[str, Any]] = None
    verification: Optional[Dict[str, Any]] = None
    error: Optional[str] = None
    error_code: Optional[int] = None
    line: Optional[int] = None

    @property
    def exit_code(self) -> int:
        if self.error_code is not None:
            return self.error_code
        return exit_code_for(self.verdict.kind if self.verdict else None)

    def to_dict(self, with_timing: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "schema": SCHEMA_VERSION,
            "input": self.input,
            "n": self.n,
            "terms": self.terms,
            "classification": self.classification,
            "gamma": {"size": self.gamma_size, "dim": self.gamma_dim},
            "j_size": self.j_size,
            "method": self.method,
            "t_star": self.t_star,
            "t_interval": None,
            "verdict": None,
            "certified": False,
            "warnings": list(self.warnings),
            "exit_code": self.exit_code,
        }
        if self.verdict is not None:
            data["verdict"] = self.verdict.kind.value
            data["certified"] = self.verdict.certified
            if self.verdict.t_interval is not None:
                data["t_interval"] = [self.verdict.t_interval.lo, self.verdict.t_interval.hi]
            data["details"] = self.verdict.details
        if self.line is not None:
            data["line"] = self.line
        for key in ("track", "hyperplane", "certificate", "verification", "error"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        if with_timing:
            data["timing"] = dict(self.timing)
        return data


def exit_code_for_error(error: Exception) -> int:
    """Exit code of an error raised by the pipeline."""
    if isinstance(error, InputError):
        return EXIT_INPUT_ERROR
    if isinstance(error, NotCopositiveError):
        return EXIT_NOT_COPOSITIVE
    if isinstance(error, ContractViolation):
        return EXIT_INCONCLUSIVE
    return EXIT_INTERNAL_ERROR


def error_report(source: str, error: Exception, line: Optional[int] = None) -> Report:
    """A Report carrying only an error, as emitted for a failing batch line."""
    message = str(error)
    hint = getattr(error, "hint", None)
    if hint:
        message = f"{message} (hint: {hint})"
    return Report(
        input=source.strip(), error=message, error_code=exit_code_for_error(error), line=line
    )
