"""Exception hierarchy.

Every error carries the module and operation that raised it plus the
offending datum, so the CLI can print a structured diagnostic.
"""


class PowerInterpError(Exception):
    module = "powerinterp"
    operation = ""

    def __init__(self, message, **datum):
        super().__init__(message)
        self.datum = datum

    def diagnostic(self):
        return {
            "error": type(self).__name__,
            "module": self.module,
            "operation": self.operation,
            "message": str(self),
            "datum": {k: _plain(v) for k, v in self.datum.items()},
        }


def _plain(v):
    if isinstance(v, (int, float, str, bool)) or v is None:
        return v
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return repr(v)


# -- sequences ---------------------------------------------------------------

class ParamsError(PowerInterpError):
    module = "sequences"
    operation = "validate"


class NonIncreasingDegrees(ParamsError):
    pass


class GrowthViolation(ParamsError):
    def __init__(self, j, gap, required):
        super().__init__(
            f"growth condition fails at j={j}: log r_{j + 1} - log r_{j} = {gap!r} "
            f"< pi/M_{j} = {required!r}",
            j=j, gap=gap, required=required)
        self.j = j


class ZeroBaseConstant(ParamsError):
    pass


class DiskRadiusViolation(ParamsError):
    def __init__(self, j, log_r, log_r_inf):
        super().__init__(
            f"disk mode: radius index {j} reaches log r = {log_r!r} >= log r_inf = {log_r_inf!r}",
            j=j, log_r=log_r, log_r_inf=log_r_inf)
        self.j = j


class ParameterOverflow(ParamsError):
    operation = "generate_standard_family"


# -- folding -----------------------------------------------------------------

class FoldingError(PowerInterpError):
    module = "folding"


class DegenerateCell(FoldingError):
    operation = "build_cell"


class DegenerateDegrees(FoldingError):
    operation = "build_fold_region"


class OutsideStrip(FoldingError):
    operation = "psi"


class OnSlitWithoutSide(FoldingError):
    operation = "psi"


class OutsideAnnulus(FoldingError):
    operation = "g_annulus"


class InsideDisk(FoldingError):
    operation = "sigma"


class ContinuityFailure(FoldingError):
    operation = "g_annulus"


# -- globalmap ---------------------------------------------------------------

class GlobalMapError(PowerInterpError):
    module = "globalmap"


class OutsideDomain(GlobalMapError):
    operation = "h"


class ModeMismatch(GlobalMapError):
    operation = "disk_mode_domain"


# -- analysis ----------------------------------------------------------------

class AnalysisError(PowerInterpError):
    module = "analysis"


class TooCloseToBoundary(AnalysisError):
    operation = "beltrami_estimate"


class DegenerateDerivative(AnalysisError):
    operation = "beltrami_estimate"


class ZeroOnContour(AnalysisError):
    operation = "winding_number"


class NonIntegralWinding(AnalysisError):
    operation = "winding_number"


# -- dynamics ----------------------------------------------------------------

class DynamicsError(PowerInterpError):
    module = "dynamics"


class EmptyAnnulus(DynamicsError):
    operation = "annulus_A"


class HypothesisViolated(DynamicsError):
    operation = "verify_wandering"


class InclusionFailure(DynamicsError):
    operation = "verify_wandering"


class PreconditionError(DynamicsError):
    operation = "truncated_orbit_compare"


# -- cli ---------------------------------------------------------------------

class ConfigError(PowerInterpError):
    module = "config"
    operation = "parse"

    def __init__(self, message, line=None, key=None):
        loc = f"line {line}" if line is not None else "config"
        if key is not None:
            loc += f", key '{key}'"
        super().__init__(f"{loc}: {message}", line=line, key=key)
        self.line = line
        self.key = key
