"""Exception hierarchy for the level-set flow engine.

Every error raised by the public API derives from LevelFlowError so the CLI
can map failures to stable exit codes (see cli.EXIT_CODES).
"""


class LevelFlowError(Exception):
    """Base class for all engine errors."""


# grid_core
class DimensionUnsupported(LevelFlowError):
    pass


class AnisotropicSpacing(LevelFlowError):
    pass


class ResolutionTooSmall(LevelFlowError):
    pass


class BoundaryIndex(LevelFlowError):
    pass


class OutOfDomain(LevelFlowError):
    pass


# shapes
class SpecGridDimMismatch(LevelFlowError):
    pass


class InvalidSpec(LevelFlowError):
    pass


class UnresolvableGap(LevelFlowError):
    pass


# evolution
class DegenerateGradient(LevelFlowError):
    pass


class CFLViolation(LevelFlowError):
    pass


class NonFiniteValue(LevelFlowError):
    pass


class PreorderViolated(LevelFlowError):
    pass


class FrontDrift(LevelFlowError):
    pass


# arrival
class NoInterior(LevelFlowError):
    pass


class NearCriticalPoint(LevelFlowError):
    pass


class InvalidK(LevelFlowError):
    pass


# analysis
class Unclassifiable(LevelFlowError):
    pass


class EmptyLevelSet(LevelFlowError):
    pass


class DegenerateMoments(LevelFlowError):
    pass


# measures
class EmptyMesh(LevelFlowError):
    pass


class MultipleComponents(LevelFlowError):
    pass


# cli
class ConfigInvalid(LevelFlowError):
    pass


class SuiteUnknown(LevelFlowError):
    pass
