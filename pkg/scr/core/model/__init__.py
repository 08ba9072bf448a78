from scr.core.model.cloud import DyadicCube, GeneratorKind, GeneratorSpec, PointCloud
from scr.core.model.curves import (
    CapacityCurve,
    CountCurve,
    CountKind,
    CoverCost,
    FourierCurve,
    IntermediateCurve,
    IntermediateEstimate,
    ShellEnergyCurve,
    SlopeFit,
    SpectrumCurve,
    TwoScaleSample,
)
from scr.core.model.measure import DiscreteMeasure, EquilibriumSolution, KernelFamily, KernelSpec
from scr.core.model.projection import EstimatorKind, EstimatorSpec, Subspace, SweepResult
from scr.core.model.reports import (
    BoundReport,
    DimensionEstimates,
    ExampleId,
    ReferenceCurve,
    SpectrumKind,
    Tolerances,
)

__all__ = [
    "BoundReport",
    "CapacityCurve",
    "CountCurve",
    "CountKind",
    "CoverCost",
    "DimensionEstimates",
    "DiscreteMeasure",
    "DyadicCube",
    "EquilibriumSolution",
    "EstimatorKind",
    "EstimatorSpec",
    "ExampleId",
    "FourierCurve",
    "GeneratorKind",
    "GeneratorSpec",
    "IntermediateCurve",
    "IntermediateEstimate",
    "KernelFamily",
    "KernelSpec",
    "PointCloud",
    "ReferenceCurve",
    "ShellEnergyCurve",
    "SlopeFit",
    "SpectrumCurve",
    "SpectrumKind",
    "Subspace",
    "SweepResult",
    "Tolerances",
    "TwoScaleSample",
]
