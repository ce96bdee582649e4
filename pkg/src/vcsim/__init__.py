"""Virtual cluster embedding (Oktopus, Tetris) and pricing (DRP, DSP) on
oversubscribed fat-trees, with a discrete-event simulator to compare them."""

from .request import TemplateSet, UnpriceableError, VCRequest
from .topology import FatTree, FatTreeSpec, Placement, build
from .pricing import LambdaParams, UnitPrices, quote
from .workload import WorkloadConfig, generate
from .simulator import MetricsReport, Scenario, compare, run

__all__ = [
    "VCRequest", "TemplateSet", "UnpriceableError",
    "FatTree", "FatTreeSpec", "Placement", "build",
    "UnitPrices", "LambdaParams", "quote",
    "WorkloadConfig", "generate",
    "Scenario", "MetricsReport", "run", "compare",
]
