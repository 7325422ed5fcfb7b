"""Services package for the expert advice lab."""

from .experiment_pipeline import ExperimentPipeline, ExperimentResult, RunSummary
from .protocols import RoundRecord, run_feedback_graph_round, run_restricted_round, run_standard_round
from .seed_processor import SeedOutcome, SeedProcessor

__all__ = [
    "ExperimentPipeline",
    "ExperimentResult",
    "RunSummary",
    "RoundRecord",
    "run_feedback_graph_round",
    "run_restricted_round",
    "run_standard_round",
    "SeedOutcome",
    "SeedProcessor",
]
