"""Experiment configuration, orchestration, persistence and the acceptance runner."""
from .acceptance import CriterionResult, acceptance
from .config import EXPERIMENTS, SCHEMA, ExperimentConfig
from .results import ResultTable, StaleGolden, read_table
from .run import run
