"""Experiment configuration, initial data, sweeps and report emission."""
from .config import ExperimentConfig, config_schema, load_config
from .report import emit_report
from .sweeps import SweepReport, SweepRow, mach_sweep_illprepared, mach_sweep_wellprepared

__all__ = ["ExperimentConfig", "SweepReport", "SweepRow", "config_schema", "emit_report",
           "load_config", "mach_sweep_illprepared", "mach_sweep_wellprepared"]
