"""End-to-end verification harness: config, checks, reports, plots, CLI."""

from .config import HarnessConfig, default_config, load_config, write_config
from .report import canonical_json, load_report, recheck, render_text, write_report
from .spinstat import branch_verdict, overall_verdict, resolve_stages, run_spinstat

__all__ = [
    "HarnessConfig",
    "default_config",
    "load_config",
    "write_config",
    "canonical_json",
    "load_report",
    "recheck",
    "render_text",
    "write_report",
    "branch_verdict",
    "overall_verdict",
    "resolve_stages",
    "run_spinstat",
]
