"""Command-line surface: configuration layers, command handlers and the parser."""

from .commands import COMMAND_HANDLERS, ArtifactWriter, Inputs, prepare_inputs, run
from .parser import build_parser, main
from .run_config import (
    DEFAULTS,
    MeasureSpec,
    RunConfig,
    build_run_config,
    load_run_config,
    merge_layers,
    parse_forcing,
    parse_measure,
    read_config_file,
)

__all__ = [
    # Configuration
    "DEFAULTS",
    "MeasureSpec",
    "RunConfig",
    "build_run_config",
    "load_run_config",
    "merge_layers",
    "parse_forcing",
    "parse_measure",
    "read_config_file",
    # Commands
    "COMMAND_HANDLERS",
    "ArtifactWriter",
    "Inputs",
    "prepare_inputs",
    "run",
    # Entry point
    "build_parser",
    "main",
]
