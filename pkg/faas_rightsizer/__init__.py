"""faas_rightsizer - A trace-driven simulator for learned serverless resource allocation."""

__version__ = "0.1.0"

# Core exports that don't import CLI
from .allocator import Allocator, StaticAllocator
from .catalog import Catalog, load_catalog
from .config import load_config, save_config
from .config_models import RunConfig
from .learner import CostVector, CsoaaModel
from .simcore import Simulator, run

__all__ = [
    "Allocator", "StaticAllocator", "Catalog", "load_catalog", "load_config", "save_config",
    "RunConfig", "CostVector", "CsoaaModel", "Simulator", "run",
]


# CLI main function available on demand
def main():
    """Entry point for CLI application."""
    from .cli import main as cli_main
    return cli_main()
