"""gfftkit - generalized Fourier-Feynman transforms over generalized Brownian motion."""

__version__ = "0.1.0"


def main() -> None:
    """Main entry point for gfftkit."""
    from .cli import main as cli_main

    cli_main()
