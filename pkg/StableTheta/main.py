#!/usr/bin/env python3
"""
StableTheta - Main Entry Point
Theta series, Siegel operators and the Grenier operator from the command line
"""

import os
import sys
from typing import List, Optional

import click

# Add the parent directory to the path so we can import StableTheta modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from StableTheta.cli.commands import EXIT_FAILURE, EXIT_OK, cli


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for StableTheta; usage errors count as computational failures"""
    try:
        status = cli.main(args=argv, prog_name="stabletheta", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_FAILURE
    except click.ClickException as e:
        e.show()
        return EXIT_FAILURE
    return status if isinstance(status, int) else EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
