#!/usr/bin/env python3
"""
StableTheta Launcher
Runs the command line from a source checkout without installation
"""

import os
import sys
import traceback


def main():
    """Main entry point for StableTheta from a checkout"""
    sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

    try:
        from StableTheta.main import main as run
    except ImportError as e:
        print(f"Import Error: {e}", file=sys.stderr)
        traceback.print_exc()
        print("\nPlease ensure all dependencies are installed:", file=sys.stderr)
        print("pip install -r requirements.txt", file=sys.stderr)
        sys.exit(1)

    try:
        sys.exit(run(sys.argv[1:]))
    except Exception as e:
        print(f"Error running StableTheta: {e}", file=sys.stderr)
        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
