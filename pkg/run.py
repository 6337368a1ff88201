#!/usr/bin/env python3
"""
swarmcheck - Launcher script
"""

import sys
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def check_requirements():
    """Check that the package sits next to this launcher"""
    package_path = Path(__file__).resolve().parent / "swarmcheck"
    if not package_path.exists():
        print("❌ swarmcheck package not found next to run.py.")
        return False
    return True


def main():
    """Main launcher function"""
    if not check_requirements():
        print("\nTo set up the project:")
        print("1. python3 -m venv venv")
        print("2. ./venv/bin/pip install -r requirements.txt")
        sys.exit(64)

    from swarmcheck.cli import main as cli_main

    try:
        sys.exit(cli_main(sys.argv[1:]))
    except KeyboardInterrupt:
        print("\n🛑 Interrupted.")
        sys.exit(130)


if __name__ == "__main__":
    main()
