"""Main entry point for prv-composer."""

import sys


def main() -> int:
    """Run the prv-composer command line."""
    from prv_composer.cli import run

    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
