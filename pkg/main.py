"""
Main entry point for the OT capacity bound toolkit
"""
from cli.main import run
from core.logging import app_logger


def main() -> int:
    """Run one CLI command and return its exit code"""
    app_logger.debug("Starting ot-tension")
    return run()


if __name__ == "__main__":
    raise SystemExit(main())
