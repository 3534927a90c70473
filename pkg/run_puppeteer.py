"""
5G Puppeteer - command-line runner

Loads environment variables from .env (PUPPETEER_CONFIG may point at another
config.yaml) and hands the arguments to the CLI.

Usage:
    python run_puppeteer.py simulate --scenario builtin:fig3 --attack A1
    python run_puppeteer.py --help
"""

import sys
from pathlib import Path


def main():
    """
    Main function
    """
    from dotenv import load_dotenv
    load_dotenv()  # Load environment variables from .env file

    project_root = Path(__file__).parent
    if str(project_root) not in sys.path:
        sys.path.insert(0, str(project_root))

    from src.cli import main as cli_main
    return cli_main()


if __name__ == "__main__":
    sys.exit(main())
