import sys

from src.harness.cli import main

if __name__ == '__main__':
    sys.exit(main())
