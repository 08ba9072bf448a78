import sys

from scr.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
