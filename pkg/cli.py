import sys
from robsparse.command_line import main

if __name__ == '__main__':
    # Same as the `robsparse` executable, without installing the package
    sys.exit(main())
