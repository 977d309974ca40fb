#! /usr/bin/env python

import sys
from pyloewner.cli import get_parser, main  # noqa

if __name__ == "__main__":
    sys.exit(main())
