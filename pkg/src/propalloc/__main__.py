import sys

from propalloc.cli import main

sys.exit(main())
