import sys

from qkbench.bench.cli import main

sys.exit(main())
