# /prefix_filter/__main__.py
import sys

from prefix_filter.bench.cli import main

sys.exit(main())
