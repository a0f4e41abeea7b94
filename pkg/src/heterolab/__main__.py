import sys

from heterolab.cli import main

sys.exit(main())
