import sys

from poalab.cli import main

sys.exit(main())
