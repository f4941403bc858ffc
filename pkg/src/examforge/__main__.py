import sys

from examforge.cli import main

sys.exit(main())
