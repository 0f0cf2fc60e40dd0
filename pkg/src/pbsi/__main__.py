import sys

from pbsi.cli import main

sys.exit(main())
