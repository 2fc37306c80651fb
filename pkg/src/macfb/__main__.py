import sys

from macfb.cli import main

sys.exit(main())
