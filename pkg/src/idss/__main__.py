import sys

from idss.cli import main

sys.exit(main())
