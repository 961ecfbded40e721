import sys

from sklf.cli import main

sys.exit(main())
