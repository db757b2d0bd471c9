import sys

from fase.cli import main

sys.exit(main())
