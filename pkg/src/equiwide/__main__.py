import sys

from equiwide.cli import main

sys.exit(main())
