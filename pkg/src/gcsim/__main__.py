import sys

from gcsim.cli import main

sys.exit(main())
