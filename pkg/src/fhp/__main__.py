import sys

from fhp.cli import main

sys.exit(main())
