import sys

from ccp.cli import main

sys.exit(main())
