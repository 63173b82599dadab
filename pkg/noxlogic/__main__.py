import sys

from noxlogic.cli import main

sys.exit(main())
