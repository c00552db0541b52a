import sys

from dirac_lab.cli import main

sys.exit(main())
