import sys

from nerstd.cli import main

sys.exit(main())
