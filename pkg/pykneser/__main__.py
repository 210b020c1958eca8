import sys

from pykneser.cli import main

sys.exit(main())
