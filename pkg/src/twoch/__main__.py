import sys

from twoch.cli import main

sys.exit(main())
