import sys

from halfdr.cli import main

sys.exit(main())
