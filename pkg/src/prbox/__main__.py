import sys

from prbox.cli import main

sys.exit(main())
