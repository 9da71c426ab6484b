import sys

from bitext_forge.cli import main

sys.exit(main())
