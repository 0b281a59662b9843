import sys

from altbinom.cli import main

sys.exit(main())
