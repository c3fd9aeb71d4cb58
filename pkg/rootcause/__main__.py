import sys

from rootcause.main import main

sys.exit(main())
