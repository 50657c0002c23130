import sys

from sms_sim.cli import main

sys.exit(main())
