# main.py
import sys

# Import the logging setup module early to configure logging before other imports
import shapemetrics.core.logging

from shapemetrics.cli import dispatch

if __name__ == "__main__":
    sys.exit(dispatch())
