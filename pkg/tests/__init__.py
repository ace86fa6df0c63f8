# This file makes tests directory a Python package for proper imports
