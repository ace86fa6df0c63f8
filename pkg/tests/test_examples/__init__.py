# This file makes test_examples directory a Python package
