"""
Tests - Suites for the pillowcase pipeline and the numeric oracle

Suites live in tests/suites and register through the decorators re-exported here.
"""

from .framework import Assertions, TestCategory, get_test_runner, load_suites, suite, test

__all__ = ["Assertions", "TestCategory", "get_test_runner", "load_suites", "suite", "test"]
