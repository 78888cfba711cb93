"""
Testing Framework - Suites, Assertions and a Runner

Test functions are plain pytest tests that also register into a suite, so the same
files run under pytest or through the runner (python -m tests.framework) with a
per-suite report.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional
import asyncio
import importlib
import logging
import math
import pkgutil
import time
import traceback

import numpy as np

logger = logging.getLogger(__name__)


class TestStatus(Enum):
    PASSED = "passed"
    FAILED = "failed"
    ERROR = "error"


class TestCategory(Enum):
    """Kinds of suites"""
    UNIT = "unit"
    INTEGRATION = "integration"
    GOLDEN = "golden"      # published example values
    ORACLE = "oracle"      # numeric cross-checks
    CLI = "cli"


@dataclass
class TestResult:
    test_name: str
    status: TestStatus
    duration_ms: float = 0.0
    error: Optional[str] = None
    traceback: Optional[str] = None
    assertions_passed: int = 0

    def to_dict(self) -> Dict:
        return {
            "test_name": self.test_name,
            "status": self.status.value,
            "duration_ms": round(self.duration_ms, 3),
            "error": self.error,
            "assertions_passed": self.assertions_passed,
        }


@dataclass
class TestSuite:
    name: str
    category: TestCategory
    tests: List[Callable] = field(default_factory=list)
    results: List[TestResult] = field(default_factory=list)


class AssertionError(Exception):
    """Assertion failure with the compared values"""
    def __init__(self, message: str, expected: Any = None, actual: Any = None):
        self.message = message
        self.expected = expected
        self.actual = actual
        super().__init__(message)


class Assertions:
    """Assertion helpers; counts passes for the runner report"""

    def __init__(self):
        self.passed = 0

    def _check(self, ok: bool, message: str, expected: Any = None, actual: Any = None):
        if not ok:
            raise AssertionError(message, expected=expected, actual=actual)
        self.passed += 1

    def equal(self, actual: Any, expected: Any, message: str = ""):
        self._check(actual == expected, message or f"Expected {expected}, got {actual}",
                    expected, actual)

    def not_equal(self, actual: Any, other: Any, message: str = ""):
        self._check(actual != other, message or f"Expected something other than {other}")

    def true(self, value: Any, message: str = ""):
        self._check(bool(value), message or f"Expected truthy, got {value}")

    def false(self, value: Any, message: str = ""):
        self._check(not value, message or f"Expected falsy, got {value}")

    def none(self, value: Any, message: str = ""):
        self._check(value is None, message or f"Expected None, got {value}")

    def contains(self, container: Any, item: Any, message: str = ""):
        self._check(item in container, message or f"Expected {container!r} to contain {item!r}")

    def close(self, actual: float, expected: float, tol: float = 1e-12, message: str = ""):
        """|actual - expected| <= tol"""
        ok = math.isfinite(actual) and abs(actual - expected) <= tol
        self._check(ok, message or f"Expected {expected} within {tol}, got {actual}",
                    expected, actual)

    def all_close(self, actual: Any, expected: Any, tol: float = 1e-12, message: str = ""):
        a, e = np.asarray(actual, dtype=float), np.asarray(expected, dtype=float)
        ok = a.shape == e.shape and bool(np.all(np.abs(a - e) <= tol))
        self._check(ok, message or f"Arrays differ beyond {tol}:\n{a}\nvs\n{e}", e, a)

    def raises(self, func: Callable, exception_type: type = Exception,
               message: str = "") -> BaseException:
        """Call func, require exception_type, and return the exception"""
        try:
            func()
        except exception_type as e:
            self.passed += 1
            return e
        except Exception as e:
            raise AssertionError(message or f"Expected {exception_type.__name__}, "
                                            f"got {type(e).__name__}: {e}")
        raise AssertionError(message or f"Expected {exception_type.__name__} to be raised")

    async def async_raises(self, coro, exception_type: type = Exception,
                           message: str = "") -> BaseException:
        try:
            await coro
        except exception_type as e:
            self.passed += 1
            return e
        except Exception as e:
            raise AssertionError(message or f"Expected {exception_type.__name__}, "
                                            f"got {type(e).__name__}: {e}")
        raise AssertionError(message or f"Expected {exception_type.__name__} to be raised")


class TestRunner:
    """Runs registered suites outside pytest and reports per suite"""

    def __init__(self):
        self._suites: Dict[str, TestSuite] = {}

    def suite(self, name: str, category: TestCategory = TestCategory.UNIT) -> TestSuite:
        if name not in self._suites:
            self._suites[name] = TestSuite(name=name, category=category)
        return self._suites[name]

    def test(self, suite_name: str, test_name: Optional[str] = None):
        def decorator(func: Callable):
            func._test_name = test_name or func.__name__
            self.suite(suite_name).tests.append(func)
            return func
        return decorator

    async def run_all(self, categories: Optional[List[TestCategory]] = None,
                      pattern: Optional[str] = None) -> Dict:
        results: List[TestResult] = []
        for s in self._suites.values():
            if categories and s.category not in categories:
                continue
            logger.info(f"Running suite: {s.name}")
            for func in s.tests:
                if pattern and pattern.lower() not in func._test_name.lower():
                    continue
                result = await self._run_test(func, s)
                s.results.append(result)
                results.append(result)
        return self._report(results)

    async def _run_test(self, func: Callable, s: TestSuite) -> TestResult:
        assertions = Assertions()
        result = TestResult(f"{s.name}::{func._test_name}", TestStatus.PASSED)
        started = time.perf_counter()
        try:
            if asyncio.iscoroutinefunction(func):
                await func(assertions)
            else:
                func(assertions)
        except AssertionError as e:
            result.status = TestStatus.FAILED
            result.error = e.message
        except Exception as e:
            result.status = TestStatus.ERROR
            result.error = f"{type(e).__name__}: {e}"
            result.traceback = traceback.format_exc()
        result.duration_ms = (time.perf_counter() - started) * 1000
        result.assertions_passed = assertions.passed
        icon = "✓" if result.status is TestStatus.PASSED else "✗"
        logger.info(f"  {icon} {func._test_name} ({result.duration_ms:.2f}ms)")
        return result

    def _report(self, results: List[TestResult]) -> Dict:
        passed = sum(r.status is TestStatus.PASSED for r in results)
        return {
            "summary": {
                "total": len(results),
                "passed": passed,
                "failed": len(results) - passed,
            },
            "suites": {
                name: {
                    "category": s.category.value,
                    "total": len(s.results),
                    "passed": sum(r.status is TestStatus.PASSED for r in s.results),
                }
                for name, s in self._suites.items()
            },
            "failures": [r.to_dict() for r in results if r.status is not TestStatus.PASSED],
        }


_runner: Optional[TestRunner] = None


def get_test_runner() -> TestRunner:
    global _runner
    if _runner is None:
        _runner = TestRunner()
    return _runner


def test(suite_name: str, test_name: Optional[str] = None):
    """Register a test function"""
    return get_test_runner().test(suite_name, test_name)


def suite(name: str, category: TestCategory = TestCategory.UNIT) -> TestSuite:
    return get_test_runner().suite(name, category)


def load_suites() -> None:
    """Import every tests.suites module so its tests register"""
    from tests import suites
    for info in pkgutil.iter_modules(suites.__path__):
        importlib.import_module(f"tests.suites.{info.name}")


async def main() -> int:
    load_suites()
    report = await get_test_runner().run_all()
    summary = report["summary"]
    print(f"{summary['passed']}/{summary['total']} passed")
    for failure in report["failures"]:
        print(f"  ✗ {failure['test_name']}: {failure['error']}")
    return 0 if summary["passed"] == summary["total"] else 1


# Prevent pytest from collecting these as tests
test.__test__ = False  # type: ignore[attr-defined]
suite.__test__ = False  # type: ignore[attr-defined]
TestStatus.__test__ = False  # type: ignore[attr-defined]
TestCategory.__test__ = False  # type: ignore[attr-defined]
TestResult.__test__ = False  # type: ignore[attr-defined]
TestSuite.__test__ = False  # type: ignore[attr-defined]
TestRunner.__test__ = False  # type: ignore[attr-defined]


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO,
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    raise SystemExit(asyncio.run(main()))
