"""One pass/fail line per acceptance criterion, filled in as the tests run."""

import functools
import time

LINES = {}


def criterion(number: int, title: str, limit_s: float):
    """Time the wrapped test, check its runtime limit and log the verdict.

    The test returns a short detail string that is appended to its line.
    """
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            detail = ""
            try:
                detail = fn(*args, **kwargs) or ""
                elapsed = time.perf_counter() - start
                assert elapsed < limit_s, f"took {elapsed:.2f}s, limit {limit_s}s"
            except BaseException as exc:
                elapsed = time.perf_counter() - start
                LINES[number] = f"criterion {number:2d} FAIL  {title} ({elapsed:.2f}s / {limit_s}s): {exc}"
                print(LINES[number])
                raise
            LINES[number] = f"criterion {number:2d} PASS  {title} ({elapsed:.2f}s / {limit_s}s) {detail}".rstrip()
            print(LINES[number])
        return run
    return wrap
