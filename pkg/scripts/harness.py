"""PASS/FAIL runner so every test module can also be run as a plain script."""
import time
import traceback


def run_tests(namespace: dict, title: str = "") -> int:
    """Run every ``test_*`` callable in ``namespace``; returns a process exit code."""
    tests = [(name, fn) for name, fn in namespace.items() if name.startswith("test_") and callable(fn)]
    print("=" * 80)
    print(title or "Tests")
    print("=" * 80)
    passed = failed = 0
    for name, fn in tests:
        start = time.perf_counter()
        try:
            fn()
            print(f"[PASS] {name} ({time.perf_counter() - start:.2f}s)")
            passed += 1
        except Exception as e:
            print(f"[FAIL] {name}")
            print(f"       Error: {e!r}")
            traceback.print_exc()
            failed += 1
    print("=" * 80)
    print(f"Results: {passed} passed, {failed} failed")
    return 0 if failed == 0 else 1
