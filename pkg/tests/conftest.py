"""Collects one verdict line per acceptance criterion and prints them at the end of the run."""

VERDICTS: dict[str, str] = {}


def record(key: str, ok: bool, detail: str) -> None:
    VERDICTS[key] = f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}"
    print(VERDICTS[key])


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")

    def order(k):
        head = k.rstrip("abcdefghijklmnopqrstuvwxyz")
        return int(head), k

    for key in sorted(VERDICTS, key=order):
        terminalreporter.write_line(VERDICTS[key])
