"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES: list[str] = []


def record(number: int, title: str, passed: bool | None, detail: str = "") -> None:
    verdict = "SKIP" if passed is None else "PASS" if passed else "FAIL"
    line = f"[{verdict}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
    LINES.append(line)
    print(line)
