from typing import List

from pydantic import BaseModel

SUITES = ("weil", "canonical", "geometric", "moriwaki")


class CheckResult(BaseModel):
    """Outcome of one named property check, e.g. ``canonical.parallelogram``"""
    id: str
    passed: bool
    detail: str = ""


class SuiteReport(BaseModel):
    suite: str
    results: List[CheckResult] = []

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failed_ids(self) -> List[str]:
        return [r.id for r in self.results if not r.passed]
