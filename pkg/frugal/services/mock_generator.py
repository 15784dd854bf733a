from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from frugal.connectors.dataset import write_reports
from frugal.models import RawDocument

SEVERE_WORDS = [
    "crash", "overflow", "segfault", "deadlock", "corrupt", "panic", "abort", "fatal", "leak", "hang",
    "reboot", "kernel", "memory", "pointer", "stack", "heap", "thread", "watchdog", "timeout", "fault",
]
BENIGN_WORDS = [
    "typo", "label", "color", "font", "spacing", "tooltip", "wording", "icon", "margin", "layout",
    "comment", "docs", "readme", "banner", "theme", "padding", "caption", "hint", "format", "style",
]


class SyntheticReportGenerator:
    """
    Generates synthetic bug reports for tests and demos.

    Each report draws its words from one of two disjoint 20-word vocabularies.
    With probability `agreement` the severity label matches the vocabulary the
    text came from; otherwise it is flipped. Severe text is the slight
    majority so the severe label becomes the positive class.
    """

    def __init__(self, seed: int = 1, agreement: float = 0.9, severe_fraction: float = 0.55,
                 length: Tuple[int, int] = (8, 20), severe_label: str = "severe", benign_label: str = "minor"):
        if not 0.0 <= agreement <= 1.0:
            raise ValueError(f"agreement must be in [0, 1], got {agreement}")
        if not 0.0 < severe_fraction < 1.0:
            raise ValueError(f"severe_fraction must be in (0, 1), got {severe_fraction}")
        self.rng = np.random.default_rng(seed)
        self.agreement = agreement
        self.severe_fraction = severe_fraction
        self.length = length
        self.severe_label = severe_label
        self.benign_label = benign_label

    def generate_report(self, index: int) -> Tuple[RawDocument, bool]:
        """Returns the report and whether its text came from the severe vocabulary."""
        severe_text = bool(self.rng.random() < self.severe_fraction)
        words = SEVERE_WORDS if severe_text else BENIGN_WORDS
        n = int(self.rng.integers(self.length[0], self.length[1] + 1))
        text = " ".join(self.rng.choice(words, size=n))

        severe_label = severe_text if self.rng.random() < self.agreement else not severe_text
        severity = self.severe_label if severe_label else self.benign_label
        return RawDocument(id=f"r{index:04d}", text=text, severity=severity), severe_text

    def generate(self, n_docs: int = 400) -> List[RawDocument]:
        return [self.generate_report(i)[0] for i in range(n_docs)]

    def write_csv(self, path: str, n_docs: int = 400, reports: Optional[List[RawDocument]] = None) -> Path:
        return write_reports(path, reports if reports is not None else self.generate(n_docs))
