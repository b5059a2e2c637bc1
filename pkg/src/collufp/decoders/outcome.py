from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..gf2 import BitWord


class Status(str, enum.Enum):
    IDENTIFIED = "identified"
    AMBIGUOUS = "ambiguous"
    FAILED = "failed"


@dataclass(frozen=True)
class DecodeOutcome:
    """Result of one identification attempt.

    ``accused`` is ``None`` only for ``FAILED``.  ``candidates`` holds the
    consistent user indices when the decoder enumerates them.
    """

    status: Status
    accused: int | None = None
    candidate_count: int = 0
    candidates: tuple[int, ...] | None = None
    word: BitWord | None = None
    iterations: int = 0
    guesses: int = 0
    info: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.status is Status.FAILED


def failed(**kw) -> DecodeOutcome:
    return DecodeOutcome(Status.FAILED, **kw)
