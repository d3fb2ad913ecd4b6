"""
Time-slot availability: tables, pivot windows, common runs and the blocked-slot
statistics used by availability pruning.

Slots are 1-based. A row is stored as an int bitset, bit t-1 set when the
vertex is available in slot t.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .exceptions import InputError


@dataclass(frozen=True, order=True)
class SlotRange:
    """Inclusive slot interval [start, end]; empty when end < start."""
    start: int
    end: int

    def __len__(self) -> int:
        return max(0, self.end - self.start + 1)

    def __bool__(self) -> bool:
        return self.end >= self.start

    def __contains__(self, t: int) -> bool:
        return self.start <= t <= self.end

    def __iter__(self):
        return iter(range(self.start, self.end + 1))

    def earliest(self, m: int) -> 'SlotRange':
        """First m-slot window inside this range."""
        return SlotRange(self.start, self.start + m - 1)

    def __str__(self) -> str:
        return f'[{self.start}, {self.end}]'


@dataclass(frozen=True)
class PivotWindow:
    pivot: int
    window: SlotRange

    @classmethod
    def for_pivot(cls, pivot: int, m: int, horizon: int) -> 'PivotWindow':
        if pivot % m or not 1 <= pivot <= horizon:
            raise InputError(f'slot {pivot} is not a pivot for m={m}, T={horizon}')
        i = pivot // m
        return cls(pivot, SlotRange((i - 1) * m + 1, min((i + 1) * m - 1, horizon)))


class AvailabilityTable:
    """Per-vertex availability over slots 1..horizon. Immutable."""

    def __init__(self, horizon: int, rows: Mapping[str, Iterable[bool]] | None = None):
        if not isinstance(horizon, int) or horizon < 1:
            raise InputError(f'horizon must be a positive integer, got {horizon!r}')
        self.horizon = horizon
        self._full = (1 << horizon) - 1
        masks = {}
        for v, row in (rows or {}).items():
            row = list(row)
            if len(row) != horizon:
                raise InputError(f'row of {v!r} has {len(row)} slots, expected {horizon}')
            mask = 0
            for t, available in enumerate(row):
                if available:
                    mask |= 1 << t
            masks[v] = mask
        self._masks = masks

    @classmethod
    def from_masks(cls, horizon: int, masks: Mapping[str, int]) -> 'AvailabilityTable':
        table = cls(horizon)
        table._masks = {v: mask & table._full for v, mask in masks.items()}
        return table

    @classmethod
    def always_available(cls, horizon: int, vertices: Iterable[str]) -> 'AvailabilityTable':
        return cls.from_masks(horizon, {v: (1 << horizon) - 1 for v in vertices})

    @property
    def vertices(self) -> tuple[str, ...]:
        return tuple(sorted(self._masks))

    def __contains__(self, v) -> bool:
        return v in self._masks

    def mask(self, v: str) -> int:
        # sin calendario: nunca disponible
        return self._masks.get(v, 0)

    def row(self, v: str) -> tuple[bool, ...]:
        mask = self.mask(v)
        return tuple(bool(mask >> t & 1) for t in range(self.horizon))

    def is_available(self, v: str, t: int) -> bool:
        return bool(self.mask(v) >> (t - 1) & 1)

    def available_throughout(self, v: str, period: SlotRange) -> bool:
        return _run_mask(period) & ~self.mask(v) == 0

    def common_mask(self, members: Iterable[str]) -> int:
        mask = self._full
        for v in members:
            mask &= self.mask(v)
        return mask


def _run_mask(period: SlotRange) -> int:
    if not period:
        return 0
    return ((1 << len(period)) - 1) << (period.start - 1)


def pivot_slots(T: int, m: int) -> list[int]:
    if m < 1 or T < 1:
        raise InputError(f'need T >= 1 and m >= 1, got T={T}, m={m}')
    return list(range(m, T + 1, m))


def run_around(mask: int, pw: PivotWindow) -> SlotRange:
    """Maximal run of set bits of `mask` inside the window containing the pivot."""
    if not mask >> (pw.pivot - 1) & 1:
        return SlotRange(pw.pivot, pw.pivot - 1)
    start = pw.pivot
    while start > pw.window.start and mask >> (start - 2) & 1:
        start -= 1
    end = pw.pivot
    while end < pw.window.end and mask >> end & 1:
        end += 1
    return SlotRange(start, end)


def common_run(table: AvailabilityTable, members: Iterable[str], pw: PivotWindow) -> SlotRange:
    return run_around(table.common_mask(members), pw)


def has_feasible_run(table: AvailabilityTable, v: str, pw: PivotWindow, m: int) -> bool:
    return len(run_around(table.mask(v), pw)) >= m


def available_at_pivot(table: AvailabilityTable, v: str, pw: PivotWindow, m: int) -> bool:
    """Looser candidate filter: only the pivot slot is checked."""
    return table.is_available(v, pw.pivot)


def tbar(table: AvailabilityTable, candidates: Iterable[str], pw: PivotWindow, n: int) -> tuple[int, int]:
    """
    Slots closest to the pivot (below, above) where at least n candidates are
    unavailable; one-past-window sentinels when there is none.
    """
    masks = [table.mask(v) for v in candidates]

    def blocked(t: int) -> bool:
        bit = 1 << (t - 1)
        return sum(1 for mask in masks if not mask & bit) >= n

    below = pw.window.start - 1
    for t in range(pw.pivot - 1, pw.window.start - 1, -1):
        if blocked(t):
            below = t
            break
    above = pw.window.end + 1
    for t in range(pw.pivot + 1, pw.window.end + 1):
        if blocked(t):
            above = t
            break
    return below, above


def earliest_common_window(table: AvailabilityTable, members: Iterable[str], m: int) -> SlotRange | None:
    """Earliest m consecutive slots in [1, T] where every member is available."""
    mask = table.common_mask(members)
    run = 0
    for t in range(1, table.horizon + 1):
        run = run + 1 if mask >> (t - 1) & 1 else 0
        if run >= m:
            return SlotRange(t - m + 1, t)
    return None
