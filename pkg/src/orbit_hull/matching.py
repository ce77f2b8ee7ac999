from typing import List, Optional, Sequence

import numpy as np

from .errors import ShapeError


class AugmentingPathMatcher:
    """Kuhn's augmenting-path matching on the support of a square matrix.

    Any perfect matching is first completed from the optional partial one; it is then
    moved to the lexicographically smallest perfect matching: rows are fixed in index
    order, and each row takes the smallest column that still leaves a perfect matching
    on the rows after it.
    """

    def __init__(self, support: np.ndarray):
        support = np.asarray(support, dtype=bool)
        if support.ndim != 2 or support.shape[0] != support.shape[1]:
            raise ShapeError(f"support must be square, got shape {support.shape}")
        self._n = support.shape[0]
        self._adjacency: List[np.ndarray] = [np.flatnonzero(row) for row in support]
        self._support = support
        self._pair_row: List[int] = [-1] * self._n
        self._pair_col: List[int] = [-1] * self._n

    def _augment(self, row: int, visited: List[bool]) -> bool:
        for col in self._adjacency[row]:
            if visited[col]:
                continue
            visited[col] = True
            if self._pair_col[col] == -1 or self._augment(self._pair_col[col], visited):
                self._pair_col[col] = row
                self._pair_row[row] = int(col)
                return True
        return False

    def _try_smaller(self, row: int, col: int) -> bool:
        """Moves ``row`` onto ``col`` and re-matches the displaced row among the later rows."""
        saved_rows, saved_cols = list(self._pair_row), list(self._pair_col)
        displaced, freed = self._pair_col[col], self._pair_row[row]
        self._pair_row[row], self._pair_col[col] = int(col), row
        self._pair_row[displaced], self._pair_col[freed] = -1, -1

        visited = [False] * self._n
        for earlier in range(row + 1):
            visited[self._pair_row[earlier]] = True
        if self._augment(displaced, visited):
            return True
        self._pair_row, self._pair_col = saved_rows, saved_cols
        return False

    def _lexicographic(self) -> None:
        for row in range(self._n):
            for col in self._adjacency[row]:
                if col >= self._pair_row[row]:
                    break
                # columns of fixed rows are taken
                if self._pair_col[col] < row:
                    continue
                if self._try_smaller(row, col):
                    break

    def seed(self, partial: Sequence[int]) -> None:
        """Keeps the pairs of ``partial`` that still lie on the support."""
        for row, col in enumerate(partial):
            if col >= 0 and self._support[row, col] and self._pair_col[col] == -1:
                self._pair_row[row] = col
                self._pair_col[col] = row

    def run(self) -> Optional[List[int]]:
        for row in range(self._n):
            if self._pair_row[row] != -1:
                continue
            if not self._augment(row, [False] * self._n):
                return None
        self._lexicographic()
        return list(self._pair_row)


def perfect_matching(support: np.ndarray, partial: Optional[Sequence[int]] = None) -> Optional[List[int]]:
    """Returns the lexicographically smallest ``perm`` with ``support[i, perm[i]]`` true for every row.

    ``partial`` only warm-starts the search. None means Hall's condition fails.
    """
    matcher = AugmentingPathMatcher(support)
    if partial is not None:
        matcher.seed(partial)
    return matcher.run()
