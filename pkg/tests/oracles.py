"""Slow reference implementations the fast code is checked against.

Everything here is written the straightforward way: explicit loops, full DP
tables, exhaustive enumeration. No numpy, no pruning.
"""

from itertools import combinations, permutations
from typing import Dict, List, Sequence, Set, Tuple


def flood_fill_components(grid: Sequence[Sequence[bool]]) -> List[Set[Tuple[int, int]]]:
    """8-connected foreground components via BFS, as sets of (row, col)."""
    h = len(grid)
    w = len(grid[0]) if h else 0
    seen = [[False] * w for _ in range(h)]
    out: List[Set[Tuple[int, int]]] = []
    for sy in range(h):
        for sx in range(w):
            if not grid[sy][sx] or seen[sy][sx]:
                continue
            comp = set()
            queue = [(sy, sx)]
            seen[sy][sx] = True
            while queue:
                y, x = queue.pop()
                comp.add((y, x))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and grid[ny][nx] and not seen[ny][nx]:
                            seen[ny][nx] = True
                            queue.append((ny, nx))
            out.append(comp)
    return out


def dbscan_1d_reference(
    points: Sequence[Tuple[str, float]],
    eps: float,
    min_pts: int = 2,
) -> Tuple[List[List[str]], List[str]]:
    """Textbook DBSCAN on a line: linear-scan neighborhoods, seed-set expansion.

    Points are visited in input order; a noise point later reachable from a
    cluster is absorbed by the first cluster that reaches it.
    """
    n = len(points)
    values = [v for _, v in points]

    def neighbors(i: int) -> List[int]:
        return [j for j in range(n) if abs(values[j] - values[i]) <= eps]

    UNSEEN, NOISE = -2, -1
    label = [UNSEEN] * n
    cluster = -1
    for i in range(n):
        if label[i] != UNSEEN:
            continue
        nbrs = neighbors(i)
        if len(nbrs) < min_pts:
            label[i] = NOISE
            continue
        cluster += 1
        label[i] = cluster
        seeds = [j for j in nbrs if j != i]
        k = 0
        while k < len(seeds):
            j = seeds[k]
            k += 1
            if label[j] == NOISE:
                label[j] = cluster
            if label[j] != UNSEEN:
                continue
            label[j] = cluster
            j_nbrs = neighbors(j)
            if len(j_nbrs) >= min_pts:
                seeds.extend(m for m in j_nbrs if label[m] in (UNSEEN, NOISE) and m not in seeds)
    groups: Dict[int, List[int]] = {}
    for i, lab in enumerate(label):
        groups.setdefault(lab, []).append(i)
    clusters = [
        [points[i][0] for i in sorted(groups[c], key=lambda i: (values[i], i))]
        for c in range(cluster + 1)
    ]
    outliers = [points[i][0] for i in groups.get(NOISE, [])]
    return clusters, outliers


def levenshtein_reference(a: Sequence[str], b: Sequence[str]) -> int:
    """Full-table edit distance with unit insert/delete/substitute costs."""
    n, m = len(a), len(b)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dp[i][0] = i
    for j in range(m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = dp[i - 1][j - 1] + (a[i - 1] != b[j - 1])
            dp[i][j] = min(dp[i - 1][j] + 1, dp[i][j - 1] + 1, sub)
    return dp[n][m]


def best_matching_reference(
    costs: Dict[Tuple[int, int], int],
    n_pred: int,
    n_truth: int,
) -> Tuple[int, int]:
    """Exhaustively find (max pairs, min total cost) over one-to-one matchings.

    ``costs`` holds only the admissible pairs. Feasible for the small
    instances the tests build (at most 6x6).
    """
    best = (0, 0)
    pred_ids = list(range(n_pred))
    for size in range(min(n_pred, n_truth), -1, -1):
        found = None
        for chosen in combinations(pred_ids, size):
            for perm in permutations(range(n_truth), size):
                pairs = list(zip(chosen, perm))
                if any(p not in costs for p in pairs):
                    continue
                total = sum(costs[p] for p in pairs)
                if found is None or total < found:
                    found = total
        if found is not None:
            best = (size, found)
            break
    return best
