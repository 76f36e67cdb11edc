"""Dirichlet problems on product grids and multigrid solvers over them.

The 2D operator is the negated five-point Laplacian on the interior of the
unit square (diagonal 4, off-diagonal -1), which factors as the Kronecker
sum of two 1D tridiagonals.  Each 1D factor carries its own hierarchy of
pair-aggregation prolongations with orthonormal columns, so coarsening one
dimension at a time is an exact Galerkin identity and the recursive solver
can semicoarsen along either factor.

Work is counted in smoothing units: one sweep costs the nonzero count of
the matrix being smoothed; transfers are free.  All solvers are free of
randomness, so traces are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .sparse import SparseMatrix, block_assemble, kron, kron_sum, write_matrix_market

__all__ = [
    "CycleSpec",
    "DirichletProblem",
    "WorkTrace",
    "build_problem",
    "export_problem",
    "gauss_seidel",
    "ClassicalMultigrid",
    "RecursiveSkeletal",
    "LevelwiseSkeletal",
    "GaussSeidelIteration",
    "ALGORITHMS",
    "make_solver",
    "run_benchmark",
]

RESIDUAL_FLOOR = 1e-10


@dataclass(frozen=True)
class CycleSpec:
    """gamma=1 is a V-cycle, gamma=2 a W-cycle; smoothing counts per visit."""

    gamma: int = 1
    pre_smooth: int = 1
    post_smooth: int = 1

    def __post_init__(self):
        if self.gamma not in (1, 2):
            raise ValueError("gamma must be 1 (V) or 2 (W)")
        if self.pre_smooth < 1 or self.post_smooth < 1:
            raise ValueError("smoothing counts must be at least 1")


@dataclass(frozen=True)
class DirichletProblem:
    k: int
    n: int
    A: SparseMatrix
    b: np.ndarray
    factor_ops: tuple      # [dim][i-1] -> 1D operator at level i, i = 1..k
    factor_prolong: tuple  # [dim][i-1] -> map from level i to i+1, i = 1..k-1
    bc: int


@dataclass
class WorkTrace:
    rows: list = field(default_factory=list)  # (algorithm, cycle, work, residual)

    def append(self, algorithm, cycle, work, residual):
        if self.rows and self.rows[-1][0] == algorithm and work <= self.rows[-1][2]:
            raise ValueError("cumulative work must increase")
        if not np.isfinite(residual):
            raise ValueError("residual must be finite")
        self.rows.append((algorithm, cycle, float(work), float(residual)))

    def to_csv(self):
        lines = ["algorithm,cycle,work,residual"]
        for alg, cyc, work, res in self.rows:
            lines.append(f"{alg},{cyc},{work!r},{res!r}")
        return "\n".join(lines) + "\n"

    def final_residuals(self):
        out = {}
        for alg, _, _, res in self.rows:
            out[alg] = res
        return out


def _tridiagonal(n):
    e = [(i, i, 2.0) for i in range(n)]
    e += [(i, i + 1, -1.0) for i in range(n - 1)]
    e += [(i + 1, i, -1.0) for i in range(n - 1)]
    return SparseMatrix.from_entries(n, n, e)


def _pair_prolongation(n_coarse):
    """Orthonormal pair aggregation {2p, 2p+1} -> p on interior grids.

    Interior grids have 2 * n_coarse + 1 fine nodes, one more than the pairs
    cover; the leftover last node joins the final aggregate (weight 1/sqrt 3)
    so every fine node has a coarse parent and the columns stay orthonormal.
    """
    n_fine = 2 * n_coarse + 1
    rows, cols, vals = [], [], []
    for p in range(n_coarse):
        members = [2 * p, 2 * p + 1]
        if p == n_coarse - 1:
            members.append(n_fine - 1)
        w = len(members) ** -0.5
        for m in members:
            rows.append(m)
            cols.append(p)
            vals.append(w)
    return SparseMatrix(n_fine, n_coarse, rows, cols, vals)


def _boundary_values(k, bc):
    """Boundary node values on the (n+2) x (n+2) closed grid, row 0 at bottom."""
    n = 2 ** k - 1
    m = n + 2
    vals = np.zeros((m, m))
    if bc == 1:
        vals[0, :] = 1.0
        vals[:, 0] = 1.0
    elif bc == 2:
        walk = []
        walk += [(r, 0) for r in range(m - 1)]            # up the left edge
        walk += [(m - 1, c) for c in range(m - 1)]        # right along the top
        walk += [(r, m - 1) for r in range(m - 1, 0, -1)] # down the right edge
        walk += [(0, c) for c in range(m - 1, 0, -1)]     # left along the bottom
        for t, (r, c) in enumerate(walk):
            vals[r, c] = (-1.0) ** t
    else:
        raise ValueError("bc must be 1 or 2")
    return vals


def build_problem(k, bc):
    """Interior Dirichlet system at refinement k with 2**k - 1 nodes per side."""
    if not 2 <= k <= 12:
        raise ValueError("k must be between 2 and 12")
    n = 2 ** k - 1
    ops = [_tridiagonal(n)]
    prolong = []
    for i in range(k - 1, 0, -1):
        p = _pair_prolongation(2 ** i - 1)
        prolong.append(p)
        ops.append(p.T @ ops[-1] @ p)
    ops.reverse()
    prolong.reverse()
    a = kron_sum(ops[-1], ops[-1])
    bound = _boundary_values(k, bc)
    b = np.zeros(n * n)
    border = {(r, c) for r in (1, n) for c in range(1, n + 1)}
    border |= {(r, c) for c in (1, n) for r in range(1, n + 1)}
    for r, c in sorted(border):
        acc = 0.0
        for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if rr in (0, n + 1) or cc in (0, n + 1):
                acc += bound[rr, cc]
        if acc:
            b[(r - 1) * n + (c - 1)] = acc
    return DirichletProblem(
        k, n, a, b, (tuple(ops), tuple(ops)), (tuple(prolong), tuple(prolong)), bc
    )


def export_problem(problem, directory):
    """Write the system as Matrix Market A plus one b value per line."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix_market(directory / "A.mtx", problem.A, symmetric=True)
    with open(directory / "b.txt", "w") as fh:
        for value in problem.b:
            fh.write(f"{float(value)!r}\n")


def gauss_seidel(a, x, b, sweeps=1):
    """Forward lexicographic Gauss-Seidel sweeps; returns a new vector."""
    if a.nrows != a.ncols:
        raise ValueError("gauss_seidel needs a square matrix")
    diag = a.diagonal()
    if np.any(diag == 0.0):
        raise ValueError("gauss_seidel needs a nonzero diagonal")
    indptr, indices, data = a.csr()
    x = np.array(x, dtype=np.float64)
    n = x.size
    for _ in range(sweeps):
        for i in range(n):
            lo, hi = indptr[i], indptr[i + 1]
            x[i] += (b[i] - data[lo:hi] @ x[indices[lo:hi]]) / diag[i]
    return x


class GaussSeidelIteration:
    """Plain smoothing as a baseline; one cycle is one sweep."""

    name = "gauss_seidel"

    def __init__(self, problem, cycle=None):
        self.a = problem.A
        self.b = problem.b
        self.cycle_cost = float(problem.A.nnz)

    def cycle(self, x):
        return gauss_seidel(self.a, x, self.b, 1), self.cycle_cost

    def residual(self, x):
        return float(np.linalg.norm(self.b - self.a @ x))


class ClassicalMultigrid:
    """Geometric multigrid coarsening both dimensions at once (Galerkin)."""

    def __init__(self, problem, cycle=CycleSpec()):
        self.spec = cycle
        self.b = problem.b
        self.name = "classical_mg_v" if cycle.gamma == 1 else "classical_mg_w"
        ops1, _ = problem.factor_ops
        pro1, _ = problem.factor_prolong
        self.ops = [None] * (problem.k + 1)
        self.transfer = [None] * problem.k
        self.ops[problem.k] = problem.A
        for i in range(problem.k - 1, 0, -1):
            p2 = kron(pro1[i - 1], pro1[i - 1])
            self.transfer[i] = p2
            self.ops[i] = p2.T @ self.ops[i + 1] @ p2
        self.k = problem.k
        self.cycle_cost = float(self._cost(self.k))

    def _cost(self, level):
        if level == 1:
            return self.ops[1].nnz
        local = (self.spec.pre_smooth + self.spec.post_smooth) * self.ops[level].nnz
        return local + self.spec.gamma * self._cost(level - 1)

    def _descend(self, level, x, b):
        a = self.ops[level]
        if level == 1:
            # coarsest grid: a single exact sweep solves the 1x1 system
            return gauss_seidel(a, x, b, 1), float(a.nnz)
        work = 0.0
        x = gauss_seidel(a, x, b, self.spec.pre_smooth)
        work += self.spec.pre_smooth * a.nnz
        r = b - a @ x
        p = self.transfer[level - 1]
        rc = p.T @ r
        c = np.zeros(p.ncols)
        for _ in range(self.spec.gamma):
            c, w = self._descend(level - 1, c, rc)
            work += w
        x = x + p @ c
        x = gauss_seidel(a, x, b, self.spec.post_smooth)
        work += self.spec.post_smooth * a.nnz
        return x, work

    def cycle(self, x):
        return self._descend(self.k, x, self.b)

    def residual(self, x):
        return float(np.linalg.norm(self.b - self.ops[self.k] @ x))


class RecursiveSkeletal:
    """Semicoarsened recursion: every visited grid restricts its residual
    along each factor dimension still above the coarsest level and solves
    there from a zero initial guess.

    The two prolonged corrections overlap on components smooth in both
    dimensions, so adding them verbatim amplifies exactly those components
    and the iteration diverges.  They are combined instead with the weights
    minimizing the energy norm of the remaining error (a 2x2 Galerkin solve
    over the correction span; a single correction reduces to a line search),
    which also makes every correction step monotone in the energy norm.
    """

    def __init__(self, problem, cycle=CycleSpec()):
        self.spec = cycle
        self.problem = problem
        self.name = "skeletal_recursive_v" if cycle.gamma == 1 else "skeletal_recursive_w"
        self.sizes = [0] + [2 ** i - 1 for i in range(1, problem.k + 1)]
        ops1, ops2 = problem.factor_ops
        self.ops1, self.ops2 = ops1, ops2
        pro1, pro2 = problem.factor_prolong
        self.p1 = [None] + [p.to_dense() for p in pro1]  # p1[i]: level i -> i+1
        self.p2 = [None] + [p.to_dense() for p in pro2]
        self._grid_cache = {}
        self._cost_cache = {}
        self.cycle_cost = float(self._cost(problem.k, problem.k))

    def _grid(self, l1, l2):
        key = (l1, l2)
        if key not in self._grid_cache:
            self._grid_cache[key] = kron_sum(self.ops1[l1 - 1], self.ops2[l2 - 1])
        return self._grid_cache[key]

    def _cost(self, l1, l2):
        key = (l1, l2)
        if key not in self._cost_cache:
            local = (self.spec.pre_smooth + self.spec.post_smooth) * self._grid(l1, l2).nnz
            if l1 > 1:
                local += self.spec.gamma * self._cost(l1 - 1, l2)
            if l2 > 1:
                local += self.spec.gamma * self._cost(l1, l2 - 1)
            self._cost_cache[key] = local
        return self._cost_cache[key]

    def _solve(self, l1, l2, x, b):
        a = self._grid(l1, l2)
        n1, n2 = self.sizes[l1], self.sizes[l2]
        work = 0.0
        x = gauss_seidel(a, x, b, self.spec.pre_smooth)
        work += self.spec.pre_smooth * a.nnz
        r = b - a @ x
        corrections = []
        if l1 > 1:
            p = self.p1[l1 - 1]
            r1 = (p.T @ r.reshape(n1, n2)).ravel()
            c = np.zeros(r1.size)
            for _ in range(self.spec.gamma):
                c, w = self._solve(l1 - 1, l2, c, r1)
                work += w
            corrections.append((p @ c.reshape(self.sizes[l1 - 1], n2)).ravel())
        if l2 > 1:
            p = self.p2[l2 - 1]
            r2 = (r.reshape(n1, n2) @ p).ravel()
            c = np.zeros(r2.size)
            for _ in range(self.spec.gamma):
                c, w = self._solve(l1, l2 - 1, c, r2)
                work += w
            corrections.append((c.reshape(n1, self.sizes[l2 - 1]) @ p.T).ravel())
        x = x + _energy_optimal_combination(a, r, corrections)
        x = gauss_seidel(a, x, b, self.spec.post_smooth)
        work += self.spec.post_smooth * a.nnz
        return x, work

    def solve_on_grid(self, l1, l2, x, b):
        """One recursion from an arbitrary grid; exposed for testing."""
        return self._solve(l1, l2, np.array(x, dtype=float), b)

    def cycle(self, x):
        return self._solve(self.problem.k, self.problem.k, x, self.problem.b)

    def residual(self, x):
        return float(np.linalg.norm(self.problem.b - self.problem.A @ x))


class LevelwiseSkeletal:
    """Classical multigrid over summed-level systems: the level-L operator is
    the block diagonal of every factor-level pair (i1, i2) with i1 + i2 = L,
    transfers move one factor per block and are column-renormalized."""

    def __init__(self, problem, cycle=CycleSpec()):
        self.spec = cycle
        self.problem = problem
        self.name = "skeletal_levelwise_v" if cycle.gamma == 1 else "skeletal_levelwise_w"
        k = problem.k
        sizes = [0] + [2 ** i - 1 for i in range(1, k + 1)]
        ops1, ops2 = problem.factor_ops
        pro1, pro2 = problem.factor_prolong
        self.blocks = {
            level: [
                (i1, level - i1)
                for i1 in range(max(1, level - k), min(level - 1, k) + 1)
            ]
            for level in range(2, 2 * k + 1)
        }
        self.ops = {}
        self.transfer = {}
        for level in range(2, 2 * k + 1):
            bl = self.blocks[level]
            dims = [sizes[i1] * sizes[i2] for i1, i2 in bl]
            diag = {
                (j, j): kron_sum(ops1[i1 - 1], ops2[i2 - 1])
                for j, (i1, i2) in enumerate(bl)
            }
            self.ops[level] = block_assemble(diag, dims, dims)
        for level in range(3, 2 * k + 1):
            fine, coarse = self.blocks[level], self.blocks[level - 1]
            rows = [sizes[i1] * sizes[i2] for i1, i2 in fine]
            cols = [sizes[i1] * sizes[i2] for i1, i2 in coarse]
            blocks = {}
            for fj, (i1, i2) in enumerate(fine):
                for cj, (j1, j2) in enumerate(coarse):
                    if (j1, j2) == (i1 - 1, i2):
                        blocks[(fj, cj)] = kron(pro1[i1 - 2], _identity_like(sizes[i2]))
                    elif (j1, j2) == (i1, i2 - 1):
                        blocks[(fj, cj)] = kron(_identity_like(sizes[i1]), pro2[i2 - 2])
            p = block_assemble(blocks, rows, cols)
            self.transfer[level] = _renormalize_columns(p)
        self.top = 2 * k
        self.cycle_cost = float(self._cost(self.top))

    def _cost(self, level):
        if level == 2:
            return self.ops[2].nnz
        local = (self.spec.pre_smooth + self.spec.post_smooth) * self.ops[level].nnz
        return local + self.spec.gamma * self._cost(level - 1)

    def _descend(self, level, x, b):
        a = self.ops[level]
        if level == 2:
            return gauss_seidel(a, x, b, 1), float(a.nnz)
        work = 0.0
        x = gauss_seidel(a, x, b, self.spec.pre_smooth)
        work += self.spec.pre_smooth * a.nnz
        r = b - a @ x
        p = self.transfer[level]
        rc = p.T @ r
        c = np.zeros(p.ncols)
        for _ in range(self.spec.gamma):
            c, w = self._descend(level - 1, c, rc)
            work += w
        # level L-1 repeats the level-L function content across its blocks,
        # so the raw correction overcounts; scale it to the energy optimum
        x = x + _energy_optimal_combination(a, r, [p @ c])
        x = gauss_seidel(a, x, b, self.spec.post_smooth)
        work += self.spec.post_smooth * a.nnz
        return x, work

    def cycle(self, x):
        return self._descend(self.top, x, self.problem.b)

    def residual(self, x):
        return float(np.linalg.norm(self.problem.b - self.problem.A @ x))


def _energy_optimal_combination(a, r, corrections):
    """Combination of candidate corrections minimizing the energy norm of the
    remaining error: solve the small Gram system (d_i, A d_j) alpha = (d_i, r).
    Degenerate directions fall back to equal weights."""
    if not corrections:
        return 0.0
    applied = [a @ d for d in corrections]
    gram = np.array([[di @ adj for adj in applied] for di in corrections])
    rhs = np.array([d @ r for d in corrections])
    try:
        alpha = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        alpha = np.full(len(corrections), 1.0 / len(corrections))
    out = np.zeros_like(corrections[0])
    for coeff, d in zip(alpha, corrections):
        out += coeff * d
    return out


def _identity_like(n):
    idx = np.arange(n)
    return SparseMatrix(n, n, idx, idx, np.ones(n))


def _renormalize_columns(p):
    norms = np.sqrt(np.bincount(p.cols, weights=p.vals ** 2, minlength=p.ncols))
    return SparseMatrix(p.nrows, p.ncols, p.rows, p.cols, p.vals / norms[p.cols])


ALGORITHMS = {
    "gauss_seidel": lambda prob: GaussSeidelIteration(prob),
    "classical_mg_v": lambda prob: ClassicalMultigrid(prob, CycleSpec(gamma=1)),
    "classical_mg_w": lambda prob: ClassicalMultigrid(prob, CycleSpec(gamma=2)),
    "skeletal_recursive_v": lambda prob: RecursiveSkeletal(prob, CycleSpec(gamma=1)),
    "skeletal_recursive_w": lambda prob: RecursiveSkeletal(prob, CycleSpec(gamma=2)),
    "skeletal_levelwise_v": lambda prob: LevelwiseSkeletal(prob, CycleSpec(gamma=1)),
}


def make_solver(name, problem):
    try:
        factory = ALGORITHMS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}") from None
    return factory(problem)


def run_benchmark(k, bc, algorithms, budget):
    """Run each algorithm from zero until the work budget or residual floor.

    A cycle only runs when its full cost still fits in the budget, so a zero
    budget records just the starting residuals.  Rows are ordered by
    (algorithm, cycle).
    """
    problem = build_problem(k, bc)
    trace = WorkTrace()
    bnorm = float(np.linalg.norm(problem.b))
    for name in sorted(algorithms):
        solver = make_solver(name, problem)
        x = np.zeros(problem.n ** 2)
        work = 0.0
        res = solver.residual(x)
        trace.append(name, 0, work, res)
        step = 0
        while res > RESIDUAL_FLOOR * bnorm and work + solver.cycle_cost <= budget:
            x, dw = solver.cycle(x)
            work += dw
            res = solver.residual(x)
            step += 1
            trace.append(name, step, work, res)
    return trace
