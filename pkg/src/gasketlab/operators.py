"""Random potentials and gasket Hamiltonians H = -Laplacian + V.

Three boundary conditions are supported for a finite region A.  They share
the off-diagonal part (-1 per region edge) and differ only in the diagonal
rule at each vertex x:

* simple:             deg(x)            (ambient degree)
* neumann:            deg_A(x)          (subgraph degree)
* modified dirichlet: 2*deg(x) - deg_A(x)

so neumann <= simple <= dirichlet as quadratic forms.  The probabilistic
Laplacian divides each row of the Neumann operator by the subgraph degree;
it is kept with its degree weights so spectral code can work with the
similar symmetric form instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import ValidationError
from .lattice import LatticeRegion

SIMPLE = "simple"
NEUMANN = "neumann"
DIRICHLET = "dirichlet"
BOUNDARY_CONDITIONS = (SIMPLE, NEUMANN, DIRICHLET)


@dataclass(frozen=True)
class PotentialSpec:
    """An i.i.d. on-site potential: distribution, seed and overall scale.

    ``distribution`` is one of
      ("constant", c)
      ("bernoulli", a, b, prob_b)
      ("uniform", a, b)
      ("table", ((value, cum_prob), ...))   -- atoms with cumulative masses
    Identical seed and trial index reproduce the identical sample for the
    identical canonical vertex order, independent of scheduling.
    """

    distribution: tuple
    seed: int = 0
    scale: float = 1.0

    def __post_init__(self):
        d = self.distribution
        if not d or d[0] not in ("constant", "bernoulli", "uniform", "table"):
            raise ValidationError(f"unknown distribution {d!r}")
        if self.scale < 0:
            raise ValidationError("scale must be nonnegative")
        if d[0] == "bernoulli":
            _, _, _, p = d
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"bernoulli probability {p} not in [0,1]")
        elif d[0] == "uniform":
            _, a, b = d
            if not a < b:
                raise ValidationError("uniform needs a < b")
        elif d[0] == "table":
            rows = d[1]
            if not rows:
                raise ValidationError("empty cdf table")
            cum = [c for _, c in rows]
            if any(c2 <= c1 for c1, c2 in zip(cum, cum[1:])):
                raise ValidationError("cdf table must be strictly increasing")
            if not 0 < cum[0] <= 1 or abs(cum[-1] - 1.0) > 1e-12:
                raise ValidationError("cdf table must end at 1")

    def support(self) -> tuple[float, float]:
        """(inf, sup) of the support of the scaled distribution."""
        d = self.distribution
        if d[0] == "constant":
            lo = hi = d[1]
        elif d[0] == "bernoulli":
            lo, hi = min(d[1], d[2]), max(d[1], d[2])
        elif d[0] == "uniform":
            lo, hi = d[1], d[2]
        else:
            values = [v for v, _ in d[1]]
            lo, hi = min(values), max(values)
        return (self.scale * lo, self.scale * hi)


def constant(c: float, seed: int = 0, scale: float = 1.0) -> PotentialSpec:
    return PotentialSpec(("constant", float(c)), seed=seed, scale=scale)


def bernoulli(a: float, b: float, prob_b: float, seed: int = 0,
              scale: float = 1.0) -> PotentialSpec:
    return PotentialSpec(("bernoulli", float(a), float(b), float(prob_b)),
                         seed=seed, scale=scale)


def uniform(a: float, b: float, seed: int = 0, scale: float = 1.0) -> PotentialSpec:
    return PotentialSpec(("uniform", float(a), float(b)), seed=seed, scale=scale)


def table_cdf(rows, seed: int = 0, scale: float = 1.0) -> PotentialSpec:
    return PotentialSpec(("table", tuple((float(v), float(c)) for v, c in rows)),
                         seed=seed, scale=scale)


def sample_potential(region: LatticeRegion, spec: PotentialSpec,
                     trial: int = 0) -> np.ndarray:
    """Draw the i.i.d. potential vector in canonical vertex order.

    Uses a counter-based generator keyed by (seed, trial), so trials can be
    evaluated concurrently and in any order with identical results.
    """
    n = len(region)
    d = spec.distribution
    if d[0] == "constant":
        return np.full(n, spec.scale * d[1])
    key = np.array([np.uint64(spec.seed & (2**64 - 1)),
                    np.uint64(trial & (2**64 - 1))], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    u = rng.random(n)
    if d[0] == "bernoulli":
        _, a, b, p = d
        values = np.where(u < p, b, a)
    elif d[0] == "uniform":
        _, a, b = d
        values = a + (b - a) * u
    else:
        atoms = np.array([v for v, _ in d[1]])
        cum = np.array([c for _, c in d[1]])
        values = atoms[np.searchsorted(cum, u, side="left")]
    return spec.scale * values


@dataclass(eq=False)
class HamiltonianMatrix:
    """A sparse operator on one region, with its assembly ingredients.

    ``symmetric`` is False only for the probabilistic Laplacian, whose
    degree weights are kept so that the similar symmetric matrix
    D^{-1/2} L D^{-1/2} can be formed when eigenvalues are needed.
    """

    matrix: sparse.csr_matrix
    region: LatticeRegion
    bc: str
    potential: np.ndarray
    symmetric: bool = True
    degree_weights: np.ndarray | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def symmetric_form(self) -> sparse.csr_matrix:
        """A symmetric matrix with the same spectrum."""
        if self.symmetric:
            return self.matrix
        d = self.degree_weights
        scale = sparse.diags(1.0 / np.sqrt(d))
        lap = sparse.diags(d) @ self.matrix  # recover the combinatorial part
        return (scale @ lap @ scale).tocsr()

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ f

    def export_coordinate_text(self, path) -> None:
        """Write `i j value` rows, upper triangle only, canonical order."""
        coo = sparse.triu(self.matrix).tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w") as fh:
            for k in order:
                fh.write(f"{coo.row[k]} {coo.col[k]} {coo.data[k]:.17g}\n")


def _diagonal_rule(region: LatticeRegion, bc: str) -> np.ndarray:
    reg, full = region.degree_arrays()
    if bc == SIMPLE:
        return full
    if bc == NEUMANN:
        return reg
    if bc == DIRICHLET:
        return 2.0 * full - reg
    raise ValidationError(f"unknown boundary condition {bc!r}")


def laplacian(region: LatticeRegion, bc: str) -> sparse.csr_matrix:
    """-Laplacian of the region under the given boundary condition."""
    diag = _diagonal_rule(region, bc)
    return (sparse.diags(diag) - region.adjacency()).tocsr()


def assemble(region: LatticeRegion, bc: str,
             potential: np.ndarray) -> HamiltonianMatrix:
    """H = -Laplacian(bc) + diag(potential) on the region."""
    potential = np.asarray(potential, dtype=float)
    if potential.shape != (len(region),):
        raise ValidationError(
            f"potential length {potential.shape} != region size {len(region)}")
    mat = (laplacian(region, bc) + sparse.diags(potential)).tocsr()
    return HamiltonianMatrix(mat, region, bc, potential)


def probabilistic_laplacian(region: LatticeRegion) -> HamiltonianMatrix:
    """Degree-normalized Neumann operator D^{-1} (-Laplacian).

    Row sums vanish, so the constant vector is in the kernel; the matrix is
    not symmetric but is similar to one, and its eigenvalues are real.
    """
    reg, _ = region.degree_arrays()
    if np.any(reg == 0):
        raise ValidationError("region has an isolated vertex")
    lap = laplacian(region, NEUMANN)
    mat = (sparse.diags(1.0 / reg) @ lap).tocsr()
    return HamiltonianMatrix(mat, region, NEUMANN, np.zeros(len(region)),
                             symmetric=False, degree_weights=reg)


def quadratic_form(ham: HamiltonianMatrix, f: np.ndarray) -> float:
    """<f, H f> for a real vector f."""
    f = np.asarray(f, dtype=float)
    if f.shape != (ham.dimension,):
        raise ValidationError("vector length does not match the operator")
    return float(f @ (ham.matrix @ f))


def edge_energy(region: LatticeRegion, f: np.ndarray,
                potential: np.ndarray | None = None) -> float:
    """Independent evaluation of the Neumann form as a sum over edges:
    (1/2) sum_{x~y} (f(x)-f(y))^2 plus the on-site potential term."""
    total = 0.0
    for a, b in region.edges:
        total += (f[region.index[a]] - f[region.index[b]]) ** 2
    if potential is not None:
        total += float(np.sum(potential * np.asarray(f) ** 2))
    return total
