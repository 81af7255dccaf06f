"""Synthetic collinear regression datasets, correlation statistics, and model costs.

The generated design matrix has two column groups: independent covariates
(iid standard normal, each entering the response with its own coefficient)
and a collinear group (one shared latent factor plus small per-column
noise). A candidate model is a binary inclusion vector over the columns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Defaults calibrated so that collinear columns correlate with the output
# noticeably more strongly (~0.42) than independents (~0.28), while within
# the collinear block |corr| stays ~0.99.
DEFAULT_N_SAMPLES = 500
DEFAULT_COLLINEAR_NOISE = 0.1
DEFAULT_OUTPUT_NOISE = 0.75
DEFAULT_COEF_LATENT = 1.5


class GenerationError(ValueError):
    """Raised when a dataset spec cannot produce a valid dataset."""


@dataclass(frozen=True)
class DatasetSpec:
    """Recipe for one synthetic regression dataset."""

    n_samples: int = DEFAULT_N_SAMPLES
    n_independent: int = 10
    n_collinear: int = 15
    collinear_noise: float = DEFAULT_COLLINEAR_NOISE
    output_noise: float = DEFAULT_OUTPUT_NOISE
    coef_independent: tuple[float, ...] | None = None
    coef_latent: float = DEFAULT_COEF_LATENT
    seed: int = 0

    def __post_init__(self):
        if self.n_independent < 1 or self.n_collinear < 0:
            raise GenerationError("need n_independent >= 1 and n_collinear >= 0")
        if self.n_independent + self.n_collinear < 1:
            raise GenerationError("dataset must have at least one column")
        if self.n_samples < 3:
            raise GenerationError("n_samples must be >= 3 for correlations to be defined")
        if self.collinear_noise <= 0:
            raise GenerationError("collinear_noise must be > 0")
        if self.output_noise < 0:
            raise GenerationError("output_noise must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise GenerationError("seed must fit in 64 unsigned bits")
        if self.coef_independent is not None:
            object.__setattr__(self, "coef_independent", tuple(float(c) for c in self.coef_independent))
            if len(self.coef_independent) != self.n_independent:
                raise GenerationError("coef_independent length must equal n_independent")

    @property
    def d(self) -> int:
        return self.n_independent + self.n_collinear

    def coefs(self) -> np.ndarray:
        if self.coef_independent is None:
            return np.ones(self.n_independent)
        return np.asarray(self.coef_independent, dtype=float)

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "n_independent": self.n_independent,
            "n_collinear": self.n_collinear,
            "collinear_noise": self.collinear_noise,
            "output_noise": self.output_noise,
            "coef_independent": None if self.coef_independent is None else list(self.coef_independent),
            "coef_latent": self.coef_latent,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetSpec":
        coef = data.get("coef_independent")
        return cls(
            n_samples=int(data["n_samples"]),
            n_independent=int(data["n_independent"]),
            n_collinear=int(data["n_collinear"]),
            collinear_noise=float(data["collinear_noise"]),
            output_noise=float(data["output_noise"]),
            coef_independent=None if coef is None else tuple(coef),
            coef_latent=float(data["coef_latent"]),
            seed=int(data["seed"]),
        )


@dataclass(frozen=True)
class Dataset:
    """Design matrix, response, column groups, and precomputed correlations."""

    X: np.ndarray
    Y: np.ndarray
    independent_idx: tuple[int, ...]
    collinear_idx: tuple[int, ...]
    corr_to_output: np.ndarray  # signed Pearson corr(X_i, Y)
    corr_matrix: np.ndarray
    spec: DatasetSpec | None = None
    # |corr| views used in hot loops
    abs_corr_y: np.ndarray = field(init=False, repr=False)
    abs_corr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "abs_corr_y", np.abs(self.corr_to_output))
        object.__setattr__(self, "abs_corr", np.abs(self.corr_matrix))
        self.X.setflags(write=False)
        self.Y.setflags(write=False)

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def independent_mask(self) -> np.ndarray:
        mask = np.zeros(self.d, dtype=bool)
        mask[list(self.independent_idx)] = True
        return mask


def pearson_corr(x: np.ndarray, y: np.ndarray) -> float:
    """Sample Pearson correlation of two equal-length vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson_corr needs two 1-d vectors of equal length")
    if x.size < 2:
        raise ValueError("pearson_corr needs at least 2 points")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = np.sqrt(xd @ xd)
    sy = np.sqrt(yd @ yd)
    if sx == 0.0 or sy == 0.0:
        raise ValueError("pearson_corr undefined for zero-variance input")
    return float(np.clip((xd @ yd) / (sx * sy), -1.0, 1.0))


def generate_dataset(spec: DatasetSpec) -> Dataset:
    """Generate a dataset from a spec; bit-reproducible for a fixed seed.

    Independent columns are iid standard normal. Collinear columns share one
    latent standard-normal factor u per dataset, perturbed by collinear_noise.
    Y = X_ind @ coef_independent + coef_latent * u + output_noise * eps.
    """
    rng = np.random.default_rng(spec.seed)
    n, p, q = spec.n_samples, spec.n_independent, spec.n_collinear
    X_ind = rng.standard_normal((n, p))
    u = rng.standard_normal(n)
    X_col = u[:, None] + spec.collinear_noise * rng.standard_normal((n, q)) if q else np.empty((n, 0))
    X = np.concatenate([X_ind, X_col], axis=1)
    Y = X_ind @ spec.coefs() + spec.coef_latent * u + spec.output_noise * rng.standard_normal(n)

    if np.any(X.std(axis=0) == 0.0) or Y.std() == 0.0:
        raise GenerationError("degenerate spec: zero-variance column in generated data")

    corr_y = np.array([pearson_corr(X[:, i], Y) for i in range(spec.d)])
    corr_m = np.corrcoef(X, rowvar=False)
    np.fill_diagonal(corr_m, 1.0)
    corr_m = np.clip((corr_m + corr_m.T) / 2.0, -1.0, 1.0)
    return Dataset(
        X=X,
        Y=Y,
        independent_idx=tuple(range(p)),
        collinear_idx=tuple(range(p, p + q)),
        corr_to_output=corr_y,
        corr_matrix=corr_m,
        spec=spec,
    )


def feature_map(action: int, model: np.ndarray, ds: Dataset) -> tuple[float, float]:
    """Statistics of a suggested covariate against the current model.

    Returns (|corr(action, Y)|, max over included j of |corr(action, j)|),
    the second being 0.0 for an empty model.
    """
    phi1 = float(ds.abs_corr_y[action])
    included = np.asarray(model, dtype=bool)
    phi2 = float(ds.abs_corr[action][included].max()) if included.any() else 0.0
    return phi1, phi2


def optimal_model(ds: Dataset) -> np.ndarray:
    """All independents plus the single best collinear covariate (lowest index on ties)."""
    theta = np.zeros(ds.d, dtype=np.int8)
    theta[list(ds.independent_idx)] = 1
    if ds.collinear_idx:
        col = np.array(ds.collinear_idx)
        best = col[np.argmax(ds.abs_corr_y[col])]  # argmax takes the first of ties
        theta[best] = 1
    return theta


def selection_cost(model: np.ndarray, ds: Dataset) -> float:
    """Unit cost per missed independent and per extra collinear beyond one."""
    theta = np.asarray(model).astype(bool)
    if theta.shape != (ds.d,):
        raise ValueError("model length must equal dataset dimension")
    missed = sum(1 for i in ds.independent_idx if not theta[i])
    n_col = sum(1 for i in ds.collinear_idx if theta[i])
    return float(missed + max(0, n_col - 1))


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    a = np.asarray(a).astype(bool)
    b = np.asarray(b).astype(bool)
    if a.shape != b.shape:
        raise ValueError("hamming distance needs equal-length models")
    return int(np.count_nonzero(a != b))


def save_dataset_csv(ds: Dataset, path: str | Path) -> Path:
    """Write X,Y as CSV (header x1..xd,y) plus a .meta.json sidecar."""
    path = Path(path)
    d = ds.d
    header = ",".join([f"x{i + 1}" for i in range(d)] + ["y"])
    data = np.column_stack([ds.X, ds.Y])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    meta = {
        "spec": ds.spec.to_dict() if ds.spec is not None else None,
        "independent_idx": list(ds.independent_idx),
        "collinear_idx": list(ds.collinear_idx),
    }
    sidecar = path.with_suffix(path.suffix + ".meta.json") if path.suffix != ".csv" else path.with_name(path.stem + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2) + "\n")
    return sidecar


def load_dataset_csv(path: str | Path) -> Dataset:
    """Rebuild a Dataset from a CSV + sidecar pair; correlations are recomputed."""
    path = Path(path)
    sidecar = path.with_name(path.stem + ".meta.json")
    meta = json.loads(sidecar.read_text())
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    X, Y = raw[:, :-1], raw[:, -1]
    d = X.shape[1]
    corr_y = np.array([pearson_corr(X[:, i], Y) for i in range(d)])
    corr_m = np.corrcoef(X, rowvar=False)
    if d == 1:
        corr_m = np.array([[1.0]])
    np.fill_diagonal(corr_m, 1.0)
    corr_m = np.clip((corr_m + corr_m.T) / 2.0, -1.0, 1.0)
    spec = DatasetSpec.from_dict(meta["spec"]) if meta.get("spec") else None
    return Dataset(
        X=X,
        Y=Y,
        independent_idx=tuple(meta["independent_idx"]),
        collinear_idx=tuple(meta["collinear_idx"]),
        corr_to_output=corr_y,
        corr_matrix=corr_m,
        spec=spec,
    )
