"""Compression/reconstruction coding of node-pair vectors.

The coding function compresses an input ``e`` (length ``k``) into a code
``alpha = sigmoid(Wc @ e + bc)`` of length ``l < k`` and reconstructs
``beta = sigmoid(Wr @ alpha + br)``. Parameters minimise the mean squared
reconstruction error plus ``lam / 2`` times the squared Frobenius norms of
both weight matrices, using full-batch gradient descent with backpropagated
gradients.

Datasets are row-major: one example per row, so the batch forward pass is
``A = sigmoid(E @ Wc.T + bc)``.
"""
from __future__ import annotations

import contextlib
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.special import expit

logger = logging.getLogger(__name__)

MODEL_HEADER = "dylink2vec-model v1"
# Weight-decay strength. Inputs live in [0, 1]; at 0.1 the penalty dominates the
# reconstruction term for k in the thousands and collapses the encoder weights.
DEFAULT_LAMBDA = 1e-3


class DivergenceError(RuntimeError):
    def __init__(self, iteration: int, value: float):
        super().__init__(f"loss became non-finite ({value}) at iteration {iteration}")
        self.iteration = iteration
        self.value = value


@dataclass(frozen=True, eq=False)
class EmbeddingModel:
    Wc: np.ndarray  # l x k
    bc: np.ndarray  # l
    Wr: np.ndarray  # k x l
    br: np.ndarray  # k
    lam: float = DEFAULT_LAMBDA
    loss_trace: tuple[float, ...] = ()

    def __post_init__(self):
        l, k = self.Wc.shape
        if self.Wr.shape != (k, l) or self.bc.shape != (l,) or self.br.shape != (k,):
            raise ValueError(
                f"inconsistent parameter shapes: Wc{self.Wc.shape} bc{self.bc.shape} "
                f"Wr{self.Wr.shape} br{self.br.shape}")
        # train() insists on l < k; hand-built models may use a square code
        if not 1 <= l <= k:
            raise ValueError(f"code length l={l} must lie in [1, k={k}]")
        for name in ("Wc", "bc", "Wr", "br"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"parameter {name} has non-finite entries")

    @property
    def k(self) -> int:
        return self.Wc.shape[1]

    @property
    def l(self) -> int:  # noqa: E743
        return self.Wc.shape[0]

    @classmethod
    def zeros(cls, k: int, l: int, lam: float = DEFAULT_LAMBDA) -> "EmbeddingModel":
        return cls(np.zeros((l, k)), np.zeros(l), np.zeros((k, l)), np.zeros(k), lam)

    @classmethod
    def random(cls, k: int, l: int, lam: float = DEFAULT_LAMBDA, seed: int = 0,
               init_scale: float | None = None) -> "EmbeddingModel":
        """Weights uniform in ``[-r, r]`` (default ``r = sqrt(6 / (k + l))``), zero biases."""
        r = math.sqrt(6.0 / (k + l)) if init_scale is None else init_scale
        rng = np.random.default_rng(seed)
        Wc = rng.uniform(-r, r, size=(l, k))
        Wr = rng.uniform(-r, r, size=(k, l))
        return cls(Wc, np.zeros(l), Wr, np.zeros(k), lam)

    def params(self) -> dict[str, np.ndarray]:
        return {"Wc": self.Wc, "bc": self.bc, "Wr": self.Wr, "br": self.br}

    def equals(self, other: "EmbeddingModel") -> bool:
        """Bitwise equality of all parameters and ``lam``."""
        return self.lam == other.lam and all(
            np.array_equal(a, b) for a, b in zip(self.params().values(), other.params().values()))


@dataclass(frozen=True, eq=False)
class Gradients:
    Wc: np.ndarray
    bc: np.ndarray
    Wr: np.ndarray
    br: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    sigma: float = 2.0
    max_iters: int = 100
    tol: float = 1e-6
    seed: int = 0
    init_scale: float | None = None
    # "backtrack" halves sigma whenever a step would raise the loss; "fixed" never adapts
    step_policy: str = "backtrack"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")
        if self.step_policy not in ("backtrack", "fixed"):
            raise ValueError(f"unknown step_policy {self.step_policy!r}")


# --- work accounting ------------------------------------------------------

class FlopCounter:
    """Counts multiply-adds of the matrix products in this module, at dense size."""

    def __init__(self):
        self.madds = 0


_counter: FlopCounter | None = None


@contextlib.contextmanager
def count_flops():
    global _counter
    prev, _counter = _counter, FlopCounter()
    try:
        yield _counter
    finally:
        _counter = prev


def _mm(a, b) -> np.ndarray:
    if _counter is not None:
        _counter.madds += a.shape[0] * a.shape[1] * b.shape[-1]
    out = a @ b
    return np.asarray(out) if sparse.issparse(a) or sparse.issparse(b) else out


# --- forward maps ---------------------------------------------------------

def sigmoid(x, out=None):
    """Logistic function ``1 / (1 + exp(-x))``, overflow-safe."""
    return expit(np.asarray(x, dtype=float), out=out)


def _as_rows(model: EmbeddingModel, E):
    E = E if sparse.issparse(E) else np.asarray(E, dtype=float)
    if E.ndim != 2 or E.shape[1] != model.k:
        raise ValueError(f"expected rows of length k={model.k}, got shape {E.shape}")
    return E


def _maybe_sparse(E: np.ndarray, max_density: float = 0.1):
    """CSR copy of a mostly-zero dataset; the products with it then cost O(nnz * l)."""
    if sparse.issparse(E) or E.size == 0:
        return E
    if np.count_nonzero(E) <= max_density * E.size:
        return sparse.csr_matrix(E)
    return E


def compress(model: EmbeddingModel, e) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    if e.shape != (model.k,):
        raise ValueError(f"input length {e.shape} does not match k={model.k}")
    return sigmoid(model.Wc @ e + model.bc)


def reconstruct(model: EmbeddingModel, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (model.l,):
        raise ValueError(f"code length {alpha.shape} does not match l={model.l}")
    return sigmoid(model.Wr @ alpha + model.br)


def embed(model: EmbeddingModel, E) -> np.ndarray:
    """Row-wise compression of a dataset, shape ``(rows, l)``."""
    E = _as_rows(model, E)
    Z = _mm(E, model.Wc.T)
    Z += model.bc
    return sigmoid(Z, out=Z)


def _forward(model: EmbeddingModel, E):
    A = embed(model, E)
    Z = _mm(A, model.Wr.T)
    Z += model.br
    return A, sigmoid(Z, out=Z)


def _residual(B: np.ndarray, E) -> np.ndarray:
    if sparse.issparse(E):
        R = B.copy()
        coo = E.tocoo()
        R[coo.row, coo.col] -= coo.data
        return R
    return B - E


def _penalty(model: EmbeddingModel) -> float:
    return 0.5 * model.lam * (np.sum(model.Wc ** 2) + np.sum(model.Wr ** 2))


def loss(model: EmbeddingModel, E) -> float:
    E = _as_rows(model, E)
    if E.shape[0] == 0:
        raise ValueError("empty dataset")
    _, B = _forward(model, E)
    R = _residual(B, E).ravel()
    return float(0.5 * np.dot(R, R) / E.shape[0] + _penalty(model))


def _loss_and_gradients(model: EmbeddingModel, E) -> tuple[float, Gradients]:
    m = E.shape[0]
    A, B = _forward(model, E)
    R = _residual(B, E)
    flat = R.ravel()
    J = float(0.5 * np.dot(flat, flat) / m + _penalty(model))
    # output delta R * B * (1 - B) / m, built in place over B
    dZr = np.subtract(1.0, B, out=B)
    dZr *= 1.0 - dZr
    dZr *= R
    dZr *= 1.0 / m
    del R
    gWr = _mm(dZr.T, A) + model.lam * model.Wr
    gbr = dZr.sum(axis=0)
    dZc = _mm(dZr, model.Wr)
    dZc *= A * (1.0 - A)
    gWc = _mm(E.T, dZc).T + model.lam * model.Wc
    gbc = dZc.sum(axis=0)
    return J, Gradients(gWc, gbc, gWr, gbr)


def gradients(model: EmbeddingModel, E) -> Gradients:
    """Backpropagated gradient of :func:`loss` for every parameter block.

    Data terms are averaged over rows; only the weight matrices carry the
    ``lam * W`` regularisation term.
    """
    E = _as_rows(model, E)
    if E.shape[0] == 0:
        raise ValueError("empty dataset")
    return _loss_and_gradients(model, E)[1]


def _step(model: EmbeddingModel, g: Gradients, sigma: float) -> EmbeddingModel:
    return replace(model, Wc=model.Wc - sigma * g.Wc, bc=model.bc - sigma * g.bc,
                   Wr=model.Wr - sigma * g.Wr, br=model.br - sigma * g.br, loss_trace=())


def _finite(model: EmbeddingModel) -> bool:
    return all(np.all(np.isfinite(p)) for p in model.params().values())


def train(E, l: int, lam: float = DEFAULT_LAMBDA, cfg: TrainConfig = TrainConfig()) -> EmbeddingModel:
    """Fit a coding model to the rows of ``E`` by gradient descent.

    Each iteration applies ``theta <- theta - sigma * dJ/dtheta`` to all four
    parameter blocks. With the ``backtrack`` policy a step that would increase
    the loss is retried with ``sigma`` halved (the reduced rate carries over
    to later iterations), so the recorded trace never rises. Training stops
    after ``cfg.max_iters`` iterations or once the relative loss change falls
    below ``cfg.tol``.

    The returned model's ``loss_trace`` holds the loss before the first
    update followed by the loss after each iteration.
    """
    E = np.asarray(E, dtype=float)
    if E.ndim != 2 or len(E) == 0:
        raise ValueError("training needs a non-empty 2-D dataset")
    k = E.shape[1]
    if not 1 <= l < k:
        raise ValueError(f"code length l={l} must satisfy 1 <= l < k={k}")
    model = EmbeddingModel.random(k, l, lam, cfg.seed, cfg.init_scale)
    E = _maybe_sparse(E)
    sigma = cfg.sigma
    J, g = _loss_and_gradients(model, E)
    trace = [J]
    for it in range(1, cfg.max_iters + 1):
        while True:
            cand = _step(model, g, sigma)
            if not _finite(cand):
                if cfg.step_policy == "fixed":
                    raise DivergenceError(it, float("nan"))
                sigma /= 2.0
                continue
            # overflow here surfaces as a non-finite loss, handled below
            with np.errstate(over="ignore", invalid="ignore"):
                J_new, g_new = _loss_and_gradients(cand, E)
            if not math.isfinite(J_new) and cfg.step_policy == "fixed":
                raise DivergenceError(it, J_new)
            if cfg.step_policy == "fixed" or J_new <= J:
                break
            sigma /= 2.0
            if sigma < 1e-12 * cfg.sigma:
                # no descent step exists at this precision: a stationary point
                logger.debug("step size exhausted at iteration %d", it)
                return replace(model, loss_trace=tuple(trace))
        rel = abs(J - J_new) / max(abs(J), np.finfo(float).tiny)
        model, J, g = cand, J_new, g_new
        trace.append(J)
        if rel < cfg.tol:
            break
    logger.debug("trained %d iterations, final loss %.6g, sigma %.3g", len(trace) - 1, J, sigma)
    return replace(model, loss_trace=tuple(trace))


def default_code_length(k: int, l: int = 100) -> int:
    """Requested code length clamped below the input length."""
    return max(1, min(l, k - 1))


# --- model file -----------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def format_model(model: EmbeddingModel) -> str:
    lines = [MODEL_HEADER, f"{model.k} {model.l} {_fmt(model.lam)}"]
    for name in ("Wc", "bc", "Wr", "br"):
        arr = np.atleast_2d(getattr(model, name))
        lines.append(name)
        lines.extend(" ".join(_fmt(x) for x in row) for row in arr)
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> EmbeddingModel:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MODEL_HEADER:
        raise ValueError(f"not a model file (expected header {MODEL_HEADER!r})")
    k_s, l_s, lam_s = lines[1].split()
    k, l, lam = int(k_s), int(l_s), float(lam_s)
    shapes = {"Wc": (l, k), "bc": (1, l), "Wr": (k, l), "br": (1, k)}
    pos = 2
    out = {}
    for name, (rows, cols) in shapes.items():
        if lines[pos].strip() != name:
            raise ValueError(f"expected block {name!r} at line {pos + 1}")
        pos += 1
        arr = np.array([[float(x) for x in lines[pos + r].split()] for r in range(rows)])
        if arr.shape != (rows, cols):
            raise ValueError(f"block {name} has shape {arr.shape}, expected {(rows, cols)}")
        out[name] = arr if name.startswith("W") else arr.ravel()
        pos += rows
    return EmbeddingModel(out["Wc"], out["bc"], out["Wr"], out["br"], lam)


def write_model(model: EmbeddingModel, path: str | Path) -> None:
    Path(path).write_text(format_model(model), encoding="utf-8")


def read_model(path: str | Path) -> EmbeddingModel:
    return parse_model(Path(path).read_text(encoding="utf-8"))
