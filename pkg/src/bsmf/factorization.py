"""Belief-structured matrix factorization ``X ≈ U B Mᵀ`` and its baselines.

Three modes share one solver:

* ``bsmf`` -- ``B`` is a fixed, known belief mixture matrix;
* ``nmf``  -- ``B`` is the identity (standard two-factor NMF);
* ``nmtf`` -- ``B`` is replaced by a learnable non-negative ``B̃``.

The objective is the squared Frobenius reconstruction error plus L2 and L1
penalties on ``U`` and ``M``.  Each iteration takes a projected gradient step
on ``U``, then ``M`` (then ``B̃``), flooring every entry at ``eps_clip``.
The step is either a constant ``eta`` or the element-wise multiplicative
step that turns the update into a Lee-Seung style rule.
"""

import enum
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from .belief import BeliefMixture
from .errors import ModeError, OptimizerError, ShapeError, ValidationError
from .linalg import clip_floor, frobenius_sq, l1_norm

MULTIPLICATIVE = "mult"

_TINY = np.finfo(np.float64).tiny


class Mode(str, enum.Enum):
    BSMF = "bsmf"
    NMF = "nmf"
    NMTF = "nmtf"


@dataclass(frozen=True)
class FitConfig:
    k: int = 4
    mode: Mode = Mode.BSMF
    lambda1: float = 0.1
    lambda2: float = 0.1
    eta: object = 1e-3
    eps_clip: float = 1e-8
    eps_rbf: float = 1.0
    cutoff: float = 0.2
    max_iters: int = 300
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.k < 1:
            raise ValidationError("k must be at least 1")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValidationError("regularization weights must be non-negative")
        if isinstance(self.eta, str):
            if self.eta != MULTIPLICATIVE:
                raise ValidationError(f"eta must be a positive float or {MULTIPLICATIVE!r}")
            if self.lambda2 != 0:
                raise ValidationError("multiplicative steps require lambda2 == 0")
        elif not self.eta > 0:
            raise ValidationError("eta must be positive")
        if not self.eps_clip > 0:
            raise ValidationError("eps_clip must be positive")
        if not self.eps_rbf > 0:
            raise ValidationError("eps_rbf must be positive")
        if not 0 <= self.cutoff < 1:
            raise ValidationError("cutoff must lie in [0, 1)")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")

    @property
    def multiplicative(self):
        return self.eta == MULTIPLICATIVE

    def to_dict(self):
        d = asdict(self)
        d["mode"] = self.mode.value
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class FactorPair:
    u: np.ndarray
    m: np.ndarray
    b_tilde: np.ndarray = None


@dataclass(frozen=True)
class FitResult:
    factors: FactorPair
    loss_trace: tuple
    iterations_run: int
    converged: bool
    config: FitConfig = field(default=None)


def mixture(f, b, cfg):
    """The middle matrix actually used by ``cfg.mode``."""
    if cfg.mode is Mode.NMTF:
        if f.b_tilde is None:
            raise ModeError("nmtf mode needs a learnable b_tilde in the factors")
        return f.b_tilde
    if cfg.mode is Mode.NMF:
        return np.eye(cfg.k)
    if b is None:
        raise ValidationError("bsmf mode needs a belief mixture")
    return b.b if isinstance(b, BeliefMixture) else np.asarray(b, dtype=np.float64)


def _check_shapes(x, f, bm):
    k = bm.shape[0]
    if bm.shape != (k, k):
        raise ShapeError(f"mixture matrix must be square, got {bm.shape}")
    if f.u.ndim != 2 or f.m.ndim != 2 or f.u.shape[1] != k or f.m.shape[1] != k:
        raise ShapeError(f"factor widths {f.u.shape}, {f.m.shape} do not match K={k}")
    if x.shape != (f.u.shape[0], f.m.shape[0]):
        raise ShapeError(f"data {x.shape} does not match factors {f.u.shape[0]}x{f.m.shape[0]}")


# Above this many cells the residual is expanded into traces instead of formed.
_EXPAND_LIMIT = 250_000


def _residual_sq(x, u, bm, m, xm=None, xsq=None):
    ub = u @ bm
    if sp.issparse(x) or x.size > _EXPAND_LIMIT:
        # ||X||² - 2 tr(Mᵀ Xᵀ U B) + tr(Bᵀ Uᵀ U B Mᵀ M), no dense S x C product
        if xm is None:
            xm = np.asarray(x @ m)
        if xsq is None:
            xsq = frobenius_sq(x)
        cross = float(np.sum(xm * ub))
        recon = float(np.sum((ub.T @ ub) * (m.T @ m)))
        return max(xsq - 2.0 * cross + recon, 0.0)
    return frobenius_sq(x - ub @ m.T)


def _penalty(f, cfg):
    j = cfg.lambda1 * (frobenius_sq(f.u) + frobenius_sq(f.m))
    return j + cfg.lambda2 * (l1_norm(f.u) + l1_norm(f.m))


def loss(x, f, b, cfg):
    """Regularized objective ``J``.

    ``||X - U B Mᵀ||²_F + λ1(||U||²_F + ||M||²_F) + λ2(||U||₁ + ||M||₁)``
    """
    bm = mixture(f, b, cfg)
    _check_shapes(x, f, bm)
    return float(_residual_sq(x, f.u, bm, f.m) + _penalty(f, cfg))


def grad_u(x, f, b, cfg):
    """``-2 X M Bᵀ + 2 U B Mᵀ M Bᵀ + 2λ1 U + λ2``."""
    bm = mixture(f, b, cfg)
    _check_shapes(x, f, bm)
    mbt = f.m @ bm.T
    g = -2.0 * np.asarray(x @ mbt) + 2.0 * f.u @ (mbt.T @ mbt)
    return g + 2.0 * cfg.lambda1 * f.u + cfg.lambda2


def grad_m(x, f, b, cfg):
    """``-2 Xᵀ U B + 2 M Bᵀ Uᵀ U B + 2λ1 M + λ2``."""
    bm = mixture(f, b, cfg)
    _check_shapes(x, f, bm)
    ub = f.u @ bm
    g = -2.0 * np.asarray(x.T @ ub) + 2.0 * f.m @ (ub.T @ ub)
    return g + 2.0 * cfg.lambda1 * f.m + cfg.lambda2


def grad_b_tilde(x, f, cfg):
    """``-2 Uᵀ X M + 2 Uᵀ U B̃ Mᵀ M``; only defined in nmtf mode."""
    if cfg.mode is not Mode.NMTF:
        raise ModeError(f"b_tilde gradient is only defined in nmtf mode, not {cfg.mode.value}")
    bm = mixture(f, None, cfg)
    _check_shapes(x, f, bm)
    utxm = f.u.T @ np.asarray(x @ f.m)
    return -2.0 * utxm + 2.0 * (f.u.T @ f.u) @ bm @ (f.m.T @ f.m)


def multiplicative_steps(f, b, x=None):
    """Element-wise step sizes ``½U/(UBMᵀMBᵀ)`` and ``½M/(MBᵀUᵀUB)``.

    With no regularization, ``U - step_u * grad_u`` equals the multiplicative
    rule ``U * (X M Bᵀ) / (U B Mᵀ M Bᵀ)``.  ``x`` is accepted for symmetry with
    the gradient functions; the steps do not depend on it.
    """
    bm = b.b if isinstance(b, BeliefMixture) else np.asarray(b, dtype=np.float64)
    mbt = f.m @ bm.T
    ub = f.u @ bm
    step_u = 0.5 * f.u / np.maximum(f.u @ (mbt.T @ mbt), _TINY)
    step_m = 0.5 * f.m / np.maximum(f.m @ (ub.T @ ub), _TINY)
    return step_u, step_m


def initialize(shape_s, shape_c, cfg):
    """Uniform random factors drawn from ``cfg.seed`` (U, then M, then B̃)."""
    rng = np.random.default_rng(cfg.seed)
    u = rng.uniform(size=(shape_s, cfg.k))
    m = rng.uniform(size=(shape_c, cfg.k))
    bt = rng.uniform(size=(cfg.k, cfg.k)) if cfg.mode is Mode.NMTF else None
    u = clip_floor(u, cfg.eps_clip)
    m = clip_floor(m, cfg.eps_clip)
    if bt is not None:
        bt = clip_floor(bt, cfg.eps_clip)
    return FactorPair(u, m, bt)


class _Cache:
    """Per-fit constants: the data, its transpose and its squared norm."""

    def __init__(self, x):
        self.x = x
        if sp.issparse(x):
            self.xt = sp.csr_array(x.T)
        else:
            self.xt = np.ascontiguousarray(x.T)
        self.xsq = frobenius_sq(x)

    def loss(self, f, bm, cfg, xm):
        return float(_residual_sq(self.x, f.u, bm, f.m, xm, self.xsq) + _penalty(f, cfg))


def fit(x, b, cfg, init=None):
    """Factorize ``x`` under ``cfg``.

    Parameters
    ----------
    x : ndarray or sparse, shape (n_sources, n_claims)
        Estimated endorsement matrix with entries in ``[0, 1]``.
    b : BeliefMixture or None
        Required in ``bsmf`` mode, ignored otherwise.
    cfg : FitConfig
    init : FactorPair, optional
        Starting factors; drawn from ``cfg.seed`` when omitted.

    Raises
    ------
    OptimizerError
        If the loss stops being finite.
    """
    if not sp.issparse(x):
        x = np.asarray(x, dtype=np.float64)
    if cfg.mode is Mode.BSMF:
        if b is None:
            raise ValidationError("bsmf mode needs a belief mixture")
        if b.k != cfg.k:
            raise ValidationError(f"belief mixture has k={b.k} but config has k={cfg.k}")
    data = x.data if sp.issparse(x) else x
    if data.size and (data.min() < 0 or data.max() > 1 or not np.all(np.isfinite(data))):
        raise ValidationError("input entries must lie in [0, 1]")

    f = init if init is not None else initialize(x.shape[0], x.shape[1], cfg)
    f = FactorPair(f.u.copy(), f.m.copy(), None if f.b_tilde is None else f.b_tilde.copy())
    nmtf = cfg.mode is Mode.NMTF
    if nmtf and f.b_tilde is None:
        raise ModeError("nmtf mode needs a learnable b_tilde in the factors")
    bm = f.b_tilde if nmtf else mixture(f, b, cfg)
    _check_shapes(x, f, bm)

    c = _Cache(x)
    lam1, lam2 = cfg.lambda1, cfg.lambda2
    xm = np.asarray(x @ f.m)
    prev = c.loss(f, bm, cfg, xm)
    trace = []
    converged = False
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, cfg.max_iters + 1):
            # U step: X M Bᵀ reuses the X M product from the last loss evaluation
            mbt = f.m @ bm.T
            den = f.u @ (mbt.T @ mbt)
            g = -2.0 * (xm @ bm.T) + 2.0 * den + 2.0 * lam1 * f.u + lam2
            step = 0.5 * f.u / np.maximum(den, _TINY) if cfg.multiplicative else cfg.eta
            f.u = clip_floor(f.u - step * g, cfg.eps_clip)

            ub = f.u @ bm
            den = f.m @ (ub.T @ ub)
            g = -2.0 * np.asarray(c.xt @ ub) + 2.0 * den + 2.0 * lam1 * f.m + lam2
            step = 0.5 * f.m / np.maximum(den, _TINY) if cfg.multiplicative else cfg.eta
            f.m = clip_floor(f.m - step * g, cfg.eps_clip)
            xm = np.asarray(x @ f.m)

            if nmtf:
                utu, mtm = f.u.T @ f.u, f.m.T @ f.m
                den = utu @ f.b_tilde @ mtm
                g = -2.0 * (f.u.T @ xm) + 2.0 * den
                step = 0.5 * f.b_tilde / np.maximum(den, _TINY) if cfg.multiplicative else cfg.eta
                f.b_tilde = clip_floor(f.b_tilde - step * g, cfg.eps_clip)
                bm = f.b_tilde

            cur = c.loss(f, bm, cfg, xm)
            if not np.isfinite(cur):
                raise OptimizerError(it, cur)
            trace.append(cur)
            if abs(prev - cur) / max(prev, 1e-12) < cfg.tol:
                converged = True
                break
            prev = cur

    return FitResult(f, tuple(trace), len(trace), converged, cfg)
