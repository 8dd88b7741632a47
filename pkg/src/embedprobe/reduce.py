"""Information-reduction transforms over whole embedding sets.

A reduction is named by a compact string::

    none            identity
    truncate:<b>    drop the b lowest bits of a 32-bit quantization
    sign            keep only the sign of each coordinate (+1 / -1)
    pca:<k>         project onto the top-k principal components
    standardize     per-dimension z-scoring

Several stages may be chained with commas and are applied left to right,
e.g. ``standardize,pca:50,sign``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingSet, standardize
from .errors import ReductionError

MAX_BITS = 31
_SCALE = float(2 ** 31 - 1)


@dataclass(frozen=True)
class ReductionSpec:
    kind: str  # "none" | "truncate" | "sign" | "pca" | "standardize"
    param: int | None = None

    def describe(self) -> str:
        return self.kind if self.param is None else f"{self.kind}:{self.param}"


def parse_spec(text: str) -> list[ReductionSpec]:
    """Parse a reduction pipeline string; raises ReductionError on any
    malformed stage, including out-of-range parameters."""
    stages = []
    for raw in text.split(","):
        token = raw.strip()
        if token in ("none", "sign", "standardize"):
            stages.append(ReductionSpec(token))
            continue
        if token.startswith("truncate:"):
            bits = _int_param(token, "truncate")
            if not 0 <= bits <= MAX_BITS:
                raise ReductionError(
                    f"truncate bits must be in [0, {MAX_BITS}], got {bits}")
            stages.append(ReductionSpec("truncate", bits))
            continue
        if token.startswith("pca:"):
            k = _int_param(token, "pca")
            if k < 1:
                raise ReductionError(f"pca component count must be >= 1, got {k}")
            stages.append(ReductionSpec("pca", k))
            continue
        raise ReductionError(f"unknown reduction stage {token!r}")
    return stages


def _int_param(token: str, kind: str) -> int:
    value = token[len(kind) + 1:]
    try:
        return int(value)
    except ValueError:
        raise ReductionError(
            f"{kind} parameter must be an integer, got {value!r}") from None


def describe(stages: list[ReductionSpec]) -> str:
    return ",".join(s.describe() for s in stages)


def truncate_bits(emb: EmbeddingSet, bits: int) -> EmbeddingSet:
    """Quantize to 31-bit integers, zero the low ``bits`` bits, rescale.

    All values are first scaled by the set's max absolute value into
    [-(2^31 - 1), 2^31 - 1] and floored to integers.  Dropping b bits is a
    further floor-division by 2^b, and the survivors are mapped affinely
    back into (-1, 1).  b=0 is near-lossless up to the global scale; b=31
    leaves only the sign, exactly +1 or -1 (with 0 counted positive).
    The map is monotone per coordinate.
    """
    if not 0 <= bits <= MAX_BITS:
        raise ReductionError(f"truncate bits must be in [0, {MAX_BITS}], got {bits}")
    scale = float(np.abs(emb.vectors).max())
    if scale == 0.0:
        raise ReductionError("cannot truncate an all-zero embedding set")
    ints = np.floor(emb.vectors / scale * _SCALE)
    kept = np.floor(ints / float(2 ** bits))
    levels = float(2 ** (MAX_BITS - bits))
    out = 2.0 * (kept + levels) / (2.0 * levels - 1.0) - 1.0
    return emb.replace_vectors(out)


def sign_binarize(emb: EmbeddingSet) -> EmbeddingSet:
    """+1 where the coordinate is >= 0, else -1."""
    return emb.replace_vectors(np.where(emb.vectors >= 0, 1.0, -1.0))


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray  # (dim,)
    components: np.ndarray  # (k, dim), orthonormal rows
    explained_variance: np.ndarray  # (k,), nonincreasing

    def __post_init__(self) -> None:
        for arr in (self.mean, self.components, self.explained_variance):
            arr.setflags(write=False)


def pca_fit(emb: EmbeddingSet, k: int) -> PcaModel:
    """Principal components of the mean-centered vectors.

    Works from the d x d covariance (population normalization, matching
    ``standardize``), so k may go all the way up to dim even when the set
    has fewer entries than dimensions; trailing components then span the
    null space with zero explained variance.  Each component's sign is
    fixed so its largest-magnitude coordinate is positive, making the
    basis deterministic.
    """
    n, dim = len(emb), emb.dim
    if n < 2:
        raise ReductionError("pca needs at least 2 entries")
    if not 1 <= k <= dim:
        raise ReductionError(f"pca component count must be in [1, {dim}], got {k}")
    mean = emb.vectors.mean(axis=0)
    centered = emb.vectors - mean
    cov = centered.T @ centered / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    components = eigvecs[:, order].T[:k].copy()
    for row in components:
        anchor = int(np.argmax(np.abs(row)))
        if row[anchor] < 0:
            row *= -1.0
    return PcaModel(
        mean=mean,
        components=components,
        explained_variance=eigvals[:k].copy(),
    )


def pca_transform(model: PcaModel, emb: EmbeddingSet) -> EmbeddingSet:
    """Project onto the model's components; output dim is k."""
    if emb.dim != model.mean.shape[0]:
        raise ReductionError(
            f"pca model expects dim {model.mean.shape[0]}, got {emb.dim}")
    return emb.replace_vectors((emb.vectors - model.mean) @ model.components.T)


def apply_pipeline(emb: EmbeddingSet, stages: list[ReductionSpec] | str) -> EmbeddingSet:
    """Apply a parsed or textual reduction pipeline left to right.

    The vocabulary is preserved; only the matrix (and possibly its width)
    changes.
    """
    if isinstance(stages, str):
        stages = parse_spec(stages)
    for stage in stages:
        if stage.kind == "none":
            continue
        elif stage.kind == "truncate":
            emb = truncate_bits(emb, stage.param)
        elif stage.kind == "sign":
            emb = sign_binarize(emb)
        elif stage.kind == "standardize":
            emb = standardize(emb)
        elif stage.kind == "pca":
            emb = pca_transform(pca_fit(emb, stage.param), emb)
        else:
            raise ReductionError(f"unknown reduction stage {stage.kind!r}")
    return emb
