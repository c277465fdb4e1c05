from ._pwa import (
    PairedModel,
    exact_wasserstein,
    gaussian_w2_squared,
    left_half_mask,
    load_checkpoint,
    load_idx_images,
    make_denoising_pairs,
    make_inpainting_pairs,
    mmd,
    sample_prior,
    save_checkpoint,
    sinkhorn_divergence,
    sliced_wasserstein,
    train,
)

__all__ = [
    "PairedModel",
    "exact_wasserstein",
    "gaussian_w2_squared",
    "left_half_mask",
    "load_checkpoint",
    "load_idx_images",
    "make_denoising_pairs",
    "make_inpainting_pairs",
    "mmd",
    "sample_prior",
    "save_checkpoint",
    "sinkhorn_divergence",
    "sliced_wasserstein",
    "train",
]
