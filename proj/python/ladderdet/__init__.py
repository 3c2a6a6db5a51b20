"""Iterative detection of chained repetitive structures.

The heavy lifting lives in the C++ extension module; this package re-exports
its public surface.
"""

from ladderdet._core import (  # noqa: F401
    AugmentConfig,
    ChainAnnotation,
    ChainSpec,
    ChainSpecRanges,
    Frame,
    GrayImage,
    LadderConfig,
    LadderState,
    NetConfig,
    PatchTransform,
    Point2,
    Predictor,
    Quad,
    Rect,
    TrainExample,
    __version__,
    centroid,
    crop_pad,
    expand_rect,
    flip_horizontal,
    gaussian_blur,
    generate_chain,
    load_annotation,
    load_image,
    load_predictor,
    make_example,
    make_transform,
    match_and_report,
    normalize_minmax,
    oracle_predictor,
    point_in_quad,
    quad_dice,
    render_overlay,
    resize_bicubic,
    run_ladder,
    sample_spec,
    save_annotation,
    save_png8,
    save_png16,
    tight_rect,
    to_image,
    to_patch,
    train_on_images,
)
