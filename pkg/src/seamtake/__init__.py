"""seamtake: compositing two takes of a scene by motion-compensated
spatiotemporal seam cuts, with alignment, blur and color equalization."""

from .align import (
    AlignmentTrack,
    BlockMatch,
    MatchParams,
    RansacParams,
    align_videos,
    compass_search,
    estimate_temporal,
    fit_frame_alignment,
    fit_homography_ransac,
    hierarchical_match,
    propagate_alignment,
    realign_band,
)
from .appearance import (
    BlurKernel,
    ColorLUT,
    apply_color_lut,
    blurriness,
    box_blur,
    build_color_lut,
    estimate_blur_kernel,
    match_blur,
)
from .composite import alpha_blend, assemble_output, greedy_crop, seam_distance
from .pipeline import Project, StageEngine, load_project, save_project
from .seamcut import (
    LABEL_A,
    LABEL_B,
    SeamParams,
    StrokeSet,
    apply_keyframes,
    build_graph,
    coarse_to_fine_cut,
    grow_band,
    labeling_energy,
    min_cut,
    upsample_labels,
)
from .video import (
    VideoClip,
    difference_volume,
    downsample2,
    downsample2_temporal,
    load_frame_sequence,
    save_frame_sequence,
    warp_frame,
)

__version__ = "0.1.0"
