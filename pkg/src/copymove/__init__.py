"""Copy-move forgery analysis.

Given an image and the binary mask of a matched region pair, tell the pasted
region from its source by comparing the spread of boundary-band LBP
histograms across several radii. Also bundles a block-matching detector, a
ground-truthed forgery synthesizer and an evaluation harness.
"""

from .detector import DetectionResult, DetectorParams, detect
from .discriminator import (
    A_FORGED,
    ABSTAIN,
    B_FORGED,
    UNDECIDED,
    DiscriminatorConfig,
    LbpHistogram,
    RadiusDecision,
    Verdict,
    band_histogram,
    combine_votes,
    decide_radius,
    discriminate,
    discriminate_pair,
    hist_std,
)
from .errors import *  # noqa: F401,F403
from .lbp import LbpConfig, LbpMap, compute_lbp, lbp_shift_check
from .raster import (
    BinaryMask,
    GrayImage,
    RgbImage,
    decode_gray,
    decode_image,
    decode_mask,
    encode_image,
    encode_mask,
    encode_overlay,
    to_grayscale,
)
from .regions import BoundaryBand, Region, RegionPair, boundary_band, connected_components, morphology, select_pair
from .synth import Blend, ForgerySpec, GroundTruth, SpecDistribution, corpus, synthesize
from .evaluation import EvalConfig, EvalReport, evaluate, ingest

__version__ = "0.1.0"
