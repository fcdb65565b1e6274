"""Binary sampling from discrete distributions, with inverse-transform baselines."""

__version__ = "0.1.0"

from .bs_sampler import BsSampler, bbs, bbs_explicit, bs_stream
from .model import BitPath, RngStream, WeightTable, decode, depth_for, encode, load_weights
from .pairwise_tree import PairwiseTree, branch_prob, build, leaf_prob_product

__all__ = [
    "BitPath",
    "BsSampler",
    "PairwiseTree",
    "RngStream",
    "WeightTable",
    "bbs",
    "bbs_explicit",
    "branch_prob",
    "bs_stream",
    "build",
    "decode",
    "depth_for",
    "encode",
    "leaf_prob_product",
    "load_weights",
]
