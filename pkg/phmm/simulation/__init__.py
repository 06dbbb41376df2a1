from .generate import GroundTruth, generate, simulate
from .missing import apply_blockwise_missing, apply_random_missing, block_length
