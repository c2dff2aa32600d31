"""Selective Video Codec"""

__version__ = "0.1.0"

from .core.frame_io import read_yuv, write_yuv
from .core.pipeline import decode, encode, recount_encryption_space
from .core.quality_metrics import edr, psnr, ssim
from .core.selective_crypto import ranged_xor

__all__ = [
    'read_yuv',
    'write_yuv',
    'encode',
    'decode',
    'recount_encryption_space',
    'psnr',
    'ssim',
    'edr',
    'ranged_xor',
]

try:
    from .generators.synthetic_clip_generator import SyntheticClipGenerator
    __all__.extend(['SyntheticClipGenerator'])
except ImportError:
    pass
