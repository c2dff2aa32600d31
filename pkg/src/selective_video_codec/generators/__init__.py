"""Генераторы тестовых клипов"""

from .synthetic_clip_generator import SyntheticClipGenerator

__all__ = ['SyntheticClipGenerator']
