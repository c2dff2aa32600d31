import os
import sys

import pytest

# Добавляем src в путь для импорта
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../src'))

from selective_video_codec.generators.synthetic_clip_generator import SyntheticClipGenerator  # noqa: E402


@pytest.fixture(scope='session')
def clip_generator():
    """Генератор небольших клипов 64x64 по 5 кадров"""
    return SyntheticClipGenerator(width=64, height=64, frames=5, seed=7)


@pytest.fixture(scope='session')
def gradient_clip(clip_generator):
    return clip_generator.generate('gradient_box')


@pytest.fixture(scope='session')
def checker_clip(clip_generator):
    return clip_generator.generate('checkerboard_pan')


@pytest.fixture(scope='session')
def noise_clip(clip_generator):
    return clip_generator.generate('noise')


@pytest.fixture(scope='session')
def flat_clip(clip_generator):
    return clip_generator.generate('flat')
