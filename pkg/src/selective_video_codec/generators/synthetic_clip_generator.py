# generators/synthetic_clip_generator.py
import os
from typing import List

import cv2
import numpy as np

from ..core.frame_io import FrameBuffer, YuvIO


class SyntheticClipGenerator:
    """Генератор воспроизводимых тестовых клипов YUV 4:2:0"""

    KINDS = ('gradient_box', 'checkerboard_pan', 'noise', 'flat')

    def __init__(self, width: int = 64, height: int = 64, frames: int = 17, seed: int = 0):
        if width % 2 or height % 2 or width <= 0 or height <= 0:
            raise ValueError(f"Размеры клипа должны быть положительными и четными: {width}x{height}")
        self.width = width
        self.height = height
        self.frames = frames
        self.seed = seed
        self.box_size = max(8, min(width, height) // 4)
        self.square_size = 8

    def _rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def _chroma(self, luma: np.ndarray, offset: int) -> np.ndarray:
        """Цветоразностная плоскость из уменьшенной яркости"""
        small = cv2.resize(luma, (self.width // 2, self.height // 2), interpolation=cv2.INTER_AREA)
        return np.clip(128 + (small.astype(np.int32) - 128) // 4 + offset, 0, 255).astype(np.uint8)

    def _frame(self, luma: np.ndarray, index: int) -> FrameBuffer:
        return FrameBuffer(
            y_plane=luma,
            cb_plane=self._chroma(luma, 6),
            cr_plane=self._chroma(255 - luma, -6),
            frame_index=index,
        )

    def gradient_box(self) -> List[FrameBuffer]:
        """Градиент с текстурой и движущимся ярким прямоугольником"""
        xs = np.linspace(40, 200, self.width)[None, :]
        ys = np.linspace(0, 30, self.height)[:, None]
        texture = self._rng(1).integers(-12, 13, size=(self.height, self.width))
        background = np.clip(xs + ys + texture, 0, 255).astype(np.uint8)

        frames = []
        for index in range(self.frames):
            luma = background.copy()
            x = (4 + 2 * index) % max(1, self.width - self.box_size)
            y = (4 + index) % max(1, self.height - self.box_size)
            cv2.rectangle(luma, (x, y), (x + self.box_size - 1, y + self.box_size - 1), 235, -1)
            cv2.line(luma, (x, y), (x + self.box_size - 1, y + self.box_size - 1), 20, 1)
            frames.append(self._frame(luma, index))
        return frames

    def checkerboard_pan(self) -> List[FrameBuffer]:
        """Шахматная доска, сдвигающаяся на 1 пиксель вправо за кадр"""
        span = self.width + self.frames
        cells = (np.arange(span)[None, :] // self.square_size +
                 np.arange(self.height)[:, None] // self.square_size) % 2
        board = np.where(cells == 1, 200, 50).astype(np.uint8)

        frames = []
        for index in range(self.frames):
            start = self.frames - index
            luma = np.ascontiguousarray(board[:, start:start + self.width])
            frames.append(self._frame(luma, index))
        return frames

    def noise(self) -> List[FrameBuffer]:
        """Независимый равномерный шум в каждом кадре"""
        rng = self._rng(3)
        return [
            self._frame(rng.integers(0, 256, size=(self.height, self.width), dtype=np.uint8), index)
            for index in range(self.frames)
        ]

    def flat(self) -> List[FrameBuffer]:
        """Постоянный средний уровень"""
        return [
            self._frame(np.full((self.height, self.width), 128, dtype=np.uint8), index)
            for index in range(self.frames)
        ]

    def generate(self, kind: str) -> List[FrameBuffer]:
        """Клип заданного вида"""
        if kind not in self.KINDS:
            raise ValueError(f"Неизвестный вид клипа: {kind} (допустимо: {', '.join(self.KINDS)})")
        return getattr(self, kind)()

    def save_clip(self, kind: str, output_path: str) -> str:
        """Сохраняет клип в файл .yuv"""
        YuvIO.save(self.generate(kind), output_path)
        print(f"[OK] Клип создан ({kind}, {self.width}x{self.height}, {self.frames} кадров): "
              f"{output_path}")
        return output_path

    def save_all(self, output_dir: str) -> List[str]:
        os.makedirs(output_dir, exist_ok=True)
        return [
            self.save_clip(kind, os.path.join(output_dir, f"{kind}_{self.width}x{self.height}.yuv"))
            for kind in self.KINDS
        ]
