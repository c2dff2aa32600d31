"""Чтение и запись сырых последовательностей YUV 4:2:0."""

import io
import os
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, List, Optional, Union

import numpy as np
import numpy.typing as npt


class TruncatedYuvError(ValueError):
    """Источник YUV закончился посреди кадра."""

    def __init__(self, frame_index: int, available: int, expected: int):
        self.frame_index = frame_index
        self.available = available
        self.expected = expected
        super().__init__(
            f"Поток YUV обрезан на кадре {frame_index}: "
            f"получено {available} из {expected} байт (truncated at frame {frame_index})"
        )


@dataclass(eq=False)
class FrameBuffer:
    """Один кадр 4:2:0: яркость и две цветоразностные плоскости.

    width/height - размеры после дополнения до кратного CTU,
    source_width/source_height - исходные размеры для обрезки при записи.
    """
    y_plane: npt.NDArray[np.uint8]
    cb_plane: npt.NDArray[np.uint8]
    cr_plane: npt.NDArray[np.uint8]
    frame_index: int = 0
    bit_depth: int = 8
    source_width: int = 0
    source_height: int = 0
    frame_type: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.bit_depth != 8:
            raise ValueError(f"Поддерживается только 8 бит, получено: {self.bit_depth}")
        height, width = self.y_plane.shape
        if self.cb_plane.shape != (height // 2, width // 2) or \
                self.cr_plane.shape != (height // 2, width // 2):
            raise ValueError("Размеры цветоразностных плоскостей не соответствуют 4:2:0")
        if not self.source_width:
            self.source_width = width
        if not self.source_height:
            self.source_height = height

    @property
    def width(self) -> int:
        return self.y_plane.shape[1]

    @property
    def height(self) -> int:
        return self.y_plane.shape[0]

    @property
    def planes(self) -> List[npt.NDArray[np.uint8]]:
        return [self.y_plane, self.cb_plane, self.cr_plane]

    def cropped_planes(self) -> List[npt.NDArray[np.uint8]]:
        """Плоскости, обрезанные до исходных размеров."""
        w, h = self.source_width, self.source_height
        return [
            self.y_plane[:h, :w],
            self.cb_plane[:h // 2, :w // 2],
            self.cr_plane[:h // 2, :w // 2],
        ]

    def cropped_luma(self) -> npt.NDArray[np.uint8]:
        return self.y_plane[:self.source_height, :self.source_width]

    def padded_to(self, ctu_size: int) -> 'FrameBuffer':
        """Кадр, дополненный повтором краев до кратного ctu_size."""
        pad_w = padded_size(self.width, ctu_size) - self.width
        pad_h = padded_size(self.height, ctu_size) - self.height
        if not pad_w and not pad_h:
            return self
        return FrameBuffer(
            y_plane=np.pad(self.y_plane, ((0, pad_h), (0, pad_w)), mode='edge'),
            cb_plane=np.pad(self.cb_plane, ((0, pad_h // 2), (0, pad_w // 2)), mode='edge'),
            cr_plane=np.pad(self.cr_plane, ((0, pad_h // 2), (0, pad_w // 2)), mode='edge'),
            frame_index=self.frame_index,
            source_width=self.source_width,
            source_height=self.source_height,
            frame_type=self.frame_type,
        )

    @classmethod
    def blank(cls, width: int, height: int, frame_index: int = 0,
              source_width: int = 0, source_height: int = 0) -> 'FrameBuffer':
        """Пустой кадр, заполненный нулями."""
        return cls(
            y_plane=np.zeros((height, width), dtype=np.uint8),
            cb_plane=np.zeros((height // 2, width // 2), dtype=np.uint8),
            cr_plane=np.zeros((height // 2, width // 2), dtype=np.uint8),
            frame_index=frame_index,
            source_width=source_width or width,
            source_height=source_height or height,
        )


def padded_size(size: int, ctu_size: int) -> int:
    """Размер, дополненный до кратного ctu_size."""
    return ((size + ctu_size - 1) // ctu_size) * ctu_size


class YuvIO:
    """Чтение/запись планарного 8-битного YUV 4:2:0 без заголовка."""

    @classmethod
    def frame_bytes(cls, width: int, height: int) -> int:
        """Размер одного кадра в байтах."""
        return width * height * 3 // 2

    @classmethod
    def read_yuv(cls, source: Union[bytes, BinaryIO], width: int, height: int,
                 max_frames: Optional[int] = None, ctu_size: int = 32) -> List[FrameBuffer]:
        """Читает кадры из байтового потока.

        Args:
            source: Байты или бинарный поток
            width: Ширина кадра в пикселях (четная)
            height: Высота кадра в пикселях (четная)
            max_frames: Число кадров; None - все полные кадры источника
            ctu_size: Кадры дополняются повтором краев до кратного ctu_size

        Returns:
            List[FrameBuffer]: Дополненные кадры с сохраненными исходными размерами

        Raises:
            ValueError: Нечетные или неположительные размеры
            TruncatedYuvError: Данных меньше, чем max_frames кадров
        """
        if width <= 0 or height <= 0:
            raise ValueError(f"Размеры должны быть положительными: {width}x{height}")
        if width % 2 or height % 2:
            raise ValueError(f"Размеры 4:2:0 должны быть четными: {width}x{height}")

        stream = io.BytesIO(source) if isinstance(source, (bytes, bytearray)) else source
        frame_size = cls.frame_bytes(width, height)

        frames = []
        index = 0
        while max_frames is None or index < max_frames:
            data = stream.read(frame_size)
            if not data and max_frames is None:
                break
            if len(data) < frame_size:
                raise TruncatedYuvError(index, len(data), frame_size)
            frames.append(cls._unpack_frame(data, width, height, index, ctu_size))
            index += 1

        return frames

    @classmethod
    def _unpack_frame(cls, data: bytes, width: int, height: int,
                      index: int, ctu_size: int) -> FrameBuffer:
        """Разбирает один кадр и дополняет его до кратного CTU."""
        samples = np.frombuffer(data, dtype=np.uint8)
        luma_size = width * height
        chroma_size = luma_size // 4

        y = samples[:luma_size].reshape(height, width)
        cb = samples[luma_size:luma_size + chroma_size].reshape(height // 2, width // 2)
        cr = samples[luma_size + chroma_size:].reshape(height // 2, width // 2)

        frame = FrameBuffer(y_plane=y.copy(), cb_plane=cb.copy(), cr_plane=cr.copy(),
                            frame_index=index, source_width=width, source_height=height)
        return frame.padded_to(ctu_size)

    @classmethod
    def write_yuv(cls, frames: Iterable[FrameBuffer], sink: BinaryIO) -> int:
        """Записывает кадры, обрезанные до исходных размеров.

        Returns:
            int: Число записанных байт

        Raises:
            ValueError: Кадры разных размеров
        """
        frames = list(frames)
        if not frames:
            return 0

        first = frames[0]
        written = 0
        for frame in frames:
            if (frame.source_width, frame.source_height, frame.bit_depth) != \
                    (first.source_width, first.source_height, first.bit_depth):
                raise ValueError(
                    f"Кадр {frame.frame_index} имеет размер "
                    f"{frame.source_width}x{frame.source_height}, ожидается "
                    f"{first.source_width}x{first.source_height}"
                )
            for plane in frame.cropped_planes():
                data = np.ascontiguousarray(plane, dtype=np.uint8).tobytes()
                sink.write(data)
                written += len(data)

        return written

    @classmethod
    def load(cls, input_path: str, width: int, height: int,
             max_frames: Optional[int] = None, ctu_size: int = 32) -> List[FrameBuffer]:
        """Загружает файл .yuv."""
        if not os.path.exists(input_path):
            raise FileNotFoundError(f"Файл не найден: {input_path}")
        with open(input_path, 'rb') as f:
            return cls.read_yuv(f, width, height, max_frames, ctu_size)

    @classmethod
    def save(cls, frames: Iterable[FrameBuffer], output_path: str) -> int:
        """Сохраняет кадры в файл .yuv."""
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(output_path, 'wb') as f:
            return cls.write_yuv(frames, f)


# Алиасы для обратной совместимости
read_yuv = YuvIO.read_yuv
write_yuv = YuvIO.write_yuv
