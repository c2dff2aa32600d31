"""Контейнер .sevc: заголовок потока и записи кадров (little-endian)."""

import enum
import struct
from dataclasses import dataclass, field
from typing import List

MAGIC = b'SEVC'
VERSION = 1
HEADER_FORMAT = '<4sBHHBBBBBQI'
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)
FRAME_HEADER_FORMAT = '<BI'
FRAME_HEADER_SIZE = struct.calcsize(FRAME_HEADER_FORMAT)
SUPPORTED_CTU_SIZES = (8, 16, 32, 64, 128)


class ContainerFormatError(ValueError):
    """Поврежденный или неподдерживаемый контейнер."""


class FrameType(enum.IntEnum):
    I = 0
    P = 1


@dataclass
class StreamHeader:
    """Поля заголовка; ключ в потоке не хранится."""
    width: int
    height: int
    qp: int
    gop_size: int
    ctu_size: int
    enc_flags: int = 0
    nonce: int = 0
    frame_count: int = 0
    bit_depth: int = 8
    version: int = VERSION


@dataclass
class FrameRecord:
    frame_type: FrameType
    payload: bytes

    @property
    def payload_bits(self) -> int:
        return len(self.payload) * 8


@dataclass
class Container:
    header: StreamHeader
    frames: List[FrameRecord] = field(default_factory=list)

    @property
    def payload_bits(self) -> int:
        """Суммарный размер полезных нагрузок кадров в битах."""
        return sum(frame.payload_bits for frame in self.frames)

    def to_bytes(self) -> bytes:
        """Сериализует заголовок и кадры."""
        h = self.header
        try:
            parts = [struct.pack(
                HEADER_FORMAT, MAGIC, h.version, h.width, h.height, h.bit_depth, h.qp,
                h.gop_size, h.ctu_size, h.enc_flags, h.nonce, len(self.frames),
            )]
        except struct.error as e:
            raise ValueError(f"Поле заголовка вне допустимого диапазона: {e}") from e
        for frame in self.frames:
            parts.append(struct.pack(FRAME_HEADER_FORMAT, int(frame.frame_type), len(frame.payload)))
            parts.append(frame.payload)
        return b''.join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Container':
        """Разбирает контейнер.

        Raises:
            ContainerFormatError: Неверная сигнатура, версия, поля или обрезанные данные
        """
        if len(data) < HEADER_SIZE:
            raise ContainerFormatError(
                f"Заголовок обрезан: {len(data)} байт из {HEADER_SIZE}"
            )
        (magic, version, width, height, bit_depth, qp, gop_size, ctu_size,
         enc_flags, nonce, frame_count) = struct.unpack_from(HEADER_FORMAT, data)

        if magic != MAGIC:
            raise ContainerFormatError(f"Неверная сигнатура: {magic!r}")
        if version != VERSION:
            raise ContainerFormatError(f"Неподдерживаемая версия контейнера: {version}")
        if bit_depth != 8:
            raise ContainerFormatError(f"Неподдерживаемая битовая глубина: {bit_depth}")
        if ctu_size not in SUPPORTED_CTU_SIZES:
            raise ContainerFormatError(f"Неподдерживаемый размер CTU: {ctu_size}")
        if width == 0 or height == 0 or width % 2 or height % 2:
            raise ContainerFormatError(f"Недопустимые размеры кадра: {width}x{height}")
        if qp > 51 or gop_size == 0:
            raise ContainerFormatError(f"Недопустимые qp/gop: {qp}/{gop_size}")
        if enc_flags & ~0x0F:
            raise ContainerFormatError(f"Неизвестные биты enc_flags: {enc_flags:#04x}")

        header = StreamHeader(width=width, height=height, qp=qp, gop_size=gop_size,
                              ctu_size=ctu_size, enc_flags=enc_flags, nonce=nonce,
                              frame_count=frame_count, bit_depth=bit_depth, version=version)

        frames = []
        offset = HEADER_SIZE
        for index in range(frame_count):
            if offset + FRAME_HEADER_SIZE > len(data):
                raise ContainerFormatError(f"Запись кадра {index} обрезана")
            frame_type, length = struct.unpack_from(FRAME_HEADER_FORMAT, data, offset)
            offset += FRAME_HEADER_SIZE
            if frame_type not in (FrameType.I, FrameType.P):
                raise ContainerFormatError(f"Неизвестный тип кадра {frame_type} в кадре {index}")
            if offset + length > len(data):
                raise ContainerFormatError(
                    f"Полезная нагрузка кадра {index} обрезана: "
                    f"{len(data) - offset} байт из {length}"
                )
            frames.append(FrameRecord(FrameType(frame_type), bytes(data[offset:offset + length])))
            offset += length

        if offset != len(data):
            raise ContainerFormatError(f"Лишние {len(data) - offset} байт после последнего кадра")

        return cls(header=header, frames=frames)


# Функции для обратной совместимости
def write_container(container: Container) -> bytes:
    return container.to_bytes()


read_container = Container.from_bytes
