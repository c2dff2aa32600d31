"""Двоичный арифметический кодер (регулярные и bypass-бины) и бинаризации."""

import enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

# Параметры 32-битного кодера диапазона
RANGE_TOP = 1 << 24
RANGE_INIT = 0xFFFFFFFF
FLUSH_BYTES = 5

# Вероятность P(bin=1) хранится в единицах 1/2^15
PROB_BITS = 15
PROB_ONE = 1 << PROB_BITS
PROB_INIT = PROB_ONE >> 1
ADAPT_SHIFT = 5
PROB_MARGIN = 64


class BinarizationError(ValueError):
    """Значение вне области определения бинаризации."""


class TruncatedStreamError(ValueError):
    """Декодер дочитал полезную нагрузку до конца."""


class Context(enum.Enum):
    """Контексты регулярных бинов."""
    SPLIT_FLAG = 0
    IS_MPM = 1
    PRED_MODE = 2
    MVD_GR0 = 3
    MVD_GR1 = 4
    SIG_FLAG = 5
    CBF = 6


class ContextState:
    """Адаптивные оценки вероятности по контекстам."""

    def __init__(self):
        self._probabilities: Dict[Context, int] = {}

    def probability(self, context: Context) -> int:
        """Текущая оценка P(bin=1) в единицах 1/2^15."""
        return self._probabilities.get(context, PROB_INIT)

    def split_probability(self, context: Context) -> int:
        """Оценка, ограниченная так, чтобы оба подынтервала были непустыми."""
        return min(max(self.probability(context), PROB_MARGIN), PROB_ONE - PROB_MARGIN)

    def update(self, context: Context, value: int):
        """p <- p + ((bin * 2^15 - p) >> 5)."""
        p = self.probability(context)
        self._probabilities[context] = p + (((value << PROB_BITS) - p) >> ADAPT_SHIFT)


class BinaryArithmeticEncoder:
    """Кодер диапазона с переносом через кэш байта.

    Bypass-бин делит диапазон пополам независимо от значения, поэтому длина
    полезной нагрузки не зависит от значений bypass-бинов.
    """

    def __init__(self):
        self.low = 0
        self.range = RANGE_INIT
        self.contexts = ContextState()
        self._cache = 0
        self._cache_size = 1
        self._shift_count = 0
        self._output = bytearray()
        self._finished = False

    def encode_bin(self, value: int, context: Optional[Context] = None):
        """Кодирует один бин; context=None означает bypass."""
        if self._finished:
            raise RuntimeError("Кодер уже завершен")
        if value not in (0, 1):
            raise ValueError(f"Бин должен быть 0 или 1: {value}")

        if context is None:
            self.range >>= 1
            if value:
                self.low += self.range
        else:
            bound = (self.range >> PROB_BITS) * self.contexts.split_probability(context)
            if value:
                self.range = bound
            else:
                self.low += bound
                self.range -= bound
            self.contexts.update(context, value)

        while self.range < RANGE_TOP:
            self.range <<= 8
            self._shift_low()

    def encode_bypass_bits(self, bits: Iterable[int]):
        """Кодирует последовательность bypass-бинов."""
        for bit in bits:
            self.encode_bin(bit)

    def _shift_low(self):
        if (self.low & 0xFFFFFFFF) < 0xFF000000 or self.low >= (1 << 32):
            carry = self.low >> 32
            temp = self._cache
            while True:
                self._output.append((temp + carry) & 0xFF)
                temp = 0xFF
                self._cache_size -= 1
                if self._cache_size == 0:
                    break
            self._cache = (self.low >> 24) & 0xFF
        self._cache_size += 1
        self._shift_count += 1
        self.low = (self.low & 0x00FFFFFF) << 8

    @property
    def bit_count(self) -> int:
        """Размер полезной нагрузки в битах, если завершить кодирование сейчас."""
        if self._finished:
            return len(self._output) * 8
        return (self._shift_count + FLUSH_BYTES) * 8

    def finish(self) -> bytes:
        """Сбрасывает состояние и возвращает полезную нагрузку."""
        if not self._finished:
            for _ in range(FLUSH_BYTES):
                self._shift_low()
            self._finished = True
        return bytes(self._output)


class BinaryArithmeticDecoder:
    """Декодер, зеркальный BinaryArithmeticEncoder."""

    def __init__(self, payload: bytes):
        self._payload = payload
        self._position = 0
        self.range = RANGE_INIT
        self.code = 0
        self.contexts = ContextState()
        for _ in range(FLUSH_BYTES):
            self.code = (self.code << 8) | self._next_byte()

    def _next_byte(self) -> int:
        if self._position >= len(self._payload):
            raise TruncatedStreamError(
                f"Полезная нагрузка закончилась на байте {self._position}"
            )
        byte = self._payload[self._position]
        self._position += 1
        return byte

    def decode_bin(self, context: Optional[Context] = None) -> int:
        """Декодирует один бин; context=None означает bypass."""
        if context is None:
            self.range >>= 1
            if self.code >= self.range:
                self.code -= self.range
                value = 1
            else:
                value = 0
        else:
            bound = (self.range >> PROB_BITS) * self.contexts.split_probability(context)
            if self.code < bound:
                self.range = bound
                value = 1
            else:
                self.code -= bound
                self.range -= bound
                value = 0
            self.contexts.update(context, value)

        while self.range < RANGE_TOP:
            self.range <<= 8
            self.code = ((self.code << 8) | self._next_byte()) & 0xFFFFFFFF

        return value

    def decode_bypass_bits(self, count: int) -> List[int]:
        return [self.decode_bin() for _ in range(count)]


class Binarizer:
    """Бинаризации: усеченный унарный, фиксированной длины, Голомба-Райса."""

    @staticmethod
    def truncated_unary(value: int, c_max: int) -> List[int]:
        """value единиц и завершающий ноль; при value == c_max ноль опускается."""
        if not 0 <= value <= c_max:
            raise BinarizationError(f"Значение {value} вне диапазона [0, {c_max}]")
        bits = [1] * value
        if value < c_max:
            bits.append(0)
        return bits

    @staticmethod
    def read_truncated_unary(read_bit: Callable[[], int], c_max: int) -> int:
        value = 0
        while value < c_max and read_bit():
            value += 1
        return value

    @staticmethod
    def fixed_length(value: int, n: int) -> List[int]:
        """n-битное представление, старший бит первым."""
        if n < 0 or not 0 <= value < (1 << n):
            raise BinarizationError(f"Значение {value} не помещается в {n} бит")
        return [(value >> shift) & 1 for shift in range(n - 1, -1, -1)]

    @staticmethod
    def read_fixed_length(read_bit: Callable[[], int], n: int) -> int:
        value = 0
        for _ in range(n):
            value = (value << 1) | read_bit()
        return value

    @staticmethod
    def golomb_rice(value: int, k: int) -> Tuple[List[int], List[int]]:
        """Префикс unary(value >> k), суффикс - k младших бит."""
        if value < 0 or k < 0:
            raise BinarizationError(f"Недопустимые аргументы Голомба-Райса: {value}, k={k}")
        quotient = value >> k
        prefix = [1] * quotient + [0]
        suffix = Binarizer.fixed_length(value & ((1 << k) - 1), k)
        return prefix, suffix

    @staticmethod
    def read_golomb_rice(read_bit: Callable[[], int], k: int) -> int:
        quotient = 0
        while read_bit():
            quotient += 1
        return (quotient << k) | Binarizer.read_fixed_length(read_bit, k)


def bits_reader(bits: Sequence[int]) -> Callable[[], int]:
    """Читатель бит из готовой последовательности (для обратных бинаризаций)."""
    iterator = iter(bits)

    def read_bit() -> int:
        try:
            return next(iterator)
        except StopIteration:
            raise BinarizationError("Последовательность бит закончилась") from None

    return read_bit


# Функции для обратной совместимости
binarize_truncated_unary = Binarizer.truncated_unary
binarize_fixed_length = Binarizer.fixed_length
binarize_golomb_rice = Binarizer.golomb_rice


def encode_bin(stream: BinaryArithmeticEncoder, value: int,
               context: Optional[Context] = None):
    """Кодирует бин в режиме regular(context) или bypass (context=None)."""
    stream.encode_bin(value, context)


def decode_bin(stream: BinaryArithmeticDecoder, context: Optional[Context] = None) -> int:
    """Декодирует бин в режиме regular(context) или bypass (context=None)."""
    return stream.decode_bin(context)


def bit_count(stream: BinaryArithmeticEncoder) -> int:
    """Точный размер полезной нагрузки в битах."""
    return stream.bit_count
