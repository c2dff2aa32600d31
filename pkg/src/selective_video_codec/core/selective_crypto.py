"""Селективное шифрование синтаксических элементов перед бинаризацией.

Ключевой поток - AES-128 в режиме счетчика: блок счетчика строится из
публичного nonce и позиции блока кодирования, из зашифрованного блока берутся
последние n бит. Шифрование элементов с ограниченным диапазоном выполняется
условным XOR, который оставляет значение в допустимом диапазоне и является
инволюцией.
"""

import dataclasses
import secrets
from dataclasses import dataclass
from typing import Optional, Protocol, Tuple

import numpy as np
from Crypto.Cipher import AES

from ..components.syntax_elements import (
    MPM_INDEX_MAX,
    REM_MODE_MAX,
    ElementClass,
    IpmSyntax,
    MvdSyntax,
    SignPattern,
)

# Раскладка блока счетчика: nonce(64) | frame(24) | x(14) | y(14) | tag(4) | ordinal(8)
NONCE_BITS = 64
FRAME_BITS = 24
COORD_BITS = 14
TAG_BITS = 4
ORDINAL_BITS = 8

# Поле frame: младшие 20 бит - индекс кадра, старшие 4 - счетчик переполнения ordinal
FRAME_INDEX_BITS = 20
SPILL_BITS = FRAME_BITS - FRAME_INDEX_BITS

MAX_CHUNK_BITS = 64
MAX_COORDINATE = (1 << COORD_BITS) - 1
KEY_BYTES = 16


class BlockCipher(Protocol):
    """Подключаемый блочный шифр для генератора ключевого потока."""

    def encrypt_block(self, block: bytes) -> bytes:
        ...


class AesBlockCipher:
    """AES-128 (pycryptodome), один блок в режиме ECB."""

    def __init__(self, key: bytes):
        if len(key) != KEY_BYTES:
            raise ValueError(f"Ключ AES-128 должен быть 16 байт, получено {len(key)}")
        self._cipher = AES.new(key, AES.MODE_ECB)

    def encrypt_block(self, block: bytes) -> bytes:
        return self._cipher.encrypt(block)


class StubBlockCipher:
    """Детерминированная заглушка для тестов.

    seed=None - всегда нулевой блок; иначе псевдослучайный блок,
    зависящий только от seed и входного блока.
    """

    def __init__(self, seed: Optional[int] = None):
        self.seed = seed

    def encrypt_block(self, block: bytes) -> bytes:
        if self.seed is None:
            return bytes(len(block))
        rng = np.random.default_rng([self.seed, *block])
        return rng.integers(0, 256, size=len(block), dtype=np.uint8).tobytes()


@dataclass(frozen=True)
class UnitContext:
    """Идентичность счетчика: кадр, позиция CU, класс элемента, порядковый номер."""
    frame_index: int
    x: int
    y: int
    element_tag: int = 0
    ordinal: int = 0
    spill: int = 0

    def for_class(self, element_class: ElementClass) -> 'UnitContext':
        return dataclasses.replace(self, element_tag=element_class.tag)

    def advanced(self, count: int) -> 'UnitContext':
        """Контекст через count порядковых номеров; переполнение уходит в spill."""
        total = self.ordinal + count
        spill = self.spill + (total >> ORDINAL_BITS)
        if spill >= (1 << SPILL_BITS):
            raise ValueError(f"Переполнение счетчика ordinal в CU ({self.x}, {self.y})")
        return dataclasses.replace(self, ordinal=total & ((1 << ORDINAL_BITS) - 1), spill=spill)


@dataclass
class EncryptionConfig:
    """Какие классы шифруются, секретный ключ и публичный nonce."""
    classes: ElementClass = ElementClass(0)
    key: Optional[bytes] = None
    nonce: int = 0

    def __post_init__(self):
        if not 0 <= self.nonce < (1 << NONCE_BITS):
            raise ValueError(f"nonce должен помещаться в 64 бита: {self.nonce}")
        if self.key is not None and len(self.key) != KEY_BYTES:
            raise ValueError(f"Ключ должен быть 16 байт (32 hex-символа), получено {len(self.key)}")

    @property
    def enabled(self) -> bool:
        return bool(self.classes)

    def is_enabled(self, element_class: ElementClass) -> bool:
        return bool(self.classes & element_class)

    @property
    def header_flags(self) -> int:
        return int(self.classes)

    @staticmethod
    def parse_key(text: str) -> bytes:
        """Разбирает ключ из 32 hex-символов."""
        text = text.strip()
        if len(text) != 2 * KEY_BYTES:
            raise ValueError(f"Ключ должен состоять из 32 hex-символов, получено {len(text)}")
        try:
            return bytes.fromhex(text)
        except ValueError:
            raise ValueError(f"Ключ не является hex-строкой: {text}") from None

    @staticmethod
    def random_nonce() -> int:
        return secrets.randbits(NONCE_BITS)


def check_resolution(width: int, height: int):
    """Проверяет, что координаты CU помещаются в поля блока счетчика."""
    if width - 1 > MAX_COORDINATE or height - 1 > MAX_COORDINATE:
        raise ValueError(
            f"Разрешение {width}x{height} превышает предел блока счетчика "
            f"({MAX_COORDINATE + 1} пикселей)"
        )


class KeystreamGenerator:
    """Генератор ключевого потока в режиме счетчика."""

    def __init__(self, cipher: BlockCipher, nonce: int):
        self.cipher = cipher
        self.nonce = nonce

    @staticmethod
    def derive_counter_block(nonce: int, ctx: UnitContext) -> bytes:
        """Блок счетчика фиксированной раскладки; инъективен в допустимых диапазонах."""
        frame_field = ctx.frame_index | (ctx.spill << FRAME_INDEX_BITS)
        fields = (
            (nonce, NONCE_BITS, 'nonce'),
            (ctx.frame_index, FRAME_INDEX_BITS, 'frame_index'),
            (ctx.spill, SPILL_BITS, 'spill'),
            (ctx.x, COORD_BITS, 'x'),
            (ctx.y, COORD_BITS, 'y'),
            (ctx.element_tag, TAG_BITS, 'element_tag'),
            (ctx.ordinal, ORDINAL_BITS, 'ordinal'),
        )
        for value, width, name in fields:
            if not 0 <= value < (1 << width):
                raise ValueError(f"Поле {name}={value} не помещается в {width} бит")

        counter = nonce
        for value, width in ((frame_field, FRAME_BITS), (ctx.x, COORD_BITS),
                             (ctx.y, COORD_BITS), (ctx.element_tag, TAG_BITS),
                             (ctx.ordinal, ORDINAL_BITS)):
            counter = (counter << width) | value
        return counter.to_bytes(16, 'big')

    def bits(self, ctx: UnitContext, n: int) -> int:
        """Последние n бит (1..64) зашифрованного блока счетчика."""
        if not 1 <= n <= MAX_CHUNK_BITS:
            raise ValueError(f"Запрошено {n} бит, допустимо 1..{MAX_CHUNK_BITS}")
        block = self.cipher.encrypt_block(self.derive_counter_block(self.nonce, ctx))
        return int.from_bytes(block, 'big') & ((1 << n) - 1)


def ranged_xor(value: int, max_value: int, chunk: int) -> int:
    """XOR, если результат не выходит за [0, max_value], иначе значение без изменений."""
    if not 0 <= value <= max_value:
        raise ValueError(f"Значение {value} вне диапазона [0, {max_value}]")
    width = max_value.bit_length()
    if not 0 <= chunk < (1 << width):
        raise ValueError(f"Фрагмент ключевого потока {chunk} шире {width} бит")
    mixed = value ^ chunk
    return mixed if mixed <= max_value else value


class SelectiveEncryptor:
    """Шифрование/расшифрование выбранных классов элементов.

    Каждая операция - инволюция при одинаковых (ключ, nonce, контекст),
    поэтому декодер применяет те же методы после обратной бинаризации.
    """

    def __init__(self, keystream: KeystreamGenerator, classes: ElementClass,
                 rice_parameter: int = 1):
        self.keystream = keystream
        self.classes = classes
        self.rice_parameter = rice_parameter

    def encrypt_ipm(self, syntax: IpmSyntax, ctx: UnitContext) -> IpmSyntax:
        """Шифрует индекс MPM (3 бита, <= 5) или оставшийся режим (6 бит, <= 60)."""
        if not self.classes & ElementClass.LUMA_IPM:
            return syntax
        ctx = ctx.for_class(ElementClass.LUMA_IPM)
        if syntax.is_mpm:
            chunk = self.keystream.bits(ctx, MPM_INDEX_MAX.bit_length())
            return dataclasses.replace(syntax, mpm_index=ranged_xor(syntax.mpm_index, MPM_INDEX_MAX, chunk))
        chunk = self.keystream.bits(ctx, REM_MODE_MAX.bit_length())
        return dataclasses.replace(syntax, rem_mode=ranged_xor(syntax.rem_mode, REM_MODE_MAX, chunk))

    def encrypt_mvd(self, syntax: MvdSyntax, ctx: UnitContext) -> MvdSyntax:
        """Шифрует знак и суффикс Голомба-Райса abs_mvd_minus_2; флаги не трогает."""
        sign = syntax.sign
        abs_minus_2 = syntax.abs_minus_2

        if sign is not None and self.classes & ElementClass.MVD_SIGN:
            sign ^= self.keystream.bits(ctx.for_class(ElementClass.MVD_SIGN), 1)

        k = self.rice_parameter
        if abs_minus_2 is not None and k > 0 and self.classes & ElementClass.MVD_VALUE:
            chunk = self.keystream.bits(ctx.for_class(ElementClass.MVD_VALUE), k)
            abs_minus_2 ^= chunk

        return MvdSyntax(syntax.abs_gr0, syntax.abs_gr1, abs_minus_2, sign)

    def encrypt_sign_pattern(self, pattern: SignPattern,
                             ctx: UnitContext) -> Tuple[SignPattern, UnitContext]:
        """XOR знаков с ключевым потоком той же длины.

        Фрагменты длиннее 64 бит берутся со следующих порядковых номеров.

        Returns:
            Tuple[SignPattern, UnitContext]: Новый шаблон и следующий свободный контекст
        """
        if not self.classes & ElementClass.RESIDUAL_SIGN or not len(pattern):
            return pattern, ctx

        ctx = ctx.for_class(ElementClass.RESIDUAL_SIGN)
        bits = list(pattern.bits)
        for start in range(0, len(bits), MAX_CHUNK_BITS):
            n = min(MAX_CHUNK_BITS, len(bits) - start)
            chunk = self.keystream.bits(ctx, n)
            for i in range(n):
                bits[start + i] ^= (chunk >> (n - 1 - i)) & 1
            ctx = ctx.advanced(1)
        return SignPattern(tuple(bits)), ctx

    # Расшифрование совпадает с шифрованием
    decrypt_ipm = encrypt_ipm
    decrypt_mvd = encrypt_mvd
    decrypt_sign_pattern = encrypt_sign_pattern


def create_encryptor(config: EncryptionConfig, rice_parameter: int = 1,
                     cipher: Optional[BlockCipher] = None) -> Optional[SelectiveEncryptor]:
    """Шифратор по конфигурации; None, если шифровать нечего или нет ключа."""
    if not config.enabled:
        return None
    if cipher is None:
        if config.key is None:
            return None
        cipher = AesBlockCipher(config.key)
    return SelectiveEncryptor(KeystreamGenerator(cipher, config.nonce), config.classes,
                              rice_parameter)


# Функции для обратной совместимости
derive_counter_block = KeystreamGenerator.derive_counter_block


def keystream_bits(key: bytes, nonce: int, ctx: UnitContext, n: int,
                   cipher: Optional[BlockCipher] = None) -> int:
    """Последние n бит AES-128(key, counter_block(nonce, ctx))."""
    generator = KeystreamGenerator(cipher or AesBlockCipher(key), nonce)
    return generator.bits(ctx, n)


def _encryptor(key: bytes, nonce: int, classes: ElementClass,
               cipher: Optional[BlockCipher]) -> SelectiveEncryptor:
    return SelectiveEncryptor(KeystreamGenerator(cipher or AesBlockCipher(key), nonce), classes)


def encrypt_ipm(syntax: IpmSyntax, ctx: UnitContext, key: bytes, nonce: int,
                cipher: Optional[BlockCipher] = None) -> IpmSyntax:
    return _encryptor(key, nonce, ElementClass.LUMA_IPM, cipher).encrypt_ipm(syntax, ctx)


def encrypt_mvd(syntax: MvdSyntax, ctx: UnitContext, key: bytes, nonce: int,
                classes: ElementClass = ElementClass.MVD_VALUE | ElementClass.MVD_SIGN,
                cipher: Optional[BlockCipher] = None) -> MvdSyntax:
    return _encryptor(key, nonce, classes, cipher).encrypt_mvd(syntax, ctx)


def encrypt_sign_pattern(pattern: SignPattern, ctx: UnitContext, key: bytes, nonce: int,
                         cipher: Optional[BlockCipher] = None) -> SignPattern:
    encryptor = _encryptor(key, nonce, ElementClass.RESIDUAL_SIGN, cipher)
    return encryptor.encrypt_sign_pattern(pattern, ctx)[0]


decrypt_ipm = encrypt_ipm
decrypt_mvd = encrypt_mvd
decrypt_sign_pattern = encrypt_sign_pattern
