"""Синтаксические элементы, которые кодер передает в энтропийный кодер."""

import enum
from dataclasses import dataclass, field
from typing import List, Optional


class ElementClass(enum.IntFlag):
    """Классы шифруемых синтаксических элементов.

    Значение флага совпадает с битом поля enc_flags в заголовке контейнера,
    номер бита используется как element_tag в блоке счетчика.
    """
    LUMA_IPM = 1
    MVD_VALUE = 2
    MVD_SIGN = 4
    RESIDUAL_SIGN = 8

    @property
    def tag(self) -> int:
        """Номер класса (0..3) для блока счетчика."""
        return self.value.bit_length() - 1

    @classmethod
    def members(cls) -> List['ElementClass']:
        """Одиночные классы в порядке битов."""
        return [cls.LUMA_IPM, cls.MVD_VALUE, cls.MVD_SIGN, cls.RESIDUAL_SIGN]


# Имена классов на CLI
CLI_CLASS_NAMES = {
    'ipm': ElementClass.LUMA_IPM,
    'mvdv': ElementClass.MVD_VALUE,
    'mvds': ElementClass.MVD_SIGN,
    'rsign': ElementClass.RESIDUAL_SIGN,
}


class SyntaxKind(enum.Enum):
    """Виды синтаксических элементов в потоке."""
    SPLIT_FLAG = 'split_flag'
    PRED_MODE_FLAG = 'pred_mode_flag'
    IS_MPM = 'is_mpm'
    MPM_INDEX = 'mpm_index'
    REM_MODE = 'rem_mode'
    MVD_GR0 = 'abs_mvd_greater0'
    MVD_GR1 = 'abs_mvd_greater1'
    MVD_MINUS2 = 'abs_mvd_minus2'
    MVD_SIGN = 'mvd_sign'
    CBF = 'cbf'
    SIG_FLAG = 'sig_flag'
    LEVEL_MINUS1 = 'level_minus1'
    SIGN_PATTERN = 'sign_pattern'


@dataclass(frozen=True)
class SyntaxElement:
    """Именованное целое значение с допустимым диапазоном [0, max_value]."""
    kind: SyntaxKind
    value: int
    max_value: Optional[int] = None

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"Отрицательное значение элемента {self.kind.value}: {self.value}")
        if self.max_value is not None and self.value > self.max_value:
            raise ValueError(
                f"Значение {self.value} элемента {self.kind.value} вне диапазона "
                f"[0, {self.max_value}]"
            )


MPM_INDEX_MAX = 5
REM_MODE_MAX = 60


@dataclass(frozen=True)
class IpmSyntax:
    """Синтаксис режима внутрикадрового предсказания яркости."""
    is_mpm: bool
    mpm_index: int = 0
    rem_mode: int = 0

    def __post_init__(self):
        if not 0 <= self.mpm_index <= MPM_INDEX_MAX:
            raise ValueError(f"mpm_index вне диапазона [0, 5]: {self.mpm_index}")
        if not 0 <= self.rem_mode <= REM_MODE_MAX:
            raise ValueError(f"rem_mode вне диапазона [0, 60]: {self.rem_mode}")


@dataclass(frozen=True)
class MvdSyntax:
    """Синтаксис одной компоненты разности векторов движения.

    abs_minus_2 и sign равны None, если элемент отсутствует в потоке.
    """
    abs_gr0: bool
    abs_gr1: bool = False
    abs_minus_2: Optional[int] = None
    sign: Optional[int] = None

    def __post_init__(self):
        if not self.abs_gr0 and (self.abs_gr1 or self.abs_minus_2 is not None
                                 or self.sign is not None):
            raise ValueError("При abs_gr0=0 других полей MVD быть не должно")
        if self.abs_gr0 and self.sign not in (0, 1):
            raise ValueError("При abs_gr0=1 знак обязателен и равен 0 или 1")
        if self.abs_gr1 != (self.abs_minus_2 is not None):
            raise ValueError("abs_minus_2 присутствует тогда и только тогда, когда abs_gr1=1")
        if self.abs_minus_2 is not None and self.abs_minus_2 < 0:
            raise ValueError(f"abs_minus_2 < 0: {self.abs_minus_2}")


@dataclass(frozen=True)
class SignPattern:
    """Знаки ненулевых коэффициентов в порядке сканирования (1 = отрицательный)."""
    bits: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("SignPattern содержит не бинарные значения")

    def __len__(self) -> int:
        return len(self.bits)


def parse_class_list(text: str) -> ElementClass:
    """Разбирает список классов вида "ipm,mvdv,mvds,rsign"."""
    classes = ElementClass(0)
    for name in (part.strip().lower() for part in text.split(',')):
        if not name:
            continue
        if name not in CLI_CLASS_NAMES:
            raise ValueError(
                f"Неизвестный класс элементов: {name} "
                f"(допустимо: {', '.join(CLI_CLASS_NAMES)})"
            )
        classes |= CLI_CLASS_NAMES[name]
    return classes
