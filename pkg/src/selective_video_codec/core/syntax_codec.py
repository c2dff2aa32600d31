"""Запись и разбор синтаксических элементов поверх арифметического кодера.

Бинаризации:
    split_flag, pred_mode_flag, is_mpm, abs_mvd_greater0/1, cbf, sig_flag - регулярные бины;
    mpm_index - усеченный унарный (cMax = 5), rem_mode - 6 бит фиксированной длины,
    abs_mvd_minus2 - Голомб-Райс (k = rice_parameter), |level| - 1 - Голомб-Райс (k = 0),
    знаки MVD и шаблон знаков - bypass-бины.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from ..components.syntax_elements import (
    MPM_INDEX_MAX,
    REM_MODE_MAX,
    IpmSyntax,
    MvdSyntax,
    SignPattern,
    SyntaxKind,
)
from .entropy_coder import (
    BinaryArithmeticDecoder,
    BinaryArithmeticEncoder,
    Binarizer,
    Context,
)

REM_MODE_BITS = REM_MODE_MAX.bit_length()


@dataclass(frozen=True)
class TraceEntry:
    """Разобранный декодером элемент: вид, значение и число бит бинаризации."""
    kind: SyntaxKind
    value: int
    length: int = 1


class SyntaxWriter:
    """Бинаризация элементов и передача бинов кодеру."""

    def __init__(self, encoder: BinaryArithmeticEncoder, rice_parameter: int = 1):
        self.encoder = encoder
        self.rice_parameter = rice_parameter

    def _bypass(self, bits: List[int]):
        self.encoder.encode_bypass_bits(bits)

    def split_flag(self, split: bool):
        self.encoder.encode_bin(int(split), Context.SPLIT_FLAG)

    def pred_mode(self, is_inter: bool):
        self.encoder.encode_bin(int(is_inter), Context.PRED_MODE)

    def ipm(self, syntax: IpmSyntax):
        self.encoder.encode_bin(int(syntax.is_mpm), Context.IS_MPM)
        if syntax.is_mpm:
            self._bypass(Binarizer.truncated_unary(syntax.mpm_index, MPM_INDEX_MAX))
        else:
            self._bypass(Binarizer.fixed_length(syntax.rem_mode, REM_MODE_BITS))

    def mvd(self, mvd_x: MvdSyntax, mvd_y: MvdSyntax):
        """Порядок VVC: gr0[x], gr0[y], gr1[x], gr1[y], затем minus2 и знак по компонентам."""
        components = (mvd_x, mvd_y)
        for c in components:
            self.encoder.encode_bin(int(c.abs_gr0), Context.MVD_GR0)
        for c in components:
            if c.abs_gr0:
                self.encoder.encode_bin(int(c.abs_gr1), Context.MVD_GR1)
        for c in components:
            if c.abs_gr0:
                if c.abs_gr1:
                    prefix, suffix = Binarizer.golomb_rice(c.abs_minus_2, self.rice_parameter)
                    self._bypass(prefix + suffix)
                self.encoder.encode_bin(c.sign)

    def residual(self, magnitudes: npt.NDArray, pattern: SignPattern):
        """cbf, флаги значимости, модули - 1 и шаблон знаков одного блока."""
        nonzero = [int(m) for m in magnitudes if m]
        self.encoder.encode_bin(int(bool(nonzero)), Context.CBF)
        if not nonzero:
            return
        for m in magnitudes:
            self.encoder.encode_bin(int(m != 0), Context.SIG_FLAG)
        for m in nonzero:
            prefix, suffix = Binarizer.golomb_rice(m - 1, 0)
            self._bypass(prefix + suffix)
        self._bypass(list(pattern.bits))


class SyntaxReader:
    """Разбор элементов в том же порядке; ведет трассу разобранных значений."""

    def __init__(self, decoder: BinaryArithmeticDecoder, rice_parameter: int = 1,
                 trace: Optional[List[TraceEntry]] = None):
        self.decoder = decoder
        self.rice_parameter = rice_parameter
        self.trace = trace

    def _record(self, kind: SyntaxKind, value: int, length: int = 1):
        if self.trace is not None:
            self.trace.append(TraceEntry(kind, value, length))

    def _read_bypass(self) -> int:
        return self.decoder.decode_bin()

    def split_flag(self) -> bool:
        value = self.decoder.decode_bin(Context.SPLIT_FLAG)
        self._record(SyntaxKind.SPLIT_FLAG, value)
        return bool(value)

    def pred_mode(self) -> bool:
        value = self.decoder.decode_bin(Context.PRED_MODE)
        self._record(SyntaxKind.PRED_MODE_FLAG, value)
        return bool(value)

    def ipm(self) -> IpmSyntax:
        is_mpm = bool(self.decoder.decode_bin(Context.IS_MPM))
        self._record(SyntaxKind.IS_MPM, int(is_mpm))
        if is_mpm:
            index = Binarizer.read_truncated_unary(self._read_bypass, MPM_INDEX_MAX)
            self._record(SyntaxKind.MPM_INDEX, index, MPM_INDEX_MAX.bit_length())
            return IpmSyntax(is_mpm=True, mpm_index=index)
        rem_mode = Binarizer.read_fixed_length(self._read_bypass, REM_MODE_BITS)
        self._record(SyntaxKind.REM_MODE, rem_mode, REM_MODE_BITS)
        # 6 бит дают до 63; значения вне диапазона приводятся к допустимым
        return IpmSyntax(is_mpm=False, rem_mode=min(rem_mode, REM_MODE_MAX))

    def mvd(self) -> Tuple[MvdSyntax, MvdSyntax]:
        gr0 = [bool(self.decoder.decode_bin(Context.MVD_GR0)) for _ in range(2)]
        gr1 = [bool(self.decoder.decode_bin(Context.MVD_GR1)) if g else False for g in gr0]
        for g in gr0:
            self._record(SyntaxKind.MVD_GR0, int(g))
        components = []
        for g0, g1 in zip(gr0, gr1):
            if not g0:
                components.append(MvdSyntax(abs_gr0=False))
                continue
            self._record(SyntaxKind.MVD_GR1, int(g1))
            minus_2 = None
            if g1:
                minus_2 = Binarizer.read_golomb_rice(self._read_bypass, self.rice_parameter)
                self._record(SyntaxKind.MVD_MINUS2, minus_2, self.rice_parameter)
            sign = self.decoder.decode_bin()
            self._record(SyntaxKind.MVD_SIGN, sign)
            components.append(MvdSyntax(abs_gr0=True, abs_gr1=g1, abs_minus_2=minus_2, sign=sign))
        return components[0], components[1]

    def residual(self, size: int) -> Tuple[npt.NDArray[np.int64], SignPattern]:
        count = size * size
        magnitudes = np.zeros(count, dtype=np.int64)
        cbf = self.decoder.decode_bin(Context.CBF)
        self._record(SyntaxKind.CBF, cbf)
        if not cbf:
            return magnitudes, SignPattern()
        significant = [self.decoder.decode_bin(Context.SIG_FLAG) for _ in range(count)]
        positions = [i for i, s in enumerate(significant) if s]
        for i in positions:
            magnitudes[i] = Binarizer.read_golomb_rice(self._read_bypass, 0) + 1
        pattern = SignPattern(tuple(self.decoder.decode_bypass_bits(len(positions))))
        self._record(SyntaxKind.SIGN_PATTERN, len(pattern), len(pattern))
        return magnitudes, pattern
