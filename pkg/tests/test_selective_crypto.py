import pytest

from selective_video_codec.components.syntax_elements import (
    ElementClass,
    IpmSyntax,
    MvdSyntax,
    SignPattern,
    parse_class_list,
)
from selective_video_codec.core.selective_crypto import (
    AesBlockCipher,
    EncryptionConfig,
    KeystreamGenerator,
    SelectiveEncryptor,
    StubBlockCipher,
    UnitContext,
    check_resolution,
    create_encryptor,
    derive_counter_block,
    encrypt_ipm,
    ranged_xor,
)

TEST_KEY = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
TEST_NONCE = 0x0123456789ABCDEF

ALL_CLASSES = ElementClass.LUMA_IPM | ElementClass.MVD_VALUE | ElementClass.MVD_SIGN | \
    ElementClass.RESIDUAL_SIGN


def _encryptor(classes=ALL_CLASSES, key=TEST_KEY) -> SelectiveEncryptor:
    return SelectiveEncryptor(KeystreamGenerator(AesBlockCipher(key), TEST_NONCE), classes)


class TestKeystream:
    """Тесты ключевого потока в режиме счетчика"""

    def test_aes_known_answer(self):
        """Блок AES-128 совпадает с опубликованным вектором CTR"""
        cipher = AesBlockCipher(bytes.fromhex('2b7e151628aed2a6abf7158809cf4f3c'))
        block = cipher.encrypt_block(bytes.fromhex('f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff'))
        assert block.hex() == 'ec8cdf7398607cb0f2d21675ea9ea1e4'

    def test_counter_block_layout(self):
        """nonce | frame | x | y | tag | ordinal, старший бит первым"""
        ctx = UnitContext(frame_index=3, x=16, y=32, element_tag=2, ordinal=7)
        block = derive_counter_block(0x1122334455667788, ctx)
        value = int.from_bytes(block, 'big')
        assert block[:8] == bytes.fromhex('1122334455667788')
        assert value & 0xFF == 7
        assert (value >> 8) & 0xF == 2
        assert (value >> 12) & 0x3FFF == 32
        assert (value >> 26) & 0x3FFF == 16
        assert (value >> 40) & 0xFFFFFF == 3

    def test_counter_blocks_distinct(self):
        """Разные контексты дают разные блоки"""
        contexts = [UnitContext(f, x, y, t, o) for f in (0, 1) for x in (0, 8)
                    for y in (0, 8) for t in range(4) for o in (0, 1)]
        blocks = {derive_counter_block(TEST_NONCE, ctx) for ctx in contexts}
        assert len(blocks) == len(contexts)

    def test_spill_separates_ordinal_overflow(self):
        ctx = UnitContext(0, 0, 0, ordinal=255)
        next_ctx = ctx.advanced(1)
        assert (next_ctx.ordinal, next_ctx.spill) == (0, 1)
        assert derive_counter_block(0, next_ctx) != derive_counter_block(0, UnitContext(0, 0, 0))

    @pytest.mark.parametrize("ctx", [
        UnitContext(1 << 20, 0, 0), UnitContext(0, 1 << 14, 0), UnitContext(0, 0, 0, ordinal=256),
    ])
    def test_counter_field_overflow(self, ctx):
        with pytest.raises(ValueError):
            derive_counter_block(0, ctx)

    def test_bits_are_low_bits_of_block(self):
        generator = KeystreamGenerator(AesBlockCipher(TEST_KEY), TEST_NONCE)
        ctx = UnitContext(1, 8, 8)
        block = AesBlockCipher(TEST_KEY).encrypt_block(derive_counter_block(TEST_NONCE, ctx))
        assert generator.bits(ctx, 6) == block[-1] & 0x3F
        with pytest.raises(ValueError):
            generator.bits(ctx, 65)

    def test_resolution_limit(self):
        check_resolution(16384, 16384)
        with pytest.raises(ValueError):
            check_resolution(16385, 16)


class TestRangedXor:
    """Тесты условного XOR"""

    @pytest.mark.parametrize("max_value", range(1, 64))
    def test_involution_and_range(self, max_value):
        """Все пары (значение, фрагмент): результат в диапазоне, повтор восстанавливает значение"""
        width = max_value.bit_length()
        for value in range(max_value + 1):
            for chunk in range(1 << width):
                mixed = ranged_xor(value, max_value, chunk)
                assert 0 <= mixed <= max_value
                assert ranged_xor(mixed, max_value, chunk) == value
                if max_value == (1 << width) - 1:
                    assert mixed == value ^ chunk

    def test_out_of_range_kept(self):
        # 5 ^ 7 = 2 помещается, 3 ^ 4 = 7 > 5 - без изменений
        assert ranged_xor(5, 5, 7) == 2
        assert ranged_xor(3, 5, 4) == 3

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            ranged_xor(6, 5, 0)
        with pytest.raises(ValueError):
            ranged_xor(0, 5, 8)


class TestSelectiveEncryptor:
    """Тесты шифрования синтаксических элементов"""

    def setup_method(self):
        self.encryptor = _encryptor()
        self.ctx = UnitContext(frame_index=2, x=24, y=8)

    def test_ipm_roundtrip_in_range(self):
        """Режимы остаются в допустимом диапазоне и расшифровываются"""
        for index in range(6):
            syntax = IpmSyntax(True, mpm_index=index)
            encrypted = self.encryptor.encrypt_ipm(syntax, self.ctx)
            assert encrypted.is_mpm
            assert self.encryptor.decrypt_ipm(encrypted, self.ctx) == syntax
        for rem in range(61):
            syntax = IpmSyntax(False, rem_mode=rem)
            encrypted = self.encryptor.encrypt_ipm(syntax, self.ctx)
            assert not encrypted.is_mpm
            assert self.encryptor.decrypt_ipm(encrypted, self.ctx) == syntax

    def test_rem_modes_permuted(self):
        """Шифрование оставшихся режимов - перестановка"""
        ctx = UnitContext(0, 0, 0)
        encrypted = {self.encryptor.encrypt_ipm(IpmSyntax(False, rem_mode=r), ctx).rem_mode
                     for r in range(61)}
        assert encrypted == set(range(61))

    def test_mvd_flags_untouched(self):
        """Флаги gr0/gr1 не шифруются, знак и суффикс - инволюция"""
        syntax = MvdSyntax(True, True, 6, 1)
        encrypted = self.encryptor.encrypt_mvd(syntax, self.ctx)
        assert encrypted.abs_gr0 and encrypted.abs_gr1
        assert encrypted.abs_minus_2 >> 1 == 3
        assert self.encryptor.decrypt_mvd(encrypted, self.ctx) == syntax

    def test_mvd_zero_unchanged(self):
        syntax = MvdSyntax(False)
        assert self.encryptor.encrypt_mvd(syntax, self.ctx) == syntax

    def test_disabled_class_is_identity(self):
        encryptor = _encryptor(ElementClass.MVD_SIGN)
        syntax = IpmSyntax(False, rem_mode=17)
        assert encryptor.encrypt_ipm(syntax, self.ctx) == syntax
        mvd = MvdSyntax(True, True, 6, 0)
        encrypted = encryptor.encrypt_mvd(mvd, self.ctx)
        assert encrypted.abs_minus_2 == 6

    def test_long_sign_pattern(self):
        """Шаблоны длиннее 64 бит используют следующие порядковые номера"""
        pattern = SignPattern(tuple(i % 2 for i in range(150)))
        encrypted, next_ctx = self.encryptor.encrypt_sign_pattern(pattern, self.ctx)
        assert len(encrypted) == 150
        assert next_ctx.ordinal == 3
        decrypted, _ = self.encryptor.decrypt_sign_pattern(encrypted, self.ctx)
        assert decrypted == pattern

    def test_empty_sign_pattern(self):
        pattern, ctx = self.encryptor.encrypt_sign_pattern(SignPattern(), self.ctx)
        assert len(pattern) == 0 and ctx == self.ctx

    def test_zero_stub_cipher_is_identity(self):
        """Нулевая заглушка не меняет ни одного элемента"""
        encryptor = SelectiveEncryptor(KeystreamGenerator(StubBlockCipher(), 0), ALL_CLASSES)
        syntax = IpmSyntax(False, rem_mode=42)
        assert encryptor.encrypt_ipm(syntax, self.ctx) == syntax
        pattern = SignPattern((1, 0, 1))
        assert encryptor.encrypt_sign_pattern(pattern, self.ctx)[0] == pattern

    def test_wrong_key_differs(self):
        """Другой ключ дает другой шифртекст хотя бы для части режимов"""
        other = _encryptor(key=bytes(16))
        rems = [IpmSyntax(False, rem_mode=r) for r in range(61)]
        differs = [self.encryptor.encrypt_ipm(s, self.ctx) != other.encrypt_ipm(s, self.ctx)
                   for s in rems]
        assert any(differs)

    def test_module_alias(self):
        syntax = IpmSyntax(True, mpm_index=2)
        encrypted = encrypt_ipm(syntax, self.ctx, TEST_KEY, TEST_NONCE)
        assert encrypt_ipm(encrypted, self.ctx, TEST_KEY, TEST_NONCE) == syntax


class TestEncryptionConfig:
    """Тесты конфигурации шифрования"""

    def test_parse_key(self):
        assert EncryptionConfig.parse_key('00' * 16) == bytes(16)
        with pytest.raises(ValueError):
            EncryptionConfig.parse_key('abc')
        with pytest.raises(ValueError):
            EncryptionConfig.parse_key('zz' * 16)

    def test_header_flags(self):
        config = EncryptionConfig(parse_class_list('ipm,rsign'), TEST_KEY)
        assert config.header_flags == 0b1001

    def test_parse_unknown_class(self):
        with pytest.raises(ValueError):
            parse_class_list('ipm,chroma')

    def test_invalid_nonce(self):
        with pytest.raises(ValueError):
            EncryptionConfig(nonce=1 << 64)

    def test_create_encryptor(self):
        assert create_encryptor(EncryptionConfig()) is None
        assert create_encryptor(EncryptionConfig(ElementClass.LUMA_IPM)) is None
        assert create_encryptor(EncryptionConfig(ElementClass.LUMA_IPM),
                                cipher=StubBlockCipher()) is not None
        assert create_encryptor(EncryptionConfig(ElementClass.LUMA_IPM, TEST_KEY)) is not None

    def test_class_tags(self):
        assert [c.tag for c in ElementClass.members()] == [0, 1, 2, 3]
