import os
from typing import Optional


class FileUtils:
    """Утилиты для работы с файлами .yuv и .sevc."""

    SUPPORTED_FORMATS = {'.yuv', '.sevc'}

    @classmethod
    def validate_file_path(cls, file_path: str, expected_ext: Optional[str] = None) -> Optional[str]:
        """Проверяет валидность пути к файлу.

        Args:
            file_path: Путь к файлу
            expected_ext: Требуемое расширение ('.yuv' или '.sevc'); None - любое поддерживаемое

        Returns:
            Optional[str]: Сообщение об ошибке или None если все ок
        """
        if not os.path.exists(file_path):
            return f"Файл не существует: {file_path}"

        file_ext = os.path.splitext(file_path)[1].lower()
        allowed = {expected_ext} if expected_ext else cls.SUPPORTED_FORMATS
        if file_ext not in allowed:
            return f"Неподдерживаемый формат файла: {file_ext}"

        return None

    @classmethod
    def get_file_info(cls, file_path: str, frame_bytes: Optional[int] = None) -> dict:
        """Имя и размер файла; для сырого YUV - число целых кадров и остаток в байтах."""
        size = os.path.getsize(file_path)
        info = {
            'name': os.path.basename(file_path),
            'size_bytes': size,
            'size_kb': round(size / 1024, 1),
        }
        if frame_bytes:
            info['frames'], info['tail_bytes'] = divmod(size, frame_bytes)
        return info

    @staticmethod
    def ensure_parent_dir(output_path: str) -> str:
        """Создает родительскую директорию выходного файла."""
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        return output_path

    @classmethod
    def read_bytes(cls, input_path: str) -> bytes:
        if not os.path.exists(input_path):
            raise FileNotFoundError(f"Файл не найден: {input_path}")
        with open(input_path, 'rb') as f:
            return f.read()

    @classmethod
    def write_bytes(cls, output_path: str, data: bytes) -> int:
        cls.ensure_parent_dir(output_path)
        with open(output_path, 'wb') as f:
            return f.write(data)
