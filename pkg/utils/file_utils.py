"""
文件工具模块
"""
import os
import hashlib
from typing import Optional

from config.settings import FILE_TYPES
from utils.logger import get_logger

# 创建模块的logger
logger = get_logger(__name__)


def get_file_type(file_path: str) -> Optional[str]:
    """
    获取文件类型

    Args:
        file_path (str): 文件路径

    Returns:
        str: 文件类型（'config', 'mesh', 'checkpoint', 'csv', 'vtk'），无法识别时返回None
    """
    ext = os.path.splitext(file_path)[1].lower()

    for file_type, extensions in FILE_TYPES.items():
        if ext in extensions:
            return file_type

    return None


def ensure_file_exists(file_path: str) -> bool:
    """
    确保文件存在

    Args:
        file_path (str): 文件路径

    Returns:
        bool: 文件是否存在
    """
    if not os.path.exists(file_path):
        logger.error(f"文件不存在: {file_path}")
        return False
    return True


def create_directory_if_not_exists(directory: str) -> bool:
    """
    如果目录不存在则创建

    Args:
        directory (str): 目录路径

    Returns:
        bool: 是否成功创建目录
    """
    try:
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
            logger.info(f"创建目录: {directory}")
        return True
    except Exception as e:
        logger.error(f"创建目录失败: {e}")
        return False


def text_digest(text: str) -> str:
    """计算文本的 SHA-256 摘要，用于检查点中的配置指纹"""
    return hashlib.sha256(text.encode('utf-8')).hexdigest()
