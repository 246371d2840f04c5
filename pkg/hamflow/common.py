# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from os import PathLike
from typing import TYPE_CHECKING

from fs import open_fs
from fs.base import FS

if TYPE_CHECKING:
    from typing import IO, Optional, Tuple, Union

    FilePath = Union[PathLike, str, bytes]
    FilePathOrObject = Union[FilePath, IO]
    DirPathOrFS = Union[PathLike, str, bytes, FS]

__all__ = ['HamflowError', 'get_fs_file_object', 'opened_file']


class HamflowError(Exception):
    """Common base class for all hamflow errors."""


def get_fs_file_object(
        path: 'FilePathOrObject',
        fs: 'Optional[Union[FS, str]]' = None,
        *,
        mode: str = 'rb'
    ) -> 'Tuple[IO, bool]':
    """
    Opens a file on the given filesystem. This can be given a simple OS path, a path and a filesystem, or an
    already opened file object.

    :param path: A path to a file.
    :param fs: A filesystem or an FS URL.
    :param mode: Mode to open the file with. Text modes are passed through to the filesystem.
    :return: A file-like object and True if the file is newly opened.
    """
    if isinstance(path, (PathLike, str, bytes)):
        if isinstance(path, bytes):
            path = path.decode('utf-8')
        if fs:
            # an FS URL is opened here, creating it for writes
            if not isinstance(fs, FS):
                fs = open_fs(fs, create=('w' in mode or 'a' in mode))
            return fs.open(str(path), mode), True
        else:
            # plain OS path
            return open(path, mode), True
    else:
        # already open; the caller keeps ownership
        return path, False


class opened_file:
    """
    Context manager around :func:`get_fs_file_object` that only closes files it opened itself.

    :param path: A path to a file, or an open file object.
    :param fs: A filesystem or an FS URL.
    :param mode: Mode to open the file with.
    """

    __slots__ = ('_path', '_fs', '_mode', '_fh', '_opened')

    def __init__(self, path: 'FilePathOrObject', fs: 'Optional[Union[FS, str]]' = None, *, mode: str = 'rb'):
        self._path = path
        self._fs = fs
        self._mode = mode
        self._fh = None
        self._opened = False

    def __repr__(self):
        return f'<{type(self).__name__} path={self._path!r} mode={self._mode!r}>'

    def __enter__(self) -> 'IO':
        self._fh, self._opened = get_fs_file_object(self._path, self._fs, mode=self._mode)
        return self._fh

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self._opened:
            self._fh.close()
