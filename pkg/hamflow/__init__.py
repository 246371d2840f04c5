# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from collections import namedtuple

__author__ = 'hamflow contributors'
__copyright__ = 'Copyright (c) 2024-2026 hamflow contributors'
__license__ = 'MIT'

VersionInfo = namedtuple('VersionInfo', 'major minor micro releaselevel serial')
version_info = VersionInfo(major=0, minor=3, micro=0, releaselevel='dev', serial=0)
__version__ = '0.3.0.dev0'
