# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from .catalog import *
from .frame import *
from .surface import *
from .symplectic import *
from .system import *
