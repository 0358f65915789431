# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

"""Derivative-free trust-region optimization with sparse quadratic models"""

__version__ = "0.1.0"
