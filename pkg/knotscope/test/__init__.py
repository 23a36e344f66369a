"""Unit tests"""

from .common import TestCase
