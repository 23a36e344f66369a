"""Unit test common functionality"""

from importlib import resources
import sys
import unittest


class TestCase(unittest.TestCase):
    """Test case base class"""

    @classmethod
    def resource_package(cls, name):
        """Identify most specific package containing a named resource"""
        for subcls in cls.__mro__:
            package = sys.modules[subcls.__module__].__package__
            if package and resources.files(package).joinpath(name).is_file():
                return package
            if subcls == TestCase:
                break
        raise KeyError("Missing resource '%s'" % name)

    @classmethod
    def resource(cls, name):
        """Get package resource as a traversable object"""
        return resources.files(cls.resource_package(name)).joinpath(name)

    @classmethod
    def resource_text(cls, name):
        """Get package resource content as (text) string"""
        return cls.resource(name).read_text(encoding='utf-8')

    @classmethod
    def resource_path(cls, name):
        """Get package resource as a (context-managed) filesystem path"""
        return resources.as_file(cls.resource(name))
