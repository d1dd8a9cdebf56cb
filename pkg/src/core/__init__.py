from .exceptions import SensingError

__all__ = ['SensingError']
